/* Payload reader that keeps the server's number spelling.
 *
 * Every number shown in the page must be the exact token the API
 * serialized, and JSON.parse forgets the source text (0.3500 comes back
 * as 0.35, 1e-05 re-renders as 0.00001).  This reader walks the body
 * once and wraps each number as {v, s}: v for positioning math, s for
 * anything the user reads.
 */

export interface Num {
  v: number;
  s: string;
}

export type Json = null | boolean | string | Num | Json[] | JsonObject;

export interface JsonObject {
  [key: string]: Json;
}

const NUMBER = /-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][+-]?\d+)?/y;

export function parseRaw(text: string): Json {
  let i = 0;

  function error(what: string): never {
    throw new SyntaxError(`${what} at offset ${i}`);
  }

  function skipWs(): void {
    while (i < text.length && ' \t\n\r'.includes(text[i])) i++;
  }

  function parseString(): string {
    const start = i;
    i++;
    while (i < text.length) {
      if (text[i] === '\\') i += 2;
      else if (text[i] === '"') {
        i++;
        // delegate escape handling to the platform parser
        return JSON.parse(text.slice(start, i)) as string;
      } else i++;
    }
    error('unterminated string');
  }

  function parseValue(): Json {
    skipWs();
    const c = text[i];
    if (c === '"') return parseString();
    if (c === '{') {
      i++;
      const obj: JsonObject = {};
      skipWs();
      if (text[i] === '}') {
        i++;
        return obj;
      }
      for (;;) {
        skipWs();
        if (text[i] !== '"') error('expected object key');
        const key = parseString();
        skipWs();
        if (text[i] !== ':') error("expected ':'");
        i++;
        obj[key] = parseValue();
        skipWs();
        if (text[i] === ',') {
          i++;
          continue;
        }
        if (text[i] === '}') {
          i++;
          return obj;
        }
        error("expected ',' or '}'");
      }
    }
    if (c === '[') {
      i++;
      const arr: Json[] = [];
      skipWs();
      if (text[i] === ']') {
        i++;
        return arr;
      }
      for (;;) {
        arr.push(parseValue());
        skipWs();
        if (text[i] === ',') {
          i++;
          continue;
        }
        if (text[i] === ']') {
          i++;
          return arr;
        }
        error("expected ',' or ']'");
      }
    }
    if (text.startsWith('true', i)) {
      i += 4;
      return true;
    }
    if (text.startsWith('false', i)) {
      i += 5;
      return false;
    }
    if (text.startsWith('null', i)) {
      i += 4;
      return null;
    }
    NUMBER.lastIndex = i;
    const m = NUMBER.exec(text);
    if (m && m[0].length > 0) {
      i += m[0].length;
      return { v: Number(m[0]), s: m[0] };
    }
    error('unexpected token');
  }

  const value = parseValue();
  skipWs();
  if (i !== text.length) error('trailing content');
  return value;
}

/* Typed views over the parsed trees.  These mirror the documented
 * endpoint bodies; numbers are Num everywhere. */

export interface DaProperties {
  DAUID: string;
  bin: Num;
  cvi: Num;
  fill: string;
  indicators: { [id: string]: Num };
  provenance: { [id: string]: string };
}

export interface DaFeature {
  type: string;
  geometry: { type: string; coordinates: Num[][][] };
  properties: DaProperties;
}

export interface Collection {
  type: string;
  labels: { [id: string]: string };
  features: DaFeature[];
}

export interface DaDoc {
  feature: DaFeature;
  labels: { [id: string]: string };
}

export interface Histogram {
  year: Num;
  counts: Num[];
  edges: Num[];
  colors: string[];
  degenerate: boolean;
}

export interface Clusters {
  assignments: { [id: string]: string };
  colors: { [sector: string]: string };
  silhouette: {
    mean: Num;
    per_cluster: { sector: string; sorted_scores: Num[] }[];
    negatives: { da_id: string; sector: string; s: Num }[];
  };
  radar: {
    axes: string[];
    sectors: {
      sector: string;
      members: { da_id: string; values: Num[] }[];
      centroid: Num[];
      dispersion: Num;
    }[];
  };
}

export interface Importance {
  features: string[];
  forest: Num[];
  boosted: Num[];
  forest_ranking: string[];
  boosted_ranking: string[];
  rank_correlation: Num;
}

export interface ShapGlobal {
  base_value: Num;
  features: { id: string; mean_abs: Num; shap: Num[]; values: Num[] }[];
}

export interface ForecastModel {
  prediction: Num;
  raw_prediction: Num;
  mse: Num;
  clamped: boolean;
}

export interface LviSector {
  sector: string;
  observed: Num[][];
  solid: Num[][];
  dotted: Num[][];
  points: [Num, Num, string][];
  forecast: { [model: string]: ForecastModel };
  selected_model: string;
  target_year: Num;
}

export interface Lvi {
  sectors: LviSector[];
  years: Num[];
}
