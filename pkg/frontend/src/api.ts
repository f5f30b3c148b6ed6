/* Thin read-only client for the snapshot API. */

import {
  Clusters,
  Collection,
  DaDoc,
  Histogram,
  Importance,
  Json,
  Lvi,
  parseRaw,
  ShapGlobal,
} from './payload.js';

export class ApiError extends Error {
  constructor(readonly path: string, readonly status: number | null, detail: string) {
    super(detail);
  }
}

export class Api {
  constructor(readonly base: string = '') {}

  async get(path: string): Promise<Json> {
    let response: { ok: boolean; status: number; text(): Promise<string> };
    try {
      response = await fetch(this.base + path);
    } catch (e) {
      throw new ApiError(path, null, `cannot reach the server: ${(e as Error).message}`);
    }
    if (!response.ok) {
      throw new ApiError(path, response.status, `${path} answered ${response.status}`);
    }
    return parseRaw(await response.text());
  }

  collection(): Promise<Collection> {
    return this.get('/api/das') as Promise<unknown> as Promise<Collection>;
  }

  da(id: string): Promise<DaDoc> {
    return this.get(`/api/das/${encodeURIComponent(id)}`) as Promise<unknown> as Promise<DaDoc>;
  }

  histogram(): Promise<Histogram> {
    return this.get('/api/cvi/histogram') as Promise<unknown> as Promise<Histogram>;
  }

  clusters(): Promise<Clusters> {
    return this.get('/api/clusters') as Promise<unknown> as Promise<Clusters>;
  }

  importance(): Promise<Importance> {
    return this.get('/api/importance') as Promise<unknown> as Promise<Importance>;
  }

  shapGlobal(): Promise<ShapGlobal> {
    return this.get('/api/shap/global') as Promise<unknown> as Promise<ShapGlobal>;
  }

  lvi(): Promise<Lvi> {
    return this.get('/api/lvi') as Promise<unknown> as Promise<Lvi>;
  }
}
