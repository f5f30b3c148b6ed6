/* Shared test plumbing: fixture bodies captured from a live server over
 * the seed-42 synthetic snapshot (scripts/capture-fixtures.sh), plus a
 * route-table fetch stub. */

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { Json, Num, parseRaw } from '../src/payload.js';

const here = dirname(fileURLToPath(import.meta.url));

export function fixture(name: string): string {
  return readFileSync(join(here, 'fixtures', name), 'utf8');
}

export const REJECT = Symbol('network failure');

export type Route =
  | string
  | { status: number }
  | typeof REJECT
  | (() => Promise<string>);

export interface RouteTable {
  [path: string]: Route;
}

export function installFetch(routes: RouteTable): void {
  globalThis.fetch = (async (input: unknown) => {
    const path = String(input);
    const route = routes[path];
    if (route === undefined) {
      return { ok: false, status: 404, text: async () => 'not found' };
    }
    if (route === REJECT) {
      throw new TypeError('fetch failed');
    }
    if (typeof route === 'object') {
      return { ok: false, status: route.status, text: async () => 'error' };
    }
    const body = typeof route === 'function' ? await route() : route;
    return { ok: true, status: 200, text: async () => body };
  }) as unknown as typeof fetch;
}

/* One route per DA id, fabricated from the collection body the same way
 * the server shapes its single-DA documents. */
export function daRoutes(): RouteTable {
  const collection = JSON.parse(fixture('das.json'));
  const routes: RouteTable = {};
  for (const feature of collection.features) {
    routes[`/api/das/${feature.properties.DAUID}`] = JSON.stringify({
      feature,
      labels: collection.labels,
    });
  }
  // the captured body wins for the id it covers
  routes['/api/das/24360085'] = fixture('da_24360085.json');
  return routes;
}

export function standardRoutes(): RouteTable {
  return {
    '/api/health': fixture('health.json'),
    '/api/das': fixture('das.json'),
    '/api/cvi/histogram': fixture('histogram.json'),
    '/api/clusters': fixture('clusters.json'),
    '/api/importance': fixture('importance.json'),
    '/api/shap/global': fixture('shap_global.json'),
    '/api/lvi': fixture('lvi.json'),
    ...daRoutes(),
  };
}

export function freshDom(): HTMLElement {
  document.body.innerHTML = '';
  history.replaceState(null, '', '/');
  const root = document.createElement('div');
  document.body.appendChild(root);
  return root;
}

/* Every number token and string leaf in a body, exactly as serialized. */
export function bodyTokens(text: string): Set<string> {
  const tokens = new Set<string>();
  const walk = (node: Json): void => {
    if (node === null || typeof node === 'boolean') return;
    if (typeof node === 'string') {
      tokens.add(node);
      return;
    }
    if (Array.isArray(node)) {
      node.forEach(walk);
      return;
    }
    const keys = Object.keys(node);
    if (
      keys.length === 2 &&
      typeof (node as Num).v === 'number' &&
      typeof (node as Num).s === 'string'
    ) {
      tokens.add((node as Num).s);
      return;
    }
    for (const [key, value] of Object.entries(node)) {
      tokens.add(key);
      walk(value as Json);
    }
  };
  walk(parseRaw(text));
  return tokens;
}

export function numericTokens(text: string): string[] {
  return text.match(/-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?/g) ?? [];
}

export function domText(rootNode: Node): string[] {
  const chunks: string[] = [];
  const walker = document.createTreeWalker(rootNode, NodeFilter.SHOW_TEXT);
  for (let node = walker.nextNode(); node; node = walker.nextNode()) {
    const text = node.textContent ?? '';
    if (text.trim()) chunks.push(text);
  }
  return chunks;
}
