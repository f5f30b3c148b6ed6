import { describe, expect, it } from 'vitest';

import { Json, Num, parseRaw } from '../src/payload.js';

import { fixture } from './helpers.js';

/* Collapse Num wrappers so trees can be compared against JSON.parse. */
function unwrap(node: Json): unknown {
  if (node === null || typeof node !== 'object') return node;
  if (Array.isArray(node)) return node.map(unwrap);
  const keys = Object.keys(node);
  if (
    keys.length === 2 &&
    typeof (node as Num).v === 'number' &&
    typeof (node as Num).s === 'string'
  ) {
    return (node as Num).v;
  }
  const out: { [key: string]: unknown } = {};
  for (const [key, value] of Object.entries(node)) out[key] = unwrap(value);
  return out;
}

describe('parseRaw', () => {
  it('keeps the exact number spelling the server used', () => {
    const doc = parseRaw('{"a": 0.3500, "b": 1e-05, "c": -0.0, "d": 2021}') as {
      [key: string]: Num;
    };
    expect(doc.a.s).toBe('0.3500');
    expect(doc.a.v).toBe(0.35);
    expect(doc.b.s).toBe('1e-05');
    expect(doc.b.v).toBe(0.00001);
    expect(doc.c.s).toBe('-0.0');
    expect(doc.d.s).toBe('2021');
    expect(doc.d.v).toBe(2021);
  });

  it('handles nested arrays, booleans, null and escapes', () => {
    const doc = parseRaw(
      '{"rows": [[1, 2.50], []], "ok": true, "none": null, "name": "caf\\u00e9 \\"x\\""}',
    ) as { [key: string]: Json };
    const rows = doc.rows as Num[][];
    expect(rows[0][1].s).toBe('2.50');
    expect(doc.ok).toBe(true);
    expect(doc.none).toBeNull();
    expect(doc.name).toBe('café "x"');
  });

  it('rejects malformed bodies', () => {
    expect(() => parseRaw('{')).toThrow(SyntaxError);
    expect(() => parseRaw('tru')).toThrow(SyntaxError);
    expect(() => parseRaw('[1,]')).toThrow(SyntaxError);
    expect(() => parseRaw('{"a": 1} extra')).toThrow(SyntaxError);
    expect(() => parseRaw('')).toThrow(SyntaxError);
  });

  const names = [
    'health.json',
    'das.json',
    'da_24360085.json',
    'histogram.json',
    'clusters.json',
    'importance.json',
    'shap_global.json',
    'lvi.json',
  ];

  for (const name of names) {
    it(`agrees with JSON.parse on ${name}`, () => {
      const text = fixture(name);
      expect(unwrap(parseRaw(text))).toEqual(JSON.parse(text));
    });
  }
});
