/* Interaction latency over the full feature set: selecting features one
 * after another must each settle (fetch stub, parse, panel render) well
 * inside the interactive budget. */

import { describe, expect, it } from 'vitest';

import { Api } from '../src/api.js';
import { createApp } from '../src/main.js';
import { Collection, parseRaw } from '../src/payload.js';

import { fixture, freshDom, installFetch, standardRoutes } from './helpers.js';

const BUDGET_MS = 100;

describe('interaction latency', () => {
  it('keeps every selection under the budget across all features', async () => {
    installFetch(standardRoutes());
    const root = freshDom();
    const app = createApp(root, new Api(''));
    await app.load();
    await app.idle();

    const collection = parseRaw(fixture('das.json')) as unknown as Collection;
    const ids = collection.features.map((f) => f.properties.DAUID);
    expect(ids).toHaveLength(87);

    const timings: number[] = [];
    for (const id of ids) {
      const path = root.querySelector(`path[data-da="${id}"]`);
      expect(path).not.toBeNull();
      const start = performance.now();
      path?.dispatchEvent(new MouseEvent('click'));
      await app.idle();
      timings.push(performance.now() - start);
      expect(root.querySelector('.panel-title')?.textContent).toBe(id);
    }
    expect(timings).toHaveLength(87);
    expect(Math.max(...timings)).toBeLessThan(BUDGET_MS);
  });

  it('keeps hover feedback under the budget', async () => {
    installFetch(standardRoutes());
    const root = freshDom();
    const app = createApp(root, new Api(''));
    await app.load();
    await app.idle();

    const tooltip = root.querySelector('.tooltip');
    for (const path of Array.from(root.querySelectorAll('path.da')).slice(0, 30)) {
      const start = performance.now();
      path.dispatchEvent(new MouseEvent('mouseenter'));
      const elapsed = performance.now() - start;
      expect(tooltip?.classList.contains('hidden')).toBe(false);
      expect(elapsed).toBeLessThan(BUDGET_MS);
      path.dispatchEvent(new MouseEvent('mouseleave'));
    }
  });
});
