/* The page may position things with arithmetic, but it must never SHOW a
 * number the server did not serialize.  This walks every screen the app
 * has, harvests all numeric substrings from the rendered text, and
 * checks each one against the tokens of the bodies that were served. */

import { describe, expect, it } from 'vitest';

import { Api } from '../src/api.js';
import { createApp } from '../src/main.js';
import { Tab, TABS } from '../src/state.js';

import {
  bodyTokens,
  domText,
  freshDom,
  installFetch,
  numericTokens,
  standardRoutes,
} from './helpers.js';

describe('every number on screen comes from the API', () => {
  it('holds across all tabs, layers, hover, and a selection', async () => {
    const routes = standardRoutes();
    installFetch(routes);

    const allowed = new Set<string>();
    for (const route of Object.values(routes)) {
      if (typeof route !== 'string') continue;
      for (const token of bodyTokens(route)) {
        allowed.add(token);
        // numbers embedded in served strings (ids, labels) count too
        for (const sub of numericTokens(token)) allowed.add(sub);
      }
    }

    const root = freshDom();
    const app = createApp(root, new Api(''));
    await app.load();
    await app.idle();

    const offenders = new Set<string>();
    const sweep = (): void => {
      for (const chunk of domText(root)) {
        for (const token of numericTokens(chunk)) {
          if (!allowed.has(token)) offenders.add(`${token} in "${chunk.trim()}"`);
        }
      }
    };

    sweep();
    root
      .querySelector('path[data-da="24360085"]')
      ?.dispatchEvent(new MouseEvent('mouseenter'));
    await app.idle();
    sweep();
    root
      .querySelector('path[data-da="24360085"]')
      ?.dispatchEvent(new MouseEvent('click'));
    await app.idle();
    sweep();
    root
      .querySelector('button[data-layer="clusters"]')
      ?.dispatchEvent(new MouseEvent('click'));
    await app.idle();
    sweep();
    for (const tab of TABS as Tab[]) {
      root
        .querySelector(`button[data-tab="${tab}"]`)
        ?.dispatchEvent(new MouseEvent('click'));
      await app.idle();
      sweep();
      if (tab === 'importance') {
        root
          .querySelector('.chart button[data-model="boosted"]')
          ?.dispatchEvent(new MouseEvent('click'));
        sweep();
      }
    }

    expect(Array.from(offenders)).toEqual([]);
  });
});
