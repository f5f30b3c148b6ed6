/* Chart tab renderers.
 *
 * Each renderer draws one endpoint's payload.  Scales and positions are
 * computed from the parsed values, but every number that ends up as
 * visible text is a raw token from the body (Num.s), so the page never
 * shows an amount the server did not serialize.
 */

import { clear, el, svgEl } from './dom.js';
import {
  Clusters,
  Histogram,
  Importance,
  Lvi,
  Num,
  ShapGlobal,
} from './payload.js';

export function renderChartError(
  container: HTMLElement,
  endpoint: string,
  detail: string,
): void {
  clear(container);
  const box = el('div', 'chart-error');
  box.appendChild(el('p', 'chart-error-title', `chart unavailable (${endpoint})`));
  box.appendChild(el('p', 'chart-error-detail', detail));
  container.appendChild(box);
}

export function renderChartLoading(container: HTMLElement): void {
  clear(container);
  container.appendChild(el('p', 'chart-loading', 'Loading'));
}

export function renderHistogram(container: HTMLElement, doc: Histogram): void {
  clear(container);
  const title = el('h3', 'chart-title');
  title.textContent = `Index distribution, ${doc.year.s}`;
  container.appendChild(title);

  const W = 480;
  const H = 200;
  const baseline = H - 24;
  const svg = svgEl('svg', {
    class: 'histogram',
    viewBox: `0 0 ${W} ${H}`,
    role: 'img',
  });
  const maxCount = Math.max(...doc.counts.map((c) => c.v), 1);
  const slot = W / doc.counts.length;
  doc.counts.forEach((count, i) => {
    const h = (count.v / maxCount) * (baseline - 28);
    const x = i * slot + 6;
    svg.appendChild(
      svgEl('rect', {
        class: 'bar',
        x: x.toFixed(2),
        y: (baseline - h).toFixed(2),
        width: (slot - 12).toFixed(2),
        height: h.toFixed(2),
        fill: doc.colors[i],
      }),
    );
    const label = svgEl('text', {
      class: 'bar-count',
      x: (x + (slot - 12) / 2).toFixed(2),
      y: (baseline - h - 6).toFixed(2),
      'text-anchor': 'middle',
    });
    label.textContent = count.s;
    svg.appendChild(label);
  });
  const lo = svgEl('text', { class: 'axis-label', x: '6', y: String(H - 6) });
  lo.textContent = doc.edges[0].s;
  const hi = svgEl('text', {
    class: 'axis-label',
    x: String(W - 6),
    y: String(H - 6),
    'text-anchor': 'end',
  });
  hi.textContent = doc.edges[doc.edges.length - 1].s;
  svg.appendChild(lo);
  svg.appendChild(hi);
  container.appendChild(svg);
}

export type ImportanceModel = 'forest' | 'boosted';

export function renderImportance(
  container: HTMLElement,
  doc: Importance,
  model: ImportanceModel = 'forest',
): void {
  clear(container);
  container.appendChild(el('h3', 'chart-title', 'Feature importance'));

  const toggle = el('div', 'model-toggle');
  for (const name of ['forest', 'boosted'] as ImportanceModel[]) {
    const button = el('button', name === model ? 'toggle active' : 'toggle', name);
    button.setAttribute('data-model', name);
    button.setAttribute('aria-pressed', String(name === model));
    button.addEventListener('click', () => renderImportance(container, doc, name));
    toggle.appendChild(button);
  }
  container.appendChild(toggle);

  const ranking = model === 'forest' ? doc.forest_ranking : doc.boosted_ranking;
  const scores = model === 'forest' ? doc.forest : doc.boosted;
  const byId = new Map<string, Num>();
  doc.features.forEach((id, i) => byId.set(id, scores[i]));
  const top = byId.size ? Math.max(...scores.map((s) => s.v), 0) || 1 : 1;

  const list = el('ol', 'importance-list');
  for (const id of ranking) {
    const score = byId.get(id);
    if (!score) continue;
    const row = el('li', 'importance-row');
    row.setAttribute('data-feature', id);
    row.appendChild(el('span', 'importance-label', id));
    const bar = el('span', 'importance-bar');
    bar.style.width = `${((score.v / top) * 100).toFixed(1)}%`;
    row.appendChild(bar);
    row.appendChild(el('span', 'importance-value', score.s));
    list.appendChild(row);
  }
  container.appendChild(list);

  const note = el('p', 'chart-note');
  note.textContent = `rank agreement between models: ${doc.rank_correlation.s}`;
  container.appendChild(note);
}

export function renderShap(container: HTMLElement, doc: ShapGlobal): void {
  clear(container);
  container.appendChild(el('h3', 'chart-title', 'Attribution spread per feature'));
  const base = el('p', 'chart-note');
  base.textContent = `base value ${doc.base_value.s}`;
  container.appendChild(base);

  let lo = Infinity;
  let hi = -Infinity;
  for (const feature of doc.features) {
    for (const value of feature.shap) {
      if (value.v < lo) lo = value.v;
      if (value.v > hi) hi = value.v;
    }
  }
  const span = hi - lo || 1;

  const W = 340;
  const H = 26;
  const list = el('ul', 'shap-list');
  for (const feature of doc.features) {
    const row = el('li', 'shap-row');
    row.setAttribute('data-feature', feature.id);
    row.appendChild(el('span', 'shap-label', feature.id));
    const strip = svgEl('svg', {
      class: 'shap-strip',
      viewBox: `0 0 ${W} ${H}`,
    });
    feature.shap.forEach((value, i) => {
      strip.appendChild(
        svgEl('circle', {
          class: 'shap-dot',
          cx: (((value.v - lo) / span) * (W - 8) + 4).toFixed(2),
          // deterministic vertical jitter; no meaning, just de-overlap
          cy: String(5 + ((i * 37) % 17)),
          r: '2',
        }),
      );
    });
    row.appendChild(strip);
    row.appendChild(el('span', 'shap-mean', feature.mean_abs.s));
    list.appendChild(row);
  }
  container.appendChild(list);
}

export function renderRadar(container: HTMLElement, doc: Clusters): void {
  clear(container);
  container.appendChild(el('h3', 'chart-title', 'Sector profiles'));
  const size = 300;
  const cx = size / 2;
  const cy = size / 2;
  const R = 104;
  const svg = svgEl('svg', { class: 'radar', viewBox: `0 0 ${size} ${size}` });
  const axes = doc.radar.axes;
  const angle = (i: number) => -Math.PI / 2 + (2 * Math.PI * i) / axes.length;

  axes.forEach((axis, i) => {
    const a = angle(i);
    const x = cx + Math.cos(a) * R;
    const y = cy + Math.sin(a) * R;
    svg.appendChild(
      svgEl('line', {
        class: 'radar-axis',
        x1: String(cx),
        y1: String(cy),
        x2: x.toFixed(2),
        y2: y.toFixed(2),
      }),
    );
    const label = svgEl('text', {
      class: 'radar-axis-label',
      x: (cx + Math.cos(a) * (R + 12)).toFixed(2),
      y: (cy + Math.sin(a) * (R + 12)).toFixed(2),
      'text-anchor': 'middle',
    });
    label.textContent = axis;
    svg.appendChild(label);
  });

  for (const sector of doc.radar.sectors) {
    const points = sector.centroid
      .map((value, i) => {
        const a = angle(i);
        const r = Math.min(Math.max(value.v, 0), 1) * R;
        return `${(cx + Math.cos(a) * r).toFixed(2)},${(cy + Math.sin(a) * r).toFixed(2)}`;
      })
      .join(' ');
    const shape = svgEl('polygon', {
      class: 'radar-shape',
      points,
      'fill-opacity': '0.15',
      'data-sector': sector.sector,
    });
    const color = doc.colors[sector.sector];
    if (color) {
      shape.setAttribute('stroke', color);
      shape.setAttribute('fill', color);
    }
    svg.appendChild(shape);
  }
  container.appendChild(svg);

  const legend = el('ul', 'radar-legend');
  for (const sector of doc.radar.sectors) {
    const row = el('li', 'radar-legend-row');
    const swatch = el('span', 'legend-swatch');
    const color = doc.colors[sector.sector];
    if (color) swatch.style.background = color;
    row.appendChild(swatch);
    row.appendChild(el('span', 'legend-label', sector.sector));
    row.appendChild(el('span', 'radar-dispersion', `dispersion ${sector.dispersion.s}`));
    legend.appendChild(row);
  }
  container.appendChild(legend);
}

export function renderLvi(
  container: HTMLElement,
  doc: Lvi,
  colors: { [sector: string]: string },
): void {
  clear(container);
  container.appendChild(el('h3', 'chart-title', 'Sector vitality over time'));

  const W = 560;
  const H = 240;
  const left = 50;
  const right = 120;
  const top = 14;
  const bottom = 30;

  // ordinal x positions over the distinct years, forecast year included
  const yearTokens: Num[] = [];
  for (const sector of doc.sectors) {
    for (const [year] of sector.points) {
      if (!yearTokens.some((t) => t.v === year.v)) yearTokens.push(year);
    }
  }
  yearTokens.sort((a, b) => a.v - b.v);
  const xFor = (year: number) => {
    const i = yearTokens.findIndex((t) => t.v === year);
    return left + (i * (W - left - right)) / Math.max(yearTokens.length - 1, 1);
  };

  let loPt: Num | null = null;
  let hiPt: Num | null = null;
  for (const sector of doc.sectors) {
    for (const [, value] of sector.points) {
      if (!loPt || value.v < loPt.v) loPt = value;
      if (!hiPt || value.v > hiPt.v) hiPt = value;
    }
  }
  const lo = loPt ? loPt.v : 0;
  const hi = hiPt ? hiPt.v : 1;
  const span = hi - lo || 1;
  const yFor = (value: number) =>
    top + (1 - (value - lo) / span) * (H - top - bottom);

  const svg = svgEl('svg', { class: 'lvi', viewBox: `0 0 ${W} ${H}` });

  for (const token of yearTokens) {
    const tick = svgEl('text', {
      class: 'axis-label',
      x: xFor(token.v).toFixed(2),
      y: String(H - 8),
      'text-anchor': 'middle',
    });
    tick.textContent = token.s;
    svg.appendChild(tick);
  }
  // axis extremes labeled with the served values they belong to
  if (hiPt) {
    const label = svgEl('text', { class: 'axis-label', x: '4', y: (yFor(hiPt.v) + 4).toFixed(2) });
    label.textContent = hiPt.s;
    svg.appendChild(label);
  }
  if (loPt && (!hiPt || loPt.v !== hiPt.v)) {
    const label = svgEl('text', { class: 'axis-label', x: '4', y: (yFor(loPt.v) + 4).toFixed(2) });
    label.textContent = loPt.s;
    svg.appendChild(label);
  }

  for (const sector of doc.sectors) {
    const color = colors[sector.sector] ?? 'currentColor';
    const group = svgEl('g', { class: 'lvi-sector', 'data-sector': sector.sector });
    const line = (pairs: Num[][]) =>
      pairs.map(([year, value]) => `${xFor(year.v).toFixed(2)},${yFor(value.v).toFixed(2)}`).join(' ');
    group.appendChild(
      svgEl('polyline', {
        class: 'lvi-line',
        points: line(sector.solid),
        fill: 'none',
        stroke: color,
      }),
    );
    group.appendChild(
      svgEl('polyline', {
        class: 'lvi-line forecast',
        points: line(sector.dotted),
        fill: 'none',
        stroke: color,
        'stroke-dasharray': '6 4',
      }),
    );
    for (const [year, value, kind] of sector.points) {
      group.appendChild(
        svgEl('circle', {
          class: `pt pt-${kind}`,
          cx: xFor(year.v).toFixed(2),
          cy: yFor(value.v).toFixed(2),
          r: '3',
          fill: color,
          'data-year': year.s,
        }),
      );
    }
    const last = sector.points[sector.points.length - 1];
    if (last) {
      const label = svgEl('text', {
        class: 'lvi-sector-label',
        x: (xFor(last[0].v) + 8).toFixed(2),
        y: (yFor(last[1].v) + 4).toFixed(2),
        fill: color,
      });
      label.textContent = sector.sector;
      group.appendChild(label);
    }
    svg.appendChild(group);
  }
  container.appendChild(svg);

  const captions = el('ul', 'lvi-captions');
  for (const sector of doc.sectors) {
    const chosen = sector.forecast[sector.selected_model];
    const row = el('li', 'lvi-caption');
    let text = `${sector.sector}: ${sector.selected_model} forecast for ` +
      `${sector.target_year.s} is ${chosen.prediction.s} (mse ${chosen.mse.s})`;
    if (chosen.clamped) text += ', clamped';
    row.textContent = text;
    captions.appendChild(row);
  }
  container.appendChild(captions);
}
