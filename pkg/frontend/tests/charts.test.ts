import { describe, expect, it } from 'vitest';

import {
  renderChartError,
  renderHistogram,
  renderImportance,
  renderLvi,
  renderRadar,
  renderShap,
} from '../src/charts.js';
import {
  Clusters,
  Histogram,
  Importance,
  Lvi,
  parseRaw,
  ShapGlobal,
} from '../src/payload.js';

import { fixture } from './helpers.js';

const histogram = parseRaw(fixture('histogram.json')) as unknown as Histogram;
const importance = parseRaw(fixture('importance.json')) as unknown as Importance;
const shap = parseRaw(fixture('shap_global.json')) as unknown as ShapGlobal;
const clusters = parseRaw(fixture('clusters.json')) as unknown as Clusters;
const lvi = parseRaw(fixture('lvi.json')) as unknown as Lvi;

function mount(): HTMLElement {
  document.body.innerHTML = '';
  const node = document.createElement('section');
  document.body.appendChild(node);
  return node;
}

describe('renderHistogram', () => {
  it('draws one bar per bin with the served counts as labels', () => {
    const node = mount();
    renderHistogram(node, histogram);
    const bars = node.querySelectorAll('rect.bar');
    expect(bars).toHaveLength(histogram.counts.length);
    expect(bars).toHaveLength(8);
    const labels = Array.from(node.querySelectorAll('.bar-count')).map(
      (n) => n.textContent,
    );
    expect(labels).toEqual(histogram.counts.map((c) => c.s));
  });

  it('colors bars from the payload and labels the axis with served edges', () => {
    const node = mount();
    renderHistogram(node, histogram);
    const bars = Array.from(node.querySelectorAll('rect.bar'));
    bars.forEach((bar, i) => {
      expect(bar.getAttribute('fill')).toBe(histogram.colors[i]);
    });
    const axis = Array.from(node.querySelectorAll('.axis-label')).map(
      (n) => n.textContent,
    );
    expect(axis).toContain(histogram.edges[0].s);
    expect(axis).toContain(histogram.edges[histogram.edges.length - 1].s);
    expect(node.textContent).toContain(histogram.year.s);
  });
});

describe('renderImportance', () => {
  it('orders rows by the forest ranking by default', () => {
    const node = mount();
    renderImportance(node, importance);
    const order = Array.from(node.querySelectorAll('.importance-row')).map(
      (row) => row.getAttribute('data-feature'),
    );
    expect(order).toEqual(importance.forest_ranking);
  });

  it('re-sorts to the boosted ranking when the model toggle is clicked', () => {
    const node = mount();
    renderImportance(node, importance);
    const button = node.querySelector('button[data-model="boosted"]');
    expect(button).not.toBeNull();
    (button as HTMLButtonElement).click();
    const order = Array.from(node.querySelectorAll('.importance-row')).map(
      (row) => row.getAttribute('data-feature'),
    );
    expect(order).toEqual(importance.boosted_ranking);
    expect(order).not.toEqual(importance.forest_ranking);
    const active = node.querySelector('button.active');
    expect(active?.getAttribute('data-model')).toBe('boosted');
  });

  it('shows served scores and the rank agreement verbatim', () => {
    const node = mount();
    renderImportance(node, importance);
    const shown = Array.from(node.querySelectorAll('.importance-value')).map(
      (n) => n.textContent ?? '',
    );
    const served = new Set(importance.forest.map((s) => s.s));
    for (const token of shown) expect(served.has(token)).toBe(true);
    expect(node.querySelector('.chart-note')?.textContent).toBe(
      `rank agreement between models: ${importance.rank_correlation.s}`,
    );
  });
});

describe('renderShap', () => {
  it('renders exactly the served features, in their served order', () => {
    const node = mount();
    renderShap(node, shap);
    const rows = Array.from(node.querySelectorAll('.shap-row'));
    expect(rows.map((r) => r.getAttribute('data-feature'))).toEqual(
      shap.features.map((f) => f.id),
    );
  });

  it('draws one dot per attribution value', () => {
    const node = mount();
    renderShap(node, shap);
    const rows = Array.from(node.querySelectorAll('.shap-row'));
    rows.forEach((row, i) => {
      expect(row.querySelectorAll('circle.shap-dot')).toHaveLength(
        shap.features[i].shap.length,
      );
    });
  });

  it('labels rows with the served mean attribution tokens', () => {
    const node = mount();
    renderShap(node, shap);
    const means = Array.from(node.querySelectorAll('.shap-mean')).map(
      (n) => n.textContent,
    );
    expect(means).toEqual(shap.features.map((f) => f.mean_abs.s));
    expect(node.textContent).toContain(shap.base_value.s);
  });
});

describe('renderRadar', () => {
  it('draws one polygon per sector in its sector color', () => {
    const node = mount();
    renderRadar(node, clusters);
    const shapes = Array.from(node.querySelectorAll('polygon.radar-shape'));
    expect(shapes).toHaveLength(clusters.radar.sectors.length);
    for (const shape of shapes) {
      const sector = shape.getAttribute('data-sector') ?? '';
      expect(shape.getAttribute('stroke')).toBe(clusters.colors[sector]);
    }
  });

  it('labels every axis and reports dispersion verbatim', () => {
    const node = mount();
    renderRadar(node, clusters);
    const axisLabels = Array.from(node.querySelectorAll('.radar-axis-label')).map(
      (n) => n.textContent,
    );
    expect(axisLabels).toEqual(clusters.radar.axes);
    const dispersions = Array.from(node.querySelectorAll('.radar-dispersion')).map(
      (n) => n.textContent,
    );
    expect(dispersions).toEqual(
      clusters.radar.sectors.map((s) => `dispersion ${s.dispersion.s}`),
    );
  });
});

describe('renderLvi', () => {
  it('draws each sector as a line of five points', () => {
    const node = mount();
    renderLvi(node, lvi, clusters.colors);
    const groups = Array.from(node.querySelectorAll('g.lvi-sector'));
    expect(groups).toHaveLength(lvi.sectors.length);
    expect(groups).toHaveLength(3);
    for (const group of groups) {
      expect(group.querySelectorAll('circle.pt')).toHaveLength(5);
    }
  });

  it('dashes only the forecast segment', () => {
    const node = mount();
    renderLvi(node, lvi, clusters.colors);
    for (const group of Array.from(node.querySelectorAll('g.lvi-sector'))) {
      const solid = group.querySelector('polyline.lvi-line:not(.forecast)');
      const forecast = group.querySelector('polyline.forecast');
      expect(solid?.getAttribute('stroke-dasharray')).toBeNull();
      expect(forecast?.getAttribute('stroke-dasharray')).toBe('6 4');
      // the dashed segment spans exactly the last observation and the forecast
      expect((forecast?.getAttribute('points') ?? '').split(' ')).toHaveLength(2);
    }
  });

  it('strokes each sector line with its sector color', () => {
    const node = mount();
    renderLvi(node, lvi, clusters.colors);
    for (const sector of lvi.sectors) {
      const group = node.querySelector(`g[data-sector="${sector.sector}"]`);
      const line = group?.querySelector('polyline.lvi-line');
      expect(line?.getAttribute('stroke')).toBe(clusters.colors[sector.sector]);
    }
  });

  it('captions every sector with the selected model and its error, verbatim', () => {
    const node = mount();
    renderLvi(node, lvi, clusters.colors);
    const captions = Array.from(node.querySelectorAll('.lvi-caption')).map(
      (n) => n.textContent ?? '',
    );
    expect(captions).toHaveLength(lvi.sectors.length);
    lvi.sectors.forEach((sector, i) => {
      const chosen = sector.forecast[sector.selected_model];
      expect(captions[i]).toContain(sector.sector);
      expect(captions[i]).toContain(sector.selected_model);
      expect(captions[i]).toContain(chosen.prediction.s);
      expect(captions[i]).toContain(chosen.mse.s);
    });
  });

  it('ticks the x axis with the served year tokens', () => {
    const node = mount();
    renderLvi(node, lvi, clusters.colors);
    const ticks = Array.from(node.querySelectorAll('.axis-label')).map(
      (n) => n.textContent,
    );
    for (const sector of lvi.sectors) {
      expect(ticks).toContain(sector.target_year.s);
    }
  });
});

describe('renderChartError', () => {
  it('names the endpoint that failed', () => {
    const node = mount();
    renderChartError(node, '/api/lvi', '/api/lvi answered 500');
    expect(node.querySelector('.chart-error-title')?.textContent).toBe(
      'chart unavailable (/api/lvi)',
    );
    expect(node.querySelector('.chart-error-detail')?.textContent).toBe(
      '/api/lvi answered 500',
    );
  });
});
