/* SVG choropleth over the served FeatureCollection.
 *
 * No basemap: polygons are projected straight onto the viewport with a
 * fit-to-bounds linear projection.  Fills always come from the server
 * (per-feature fill for the index layer, the sector color table for the
 * cluster layer); this module never derives a color from a value.
 */

import { clear, el, svgEl } from './dom.js';
import { Clusters, Collection, DaFeature, Histogram } from './payload.js';
import { Layer } from './state.js';

export const VIEW_W = 640;
export const VIEW_H = 460;
const PAD = 12;

export interface MapHandlers {
  onSelect(id: string | null): void;
  onHover(id: string | null): void;
}

export type Project = (lon: number, lat: number) => [number, number];

export function fitToBounds(collection: Collection): Project {
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const feature of collection.features) {
    for (const ring of feature.geometry.coordinates) {
      for (const [lon, lat] of ring) {
        if (lon.v < minX) minX = lon.v;
        if (lon.v > maxX) maxX = lon.v;
        if (lat.v < minY) minY = lat.v;
        if (lat.v > maxY) maxY = lat.v;
      }
    }
  }
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const scale = Math.min((VIEW_W - 2 * PAD) / spanX, (VIEW_H - 2 * PAD) / spanY);
  const offX = (VIEW_W - spanX * scale) / 2;
  const offY = (VIEW_H - spanY * scale) / 2;
  return (lon, lat) => [
    offX + (lon - minX) * scale,
    // screen y grows downward
    offY + (maxY - lat) * scale,
  ];
}

function pathData(feature: DaFeature, project: Project): string {
  const parts: string[] = [];
  for (const ring of feature.geometry.coordinates) {
    ring.forEach(([lon, lat], i) => {
      const [x, y] = project(lon.v, lat.v);
      parts.push(`${i === 0 ? 'M' : 'L'}${x.toFixed(2)} ${y.toFixed(2)}`);
    });
    parts.push('Z');
  }
  return parts.join('');
}

export function featureFill(
  feature: DaFeature,
  layer: Layer,
  clusters: Clusters | null,
): string {
  if (layer === 'clusters' && clusters) {
    const sector = clusters.assignments[feature.properties.DAUID];
    const color = sector === undefined ? undefined : clusters.colors[sector];
    if (color) return color;
  }
  return feature.properties.fill;
}

export function renderMap(
  svg: SVGSVGElement,
  collection: Collection,
  clusters: Clusters | null,
  layer: Layer,
  selected: string | null,
  handlers: MapHandlers,
): void {
  clear(svg);
  svg.setAttribute('viewBox', `0 0 ${VIEW_W} ${VIEW_H}`);
  const backdrop = svgEl('rect', {
    class: 'map-backdrop',
    x: '0',
    y: '0',
    width: String(VIEW_W),
    height: String(VIEW_H),
  });
  backdrop.addEventListener('click', () => handlers.onSelect(null));
  svg.appendChild(backdrop);

  const project = fitToBounds(collection);
  const group = svgEl('g', { class: 'da-layer' });
  for (const feature of collection.features) {
    const id = feature.properties.DAUID;
    const path = svgEl('path', {
      class: id === selected ? 'da selected' : 'da',
      d: pathData(feature, project),
      fill: featureFill(feature, layer, clusters),
      'data-da': id,
    });
    path.addEventListener('click', () => handlers.onSelect(id));
    path.addEventListener('mouseenter', () => handlers.onHover(id));
    path.addEventListener('mouseleave', () => handlers.onHover(null));
    group.appendChild(path);
  }
  svg.appendChild(group);
}

export function applySelection(svg: SVGSVGElement, selected: string | null): void {
  for (const path of Array.from(svg.querySelectorAll('path.da'))) {
    const id = path.getAttribute('data-da');
    path.setAttribute('class', id === selected ? 'da selected' : 'da');
  }
}

export function applyFills(
  svg: SVGSVGElement,
  collection: Collection,
  clusters: Clusters | null,
  layer: Layer,
): void {
  const byId = new Map(collection.features.map((f) => [f.properties.DAUID, f]));
  for (const path of Array.from(svg.querySelectorAll('path.da'))) {
    const feature = byId.get(path.getAttribute('data-da') ?? '');
    if (feature) path.setAttribute('fill', featureFill(feature, layer, clusters));
  }
}

export function renderTooltip(node: HTMLElement, feature: DaFeature | null): void {
  if (!feature) {
    node.classList.add('hidden');
    node.textContent = '';
    return;
  }
  node.classList.remove('hidden');
  node.textContent = `${feature.properties.DAUID} CVI ${feature.properties.cvi.s}`;
}

export function renderCviLegend(container: HTMLElement, histogram: Histogram): void {
  clear(container);
  container.appendChild(el('div', 'legend-title', 'Current vitality index'));
  const ramp = el('div', 'legend-ramp');
  for (const color of histogram.colors) {
    const swatch = el('span', 'legend-swatch');
    swatch.style.background = color;
    ramp.appendChild(swatch);
  }
  container.appendChild(ramp);
  const span = el('div', 'legend-span');
  span.appendChild(el('span', 'legend-lo', histogram.edges[0].s));
  span.appendChild(el('span', 'legend-hi', histogram.edges[histogram.edges.length - 1].s));
  container.appendChild(span);
}

export function renderClusterLegend(container: HTMLElement, clusters: Clusters): void {
  clear(container);
  container.appendChild(el('div', 'legend-title', 'Sectors'));
  for (const [sector, color] of Object.entries(clusters.colors)) {
    const row = el('div', 'legend-entry');
    const swatch = el('span', 'legend-swatch');
    swatch.style.background = color;
    row.appendChild(swatch);
    row.appendChild(el('span', 'legend-label', sector));
    container.appendChild(row);
  }
  const mean = el('div', 'legend-note');
  mean.textContent = `mean silhouette ${clusters.silhouette.mean.s}`;
  container.appendChild(mean);
}

export function renderLegendError(container: HTMLElement, detail: string): void {
  clear(container);
  container.appendChild(el('div', 'legend-error', detail));
}
