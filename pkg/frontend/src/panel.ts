/* Detail panel for the selected dissemination area: the index value and
 * each indicator with its provenance, spelled exactly as served. */

import { clear, el } from './dom.js';
import { DaDoc } from './payload.js';

export function renderPanelEmpty(container: HTMLElement): void {
  clear(container);
  container.appendChild(
    el('p', 'panel-hint', 'Select a dissemination area to inspect its indicators.'),
  );
}

export function renderPanelLoading(container: HTMLElement, id: string): void {
  clear(container);
  container.appendChild(el('h2', 'panel-title', id));
  container.appendChild(el('p', 'panel-hint', 'Loading indicators'));
}

export function renderPanelError(container: HTMLElement, detail: string): void {
  clear(container);
  container.appendChild(el('p', 'panel-error', detail));
}

export function renderPanel(
  container: HTMLElement,
  doc: DaDoc,
  year: number | null,
): void {
  clear(container);
  const props = doc.feature.properties;
  container.appendChild(el('h2', 'panel-title', props.DAUID));
  const caption = year === null ? 'indicators' : `indicators (${String(year)})`;
  container.appendChild(el('p', 'panel-caption', caption));

  const cviRow = el('div', 'panel-cvi');
  cviRow.appendChild(el('span', 'panel-label', 'Current vitality index'));
  cviRow.appendChild(el('span', 'panel-value', props.cvi.s));
  container.appendChild(cviRow);

  const list = el('ul', 'indicator-list');
  for (const [id, value] of Object.entries(props.indicators)) {
    const row = el('li', 'indicator-row');
    row.appendChild(el('span', 'indicator-label', doc.labels[id] ?? id));
    row.appendChild(el('span', 'indicator-value', value.s));
    row.appendChild(el('span', `badge badge-${props.provenance[id]}`, props.provenance[id]));
    list.appendChild(row);
  }
  container.appendChild(list);
}
