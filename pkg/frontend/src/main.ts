/* Application shell: builds the layout, owns the view state, and keeps
 * the map, panel, and chart regions in sync with it.
 *
 * Fetches per region are guarded by sequence tokens: each kickoff bumps
 * the region's counter and a response is dropped unless its token is
 * still current, so rapid tab or selection switches cannot paint stale
 * data over fresh data.
 */

import { Api, ApiError } from './api.js';
import {
  renderChartError,
  renderChartLoading,
  renderHistogram,
  renderImportance,
  renderLvi,
  renderRadar,
  renderShap,
} from './charts.js';
import { clear, el, svgEl } from './dom.js';
import {
  applyFills,
  applySelection,
  renderClusterLegend,
  renderCviLegend,
  renderLegendError,
  renderMap,
  renderTooltip,
} from './map.js';
import {
  renderPanel,
  renderPanelEmpty,
  renderPanelError,
  renderPanelLoading,
} from './panel.js';
import { Clusters, Collection, Histogram } from './payload.js';
import { decodeState, encodeState, Layer, MapViewState, Tab, TABS } from './state.js';

const TAB_LABELS: { [tab in Tab]: string } = {
  histogram: 'Distribution',
  importance: 'Importance',
  shap: 'Attributions',
  radar: 'Profiles',
  lvi: 'Trajectory',
};

const TAB_ENDPOINTS: { [tab in Tab]: string } = {
  histogram: '/api/cvi/histogram',
  importance: '/api/importance',
  shap: '/api/shap/global',
  radar: '/api/clusters',
  lvi: '/api/lvi',
};

export class App {
  state: MapViewState;

  private collection: Collection | null = null;
  private clusters: Clusters | null = null;
  private histogram: Histogram | null = null;

  private chartSeq = 0;
  private panelSeq = 0;
  private pending = new Set<Promise<unknown>>();

  private banner!: HTMLElement;
  private bannerText!: HTMLElement;
  private mapSvg!: SVGSVGElement;
  private tooltip!: HTMLElement;
  private legend!: HTMLElement;
  private panel!: HTMLElement;
  private chart!: HTMLElement;

  constructor(readonly root: HTMLElement, readonly api: Api) {
    this.state = decodeState(location.hash);
    this.buildLayout();
  }

  /* Resolves once every in-flight fetch kicked off so far has settled
   * and its rendering ran; tests use it as a turn boundary. */
  async idle(): Promise<void> {
    while (this.pending.size > 0) {
      await Promise.allSettled(Array.from(this.pending));
    }
  }

  private track<T>(work: Promise<T>): Promise<T> {
    this.pending.add(work);
    const drop = () => this.pending.delete(work);
    work.then(drop, drop);
    return work;
  }

  private buildLayout(): void {
    clear(this.root);

    this.banner = el('div', 'banner hidden');
    this.bannerText = el('span', 'banner-text');
    this.banner.appendChild(this.bannerText);
    const retry = el('button', 'banner-retry', 'Retry');
    retry.addEventListener('click', () => void this.load());
    this.banner.appendChild(retry);
    this.root.appendChild(this.banner);

    const toolbar = el('header', 'toolbar');
    toolbar.appendChild(el('h1', 'app-title', 'Urban vitality map'));

    const layers = el('div', 'layer-toggle');
    for (const layer of ['cvi', 'clusters'] as Layer[]) {
      const label = layer === 'cvi' ? 'Index' : 'Sectors';
      const button = el('button', 'toggle', label);
      button.setAttribute('data-layer', layer);
      button.addEventListener('click', () => this.setLayer(layer));
      layers.appendChild(button);
    }
    toolbar.appendChild(layers);

    const tabs = el('nav', 'tabs');
    for (const tab of TABS) {
      const button = el('button', 'toggle', TAB_LABELS[tab]);
      button.setAttribute('data-tab', tab);
      button.addEventListener('click', () => void this.showTab(tab));
      tabs.appendChild(button);
    }
    toolbar.appendChild(tabs);
    this.root.appendChild(toolbar);

    const content = el('main', 'content');
    const mapPane = el('section', 'map-pane');
    this.mapSvg = svgEl('svg', { class: 'map' }) as SVGSVGElement;
    mapPane.appendChild(this.mapSvg);
    this.tooltip = el('div', 'tooltip hidden');
    mapPane.appendChild(this.tooltip);
    this.legend = el('div', 'legend');
    mapPane.appendChild(this.legend);
    content.appendChild(mapPane);
    this.panel = el('aside', 'panel');
    content.appendChild(this.panel);
    this.root.appendChild(content);

    this.chart = el('section', 'chart');
    this.root.appendChild(this.chart);

    this.syncButtons();
  }

  private syncUrl(): void {
    const encoded = encodeState(this.state);
    history.replaceState(null, '', `${location.pathname}${location.search}#${encoded}`);
  }

  private syncButtons(): void {
    for (const button of Array.from(this.root.querySelectorAll('[data-layer]'))) {
      const active = button.getAttribute('data-layer') === this.state.layer;
      button.className = active ? 'toggle active' : 'toggle';
      button.setAttribute('aria-pressed', String(active));
    }
    for (const button of Array.from(this.root.querySelectorAll('[data-tab]'))) {
      const active = button.getAttribute('data-tab') === this.state.tab;
      button.className = active ? 'toggle active' : 'toggle';
      button.setAttribute('aria-pressed', String(active));
    }
  }

  private showBanner(detail: string): void {
    this.banner.classList.remove('hidden');
    this.bannerText.textContent = detail;
  }

  private hideBanner(): void {
    this.banner.classList.add('hidden');
    this.bannerText.textContent = '';
  }

  /* Boot (and retry): the FeatureCollection is the one payload the page
   * cannot stand without, so its failure raises the banner. */
  async load(): Promise<void> {
    this.hideBanner();
    const fetches = this.track(
      Promise.allSettled([
        this.api.collection(),
        this.api.histogram(),
        this.api.clusters(),
      ]),
    );
    const [collection, histogram, clusters] = await fetches;
    if (collection.status === 'rejected') {
      const reason = collection.reason as ApiError;
      this.showBanner(`The vitality service is unreachable: ${reason.message}`);
      return;
    }
    this.collection = collection.value;
    this.histogram = histogram.status === 'fulfilled' ? histogram.value : null;
    this.clusters = clusters.status === 'fulfilled' ? clusters.value : null;

    // a deep link may name a DA this snapshot does not have
    if (
      this.state.selectedDa !== null &&
      !this.collection.features.some((f) => f.properties.DAUID === this.state.selectedDa)
    ) {
      this.state.selectedDa = null;
    }
    if (this.state.panelYear === null && this.histogram) {
      this.state.panelYear = this.histogram.year.v;
    }
    this.syncUrl();
    this.syncButtons();

    renderMap(this.mapSvg, this.collection, this.clusters, this.state.layer, this.state.selectedDa, {
      onSelect: (id) => this.select(id),
      onHover: (id) => this.hover(id),
    });
    this.renderLegend();

    if (this.state.selectedDa === null) {
      renderPanelEmpty(this.panel);
    } else {
      this.loadPanel(this.state.selectedDa);
    }
    void this.showTab(this.state.tab);
  }

  private renderLegend(): void {
    if (this.state.layer === 'clusters') {
      if (this.clusters) renderClusterLegend(this.legend, this.clusters);
      else renderLegendError(this.legend, 'sector data unavailable');
    } else {
      if (this.histogram) renderCviLegend(this.legend, this.histogram);
      else renderLegendError(this.legend, 'histogram data unavailable');
    }
  }

  hover(id: string | null): void {
    const feature =
      id === null || this.collection === null
        ? null
        : this.collection.features.find((f) => f.properties.DAUID === id) ?? null;
    renderTooltip(this.tooltip, feature);
  }

  select(id: string | null): void {
    this.state.selectedDa = id;
    this.syncUrl();
    applySelection(this.mapSvg, id);
    if (id === null) {
      this.panelSeq++;
      renderPanelEmpty(this.panel);
    } else {
      this.loadPanel(id);
    }
  }

  private loadPanel(id: string): void {
    const token = ++this.panelSeq;
    renderPanelLoading(this.panel, id);
    void this.track(
      this.api.da(id).then(
        (doc) => {
          if (token !== this.panelSeq) return;
          renderPanel(this.panel, doc, this.state.panelYear);
        },
        (reason: ApiError) => {
          if (token !== this.panelSeq) return;
          renderPanelError(this.panel, reason.message);
        },
      ),
    );
  }

  setLayer(layer: Layer): void {
    this.state.layer = layer;
    this.syncUrl();
    this.syncButtons();
    if (this.collection) {
      applyFills(this.mapSvg, this.collection, this.clusters, layer);
    }
    this.renderLegend();
  }

  async showTab(tab: Tab): Promise<void> {
    this.state.tab = tab;
    this.syncUrl();
    this.syncButtons();
    const token = ++this.chartSeq;
    renderChartLoading(this.chart);
    const fresh = () => token === this.chartSeq;
    const endpoint = TAB_ENDPOINTS[tab];
    try {
      switch (tab) {
        case 'histogram': {
          const doc = await this.track(this.api.histogram());
          if (fresh()) renderHistogram(this.chart, doc);
          break;
        }
        case 'importance': {
          const doc = await this.track(this.api.importance());
          if (fresh()) renderImportance(this.chart, doc);
          break;
        }
        case 'shap': {
          const doc = await this.track(this.api.shapGlobal());
          if (fresh()) renderShap(this.chart, doc);
          break;
        }
        case 'radar': {
          const doc = await this.track(this.api.clusters());
          if (fresh()) renderRadar(this.chart, doc);
          break;
        }
        case 'lvi': {
          const doc = await this.track(this.api.lvi());
          if (fresh()) renderLvi(this.chart, doc, this.clusters ? this.clusters.colors : {});
          break;
        }
      }
    } catch (reason) {
      if (fresh()) {
        renderChartError(this.chart, endpoint, (reason as Error).message);
      }
    }
  }
}

export function createApp(root: HTMLElement, api: Api): App {
  return new App(root, api);
}

const autoRoot = document.getElementById('app');
if (autoRoot) {
  const app = createApp(autoRoot, new Api(''));
  void app.load();
}
