/* View state and its URL form.
 *
 * The whole view lives in the fragment (#da=...&layer=...&tab=...&year=...)
 * so any screen can be shared as a link and a reload lands back on it.
 */

export type Layer = 'cvi' | 'clusters';
export type Tab = 'histogram' | 'importance' | 'shap' | 'radar' | 'lvi';

export const LAYERS: Layer[] = ['cvi', 'clusters'];
export const TABS: Tab[] = ['histogram', 'importance', 'shap', 'radar', 'lvi'];

export interface MapViewState {
  selectedDa: string | null;
  layer: Layer;
  panelYear: number | null;
  tab: Tab;
}

export function defaultState(): MapViewState {
  return { selectedDa: null, layer: 'cvi', panelYear: null, tab: 'histogram' };
}

export function encodeState(state: MapViewState): string {
  const params = new URLSearchParams();
  if (state.selectedDa !== null) params.set('da', state.selectedDa);
  params.set('layer', state.layer);
  params.set('tab', state.tab);
  if (state.panelYear !== null) params.set('year', String(state.panelYear));
  return params.toString();
}

export function decodeState(hash: string): MapViewState {
  const state = defaultState();
  const params = new URLSearchParams(hash.replace(/^#/, ''));
  const da = params.get('da');
  if (da) state.selectedDa = da;
  const layer = params.get('layer');
  if (layer && (LAYERS as string[]).includes(layer)) state.layer = layer as Layer;
  const tab = params.get('tab');
  if (tab && (TABS as string[]).includes(tab)) state.tab = tab as Tab;
  const year = params.get('year');
  if (year && /^\d{4}$/.test(year)) state.panelYear = Number(year);
  return state;
}
