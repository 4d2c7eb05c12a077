/**
 * Explorer view state.
 *
 * The visible range is always clamped inside the corpus range, and the
 * smoothing option only affects drawn curves: the numbers rendered in
 * tables come verbatim from API payloads and are never recomputed
 * client-side.
 */

export interface DisplayOptions {
  showNcrCurve: boolean;
  showDeviationCurve: boolean;
  /** moving-average window for the drawn curves; 0 = off (default) */
  smoothingWindow: number;
}

export interface ViewState {
  corpusRange: [number, number] | null;
  visibleRange: [number, number] | null;
  selectedYear: number | null;
  selectedClusterIds: string[];
  markerClusterIds: string[];
  coModeEnabled: boolean;
  display: DisplayOptions;
  /** staleness counter of the last successful fetch */
  counter: number;
}

export function initialViewState(): ViewState {
  return {
    corpusRange: null,
    visibleRange: null,
    selectedYear: null,
    selectedClusterIds: [],
    markerClusterIds: [],
    coModeEnabled: false,
    display: { showNcrCurve: true, showDeviationCurve: true, smoothingWindow: 0 },
    counter: 0,
  };
}

/** Clamp a requested range inside the corpus range (invariant: visible ⊆ corpus). */
export function clampRange(
  requested: [number, number],
  corpus: [number, number] | null,
): [number, number] {
  let [lo, hi] = requested;
  if (lo > hi) [lo, hi] = [hi, lo];
  if (!corpus) return [lo, hi];
  lo = Math.max(lo, corpus[0]);
  hi = Math.min(hi, corpus[1]);
  if (lo > hi) return [corpus[0], corpus[1]];
  return [lo, hi];
}

export function withVisibleRange(state: ViewState, requested: [number, number]): ViewState {
  return { ...state, visibleRange: clampRange(requested, state.corpusRange) };
}

export function toggleClusterSelection(state: ViewState, clusterId: string): ViewState {
  const selected = state.selectedClusterIds.includes(clusterId)
    ? state.selectedClusterIds.filter((id) => id !== clusterId)
    : [...state.selectedClusterIds, clusterId];
  return { ...state, selectedClusterIds: selected };
}
