import { describe, expect, it } from "vitest";

import {
  clampRange,
  initialViewState,
  toggleClusterSelection,
  withVisibleRange,
} from "../src/state.js";

describe("clampRange", () => {
  it("keeps the visible range inside the corpus range", () => {
    expect(clampRange([1500, 2000], [1686, 1970])).toEqual([1686, 1970]);
    expect(clampRange([1800, 1850], [1686, 1970])).toEqual([1800, 1850]);
    expect(clampRange([1600, 1700], [1686, 1970])).toEqual([1686, 1700]);
  });

  it("normalizes inverted input", () => {
    expect(clampRange([1850, 1800], [1686, 1970])).toEqual([1800, 1850]);
  });

  it("falls back to the corpus range when disjoint", () => {
    expect(clampRange([1200, 1300], [1686, 1970])).toEqual([1686, 1970]);
  });

  it("passes through when the corpus range is unknown", () => {
    expect(clampRange([1800, 1850], null)).toEqual([1800, 1850]);
  });
});

describe("view state", () => {
  it("starts with smoothing off and both curves on", () => {
    const state = initialViewState();
    expect(state.display.smoothingWindow).toBe(0);
    expect(state.display.showNcrCurve).toBe(true);
    expect(state.display.showDeviationCurve).toBe(true);
    expect(state.coModeEnabled).toBe(false);
  });

  it("withVisibleRange applies the clamp invariant", () => {
    const state = { ...initialViewState(), corpusRange: [1686, 1970] as [number, number] };
    const next = withVisibleRange(state, [1000, 3000]);
    expect(next.visibleRange).toEqual([1686, 1970]);
  });

  it("toggleClusterSelection adds then removes", () => {
    let state = initialViewState();
    state = toggleClusterSelection(state, "c1");
    state = toggleClusterSelection(state, "c2");
    expect(state.selectedClusterIds).toEqual(["c1", "c2"]);
    state = toggleClusterSelection(state, "c1");
    expect(state.selectedClusterIds).toEqual(["c2"]);
  });
});
