/**
 * Spectrogram rendering: cited-reference counts (red) and the
 * deviation from the five-year median (blue) over reference
 * publication years, with a zero line and optional peak markers.
 *
 * Rendering is a pure function of (points, state) returning an SVG
 * string plus the scale used, so brush geometry and tests need no DOM.
 */

import { PeakEntry, SpectrumPoint } from "./api.js";
import { movingAverage } from "./smoothing.js";
import { ViewState } from "./state.js";

export interface ChartGeometry {
  width: number;
  height: number;
  marginLeft: number;
  marginRight: number;
  marginTop: number;
  marginBottom: number;
}

export const DEFAULT_GEOMETRY: ChartGeometry = {
  width: 880,
  height: 360,
  marginLeft: 52,
  marginRight: 16,
  marginTop: 12,
  marginBottom: 32,
};

export interface LinearScale {
  domain: [number, number];
  range: [number, number];
  apply(value: number): number;
  invert(pixel: number): number;
}

export function linearScale(domain: [number, number], range: [number, number]): LinearScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return {
    domain,
    range,
    apply: (value) => r0 + ((value - d0) / span) * (r1 - r0),
    invert: (pixel) => d0 + ((pixel - r0) / (r1 - r0 || 1)) * span,
  };
}

export interface RenderedChart {
  svg: string;
  xScale: LinearScale;
  yScale: LinearScale;
  /** curve values actually drawn (after display smoothing, if any) */
  drawnNcr: number[];
  drawnDev: number[];
}

function polyline(xs: number[], ys: number[], color: string, label: string): string {
  const points = xs.map((x, i) => `${x.toFixed(2)},${ys[i].toFixed(2)}`).join(" ");
  return `<polyline fill="none" stroke="${color}" stroke-width="1.5" data-series="${label}" points="${points}"/>`;
}

export function renderSpectrogram(
  points: SpectrumPoint[],
  state: ViewState,
  peaks: PeakEntry[] = [],
  geometry: ChartGeometry = DEFAULT_GEOMETRY,
): RenderedChart {
  const { width, height, marginLeft, marginRight, marginTop, marginBottom } = geometry;
  const innerRight = width - marginRight;
  const innerBottom = height - marginBottom;

  if (points.length === 0) {
    const svg =
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" data-chart="spectrogram">` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle" data-role="empty-state">` +
      `no cited references in the visible range</text></svg>`;
    const unit = linearScale([0, 1], [marginLeft, innerRight]);
    return { svg, xScale: unit, yScale: unit, drawnNcr: [], drawnDev: [] };
  }

  const years = points.map((p) => p.rpy);
  const ncrRaw = points.map((p) => p.ncr);
  const devRaw = points.map((p) => p.dev);
  const window = state.display.smoothingWindow;
  const drawnNcr = movingAverage(ncrRaw, window);
  const drawnDev = movingAverage(devRaw, window);

  const xScale = linearScale([years[0], years[years.length - 1]], [marginLeft, innerRight]);
  const lowest = Math.min(0, ...drawnDev, ...devRaw);
  const highest = Math.max(1, ...drawnNcr, ...ncrRaw);
  const yScale = linearScale([lowest, highest], [innerBottom, marginTop]);

  const xs = years.map((y) => xScale.apply(y));
  const zeroY = yScale.apply(0);

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" data-chart="spectrogram">`,
    `<line x1="${marginLeft}" y1="${zeroY.toFixed(2)}" x2="${innerRight}" y2="${zeroY.toFixed(2)}" ` +
      `stroke="#777" stroke-width="1" data-role="zero-line"/>`,
  ];
  if (state.display.showNcrCurve) {
    parts.push(polyline(xs, drawnNcr.map((v) => yScale.apply(v)), "#cc2222", "ncr"));
  }
  if (state.display.showDeviationCurve) {
    parts.push(polyline(xs, drawnDev.map((v) => yScale.apply(v)), "#2244cc", "deviation"));
  }
  for (const peak of peaks) {
    if (peak.rpy < years[0] || peak.rpy > years[years.length - 1]) continue;
    const cx = xScale.apply(peak.rpy).toFixed(2);
    const cy = yScale.apply(peak.dev).toFixed(2);
    parts.push(
      `<circle cx="${cx}" cy="${cy}" r="3.5" fill="#2244cc" data-role="peak" data-rpy="${peak.rpy}"/>`,
    );
  }
  parts.push("</svg>");
  return { svg: parts.join(""), xScale, yScale, drawnNcr, drawnDev };
}

/**
 * Convert a horizontal brush selection (pixels) into the year range to
 * fetch next.  Years are rounded outward so the brushed pixels are
 * fully covered.
 */
export function brushToYearRange(
  chart: RenderedChart,
  pixelStart: number,
  pixelEnd: number,
): [number, number] {
  const [lo, hi] = pixelStart <= pixelEnd ? [pixelStart, pixelEnd] : [pixelEnd, pixelStart];
  return [Math.floor(chart.xScale.invert(lo)), Math.ceil(chart.xScale.invert(hi))];
}
