/**
 * Display-only centered moving average.  Applied to drawn curve
 * geometry; never to table values or exports.
 */
export function movingAverage(values: number[], window: number): number[] {
  if (window <= 1 || values.length === 0) {
    return values.slice();
  }
  const half = Math.floor((window % 2 === 0 ? window + 1 : window) / 2);
  const out: number[] = [];
  for (let i = 0; i < values.length; i++) {
    const lo = Math.max(0, i - half);
    const hi = Math.min(values.length, i + half + 1);
    let sum = 0;
    for (let j = lo; j < hi; j++) sum += values[j];
    out.push(sum / (hi - lo));
  }
  return out;
}
