"""Spectrogram rendering to image files.

Figures show the per-year cited-reference counts (red) and the
deviation from the five-year median (blue) with a zero line.  Optional
moving-average smoothing affects the drawn curves only; exported CSV
numbers are never smoothed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .spectrum import PeakReport, Spectrum


def smooth_series(values: list[float], window: int) -> list[float]:
    """Centered moving average; window is clamped to odd >= 1."""
    if window <= 1 or not values:
        return list(values)
    if window % 2 == 0:
        window += 1
    half = window // 2
    out = []
    for i in range(len(values)):
        lo = max(0, i - half)
        hi = min(len(values), i + half + 1)
        out.append(sum(values[lo:hi]) / (hi - lo))
    return out


def render_spectrum(
    spectrum: Spectrum,
    destination: str,
    peaks: list[PeakReport] | None = None,
    title: str | None = None,
    smooth_window: int = 0,
    dpi: int = 130,
) -> None:
    """Write the spectrogram for ``spectrum`` to ``destination`` (PNG/SVG/PDF by suffix)."""
    fig, ax = plt.subplots(figsize=(10, 4.5))
    if spectrum.points:
        years = [p.rpy for p in spectrum.points]
        ncr = [float(p.ncr_total) for p in spectrum.points]
        dev = [float(p.deviation) for p in spectrum.points]
        if smooth_window > 1:
            ncr = smooth_series(ncr, smooth_window)
            dev = smooth_series(dev, smooth_window)
        ax.plot(years, ncr, color="#cc2222", linewidth=1.2, label="cited references")
        ax.plot(years, dev, color="#2244cc", linewidth=1.2, label="deviation from 5-year median")
        if peaks:
            peak_years = [p.rpy for p in peaks]
            peak_devs = [float(p.deviation) for p in peaks]
            ax.scatter(peak_years, peak_devs, color="#2244cc", marker="o", s=18, zorder=3,
                       label="peaks")
        ax.set_xlim(min(years), max(years))
        ax.legend(loc="upper left", fontsize=8)
    else:
        ax.text(0.5, 0.5, "empty spectrum", ha="center", va="center", transform=ax.transAxes)
    ax.axhline(0.0, color="#666666", linewidth=0.8)
    ax.set_xlabel("reference publication year")
    ax.set_ylabel("cited references")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(destination, dpi=dpi)
    plt.close(fig)
