"""Population statistics, z-scores, histogram and Gaussian KDE of anomaly scores."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DegenerateDistributionError(ValueError):
    pass


@dataclass(frozen=True)
class ScoreStatistics:
    n: int
    mean: float
    variance: float
    std_dev: float
    min: float
    max: float

    def to_dict(self) -> dict:
        return {"n": self.n, "mean": self.mean, "variance": self.variance,
                "std_dev": self.std_dev, "min": self.min, "max": self.max}


@dataclass(frozen=True)
class HistogramSeries:
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]

    def centers(self) -> list[float]:
        e = self.bin_edges
        return [(e[i] + e[i + 1]) / 2 for i in range(len(self.counts))]


@dataclass(frozen=True)
class KdeSeries:
    bandwidth: float
    grid: tuple[float, ...]
    density: tuple[float, ...]

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))


def describe(scores: Sequence[float], names: Sequence[str] | None = None) -> ScoreStatistics:
    """Population mean/variance (divide by n) with exactly rounded sums.

    math.fsum is order independent, so the result does not depend on how
    scores were gathered.
    """
    n = len(scores)
    if n < 2:
        raise ValueError("describe needs at least two scores")
    for i, x in enumerate(scores):
        if not math.isfinite(x):
            who = names[i] if names is not None else f"index {i}"
            raise ValueError(f"non-finite score {x!r} for case {who}")
    lo, hi = min(scores), max(scores)
    # the division can round past the extremes when all scores are equal
    mean = min(max(math.fsum(scores) / n, lo), hi)
    var = math.fsum((x - mean) ** 2 for x in scores) / n
    return ScoreStatistics(n, mean, var, math.sqrt(var), lo, hi)


def skewness(values: Sequence[float]) -> float:
    """Population (Fisher-Pearson) skewness; 0 for constant data."""
    n = len(values)
    mean = math.fsum(values) / n
    m2 = math.fsum((x - mean) ** 2 for x in values) / n
    if m2 == 0:
        return 0.0
    m3 = math.fsum((x - mean) ** 3 for x in values) / n
    return m3 / m2 ** 1.5


def z_scores(scores: Sequence[float], stats: ScoreStatistics) -> list[float]:
    if not stats.std_dev > 0:
        raise DegenerateDistributionError("degenerate score distribution: standard deviation is 0")
    mu, sd = stats.mean, stats.std_dev
    return [(x - mu) / sd for x in scores]


def freedman_diaconis_edges(scores: Sequence[float], max_bins: int = 1000) -> np.ndarray:
    """Freedman-Diaconis bin edges; Sturges when the IQR is zero."""
    x = np.asarray(scores, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return np.array([lo - 0.5, hi + 0.5])
    q75, q25 = np.percentile(x, [75, 25])
    width = 2.0 * (q75 - q25) * x.size ** (-1 / 3)
    if width > 0:
        nbins = int(math.ceil((hi - lo) / width))
    else:
        nbins = int(math.ceil(math.log2(x.size))) + 1
    nbins = max(1, min(nbins, max_bins))
    return np.linspace(lo, hi, nbins + 1)


def histogram(scores: Sequence[float], edges: Sequence[float] | None = None) -> HistogramSeries:
    """Counts over right-open bins; the last bin also takes its right edge."""
    x = np.asarray(scores, dtype=float)
    if x.size == 0:
        raise ValueError("histogram needs at least one score")
    e = freedman_diaconis_edges(x) if edges is None else np.asarray(edges, dtype=float)
    if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0):
        raise ValueError("bin edges must be strictly increasing with at least two entries")
    counts, _ = np.histogram(x, bins=e)
    return HistogramSeries(tuple(float(v) for v in e), tuple(int(c) for c in counts))


def silverman_bandwidth(scores: Sequence[float]) -> float:
    x = np.asarray(scores, dtype=float)
    sd = float(np.std(x))
    iqr = float(np.subtract(*np.percentile(x, [75, 25])))
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    h = 0.9 * spread * x.size ** (-0.2)
    return h if h > 0 else 1.0


def default_grid(scores: Sequence[float], bandwidth: float, points: int = 512) -> np.ndarray:
    x = np.asarray(scores, dtype=float)
    return np.linspace(x.min() - 4 * bandwidth, x.max() + 4 * bandwidth, points)


def kde(scores: Sequence[float], bandwidth: float | None = None,
        grid: Sequence[float] | None = None) -> KdeSeries:
    """Gaussian kernel density estimate evaluated on `grid`."""
    x = np.asarray(scores, dtype=float)
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    g = default_grid(x, h) if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.diff(g) < 0):
        raise ValueError("grid must be ascending")
    dens = np.empty(g.size)
    norm = 1.0 / (x.size * h * math.sqrt(2 * math.pi))
    # rows of the grid at a time keep memory bounded for large n
    step = max(1, 2_000_000 // max(x.size, 1))
    xs = np.sort(x)
    for i in range(0, g.size, step):
        u = (g[i:i + step, None] - xs[None, :]) / h
        dens[i:i + step] = norm * np.exp(-0.5 * u * u).sum(axis=1)
    return KdeSeries(h, tuple(float(v) for v in g), tuple(float(v) for v in dens))
