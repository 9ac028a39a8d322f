"""Diversity-multiplexing tradeoff reference curve and slope estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_DB_PER_BIT = 10.0 * math.log10(2.0)  # ~3.0103 dB per doubling of SNR


@dataclass(frozen=True)
class DmtCurve:
    """d(r) = (nT - r)(nR - r) at integer r, linearly interpolated between."""

    n_t: int
    n_r: int
    points: tuple[tuple[int, int], ...]

    def diversity(self, r: float) -> float:
        rs = [p[0] for p in self.points]
        ds = [p[1] for p in self.points]
        if not rs[0] <= r <= rs[-1]:
            raise ValueError(f"multiplexing gain {r} outside [0, {rs[-1]}]")
        return float(np.interp(r, rs, ds))


def dmt_curve(n_t: int, n_r: int) -> DmtCurve:
    """Optimum tradeoff points (r, (nT-r)(nR-r)) for r = 0..min(nT, nR)."""
    if n_t < 1 or n_r < 1:
        raise ValueError("antenna counts must be >= 1")
    points = tuple((r, (n_t - r) * (n_r - r)) for r in range(min(n_t, n_r) + 1))
    return DmtCurve(n_t, n_r, points)


def _top_window(points, window_db):
    top = max(x for x, _ in points)
    kept = [(x, y) for x, y in points if x >= top - window_db]
    if len(kept) < 2:
        raise ValueError("need at least 2 points inside the fitting window")
    return np.array([p[0] for p in kept]), np.array([p[1] for p in kept])


def _ls_slope(x, y) -> float:
    xm = x - x.mean()
    return float(np.dot(xm, y - y.mean()) / np.dot(xm, xm))


def estimate_multiplexing_slope(curve, window_db: float = 10.0) -> float:
    """Asymptotic rate slope in bits per 3 dB from (snr_db, rate) points.

    Least-squares fit of rate against snr_db / (10 log10 2) over the top
    `window_db` of the curve.
    """
    points = [(float(x), float(y)) for x, y in curve]
    if len(points) < 2:
        raise ValueError("need at least 2 curve points")
    x, y = _top_window(points, window_db)
    return _ls_slope(x / _DB_PER_BIT, y)


def estimate_diversity_order(curve, window_db: float = 10.0) -> float:
    """Polynomial decay order of outage vs SNR from (snr_db, p_out) points.

    Negative least-squares slope of log10(p_out) against snr_db / 10 over
    the top `window_db`; zero-probability points carry no information about
    the decay and are excluded before windowing.
    """
    points = [(float(x), float(p)) for x, p in curve if p > 0]
    if len(points) < 2:
        raise ValueError("need at least 2 points with positive probability")
    x, p = _top_window(points, window_db)
    return -_ls_slope(x / 10.0, np.log10(p))
