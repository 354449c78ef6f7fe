"""Arc arithmetic on the circle and checks of the almost sure spectrum."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._torus import TWO_PI, wrap

__all__ = ["ArcUnion", "SupportReport", "predicted_support", "support_check", "coverage"]


@dataclass(frozen=True)
class ArcUnion:
    """Finite union of closed arcs ``[start, start + length]`` (counterclockwise)."""

    arcs: tuple   # ((start, length), ...), start in (-pi, pi], 0 <= length <= 2 pi

    @classmethod
    def from_intervals(cls, intervals):
        arcs = []
        for a, b in intervals:
            length = float(b - a)
            if length < 0:
                raise ValueError("interval end before start")
            arcs.append((wrap(a), min(length, TWO_PI)))
        return cls(tuple(arcs)).merged()

    @classmethod
    def full(cls):
        return cls(((-np.pi, TWO_PI),))

    @property
    def is_full(self):
        return any(length >= TWO_PI - 1e-15 for _, length in self.arcs)

    @property
    def length(self):
        if self.is_full:
            return TWO_PI
        return float(sum(length for _, length in self.arcs))

    def merged(self):
        if not self.arcs:
            return self
        if self.is_full:
            return ArcUnion.full()
        items = sorted(self.arcs)
        out = []
        for s, length in items:
            if out and s <= out[-1][0] + out[-1][1]:
                ps, pl = out[-1]
                out[-1] = (ps, max(pl, s + length - ps))
            else:
                out.append((s, length))
        # the last arc may wrap past pi onto the first one
        if len(out) > 1:
            fs, fl = out[0]
            ls, ll = out[-1]
            if ls + ll >= fs + TWO_PI:
                out[0] = (ls, max(ll, fs + fl + TWO_PI - ls))
                out.pop()
        if any(length >= TWO_PI for _, length in out):
            return ArcUnion.full()
        return ArcUnion(tuple((wrap(s), length) for s, length in out))

    def signed_distance(self, lam):
        """Distance outside the union (positive) or minus depth inside (negative)."""
        lam = np.asarray(lam, dtype=float)
        if self.is_full:
            return np.full(lam.shape, -np.pi)
        best = np.full(lam.shape, np.inf)
        for s, length in self.arcs:
            c = s + length / 2
            d = np.abs(wrap(lam - c)) - length / 2
            best = np.minimum(best, d)
        return best

    def contains(self, lam, tol=0.0):
        return self.signed_distance(lam) <= tol

    def dilate(self, tol):
        return ArcUnion(tuple((s - tol, length + 2 * tol) for s, length in self.arcs)).merged()

    def intervals(self):
        return [(s, s + length) for s, length in self.arcs]


def predicted_support(mu, params):
    """Rotate the free band ``[-a, a]`` by every arc of ``supp mu``."""
    a = params.band_edge
    pieces = [(lo - a, hi + a) for lo, hi in mu.support_arcs()]
    return ArcUnion.from_intervals(pieces)


@dataclass(frozen=True)
class SupportReport:
    n_points: int
    outlier_fraction: float
    outlier_mass: float
    max_signed_distance: float
    tol: float


def support_check(measure, arcs, tol):
    """Fraction of eigenphases farther than ``tol`` outside ``arcs``."""
    d = arcs.signed_distance(measure.phases)
    out = d > tol
    return SupportReport(
        n_points=int(measure.size),
        outlier_fraction=float(out.mean()),
        outlier_mass=float(measure.weights[out].sum()),
        max_signed_distance=float(d.max()),
        tol=float(tol),
    )


def coverage(measure, arcs, tol, n_grid=100000):
    """Fraction of the length of ``arcs`` lying within ``tol`` of some atom of ``measure``.

    Evaluated on ``n_grid`` equispaced points of the circle.
    """
    grid = -np.pi + TWO_PI * (np.arange(n_grid) + 0.5) / n_grid
    grid = grid[arcs.contains(grid)]
    if grid.size == 0:
        return 0.0
    ph = measure.phases
    # nearest atom on the circle: neighbours in sorted order plus wrap-around
    ext = np.concatenate([ph[-1:] - TWO_PI, ph, ph[:1] + TWO_PI])
    idx = np.searchsorted(ext, grid)
    d = np.minimum(np.abs(grid - ext[idx - 1]), np.abs(ext[np.minimum(idx, len(ext) - 1)] - grid))
    return float(np.mean(d <= tol))
