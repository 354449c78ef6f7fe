"""Empirical spectral measures on the torus and the density-of-states estimators."""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .._parallel import ordered_map
from .._torus import TWO_PI, wrap
from ..errors import NumericError, UsageError
from ..model import PhaseModel, build_u
from .truncation import TruncatedBlock, truncate

__all__ = [
    "SpectralMeasure",
    "eigenphases",
    "pooled_measure",
    "integrated_dos",
    "ks_distance",
    "dos_moments",
    "MomentEstimate",
]

MODULUS_TOL = 1e-8
N_BINS = 256


@dataclass(frozen=True)
class SpectralMeasure:
    """Atomic probability measure: sorted phases in (-pi, pi] with weights."""

    phases: np.ndarray
    weights: np.ndarray
    max_modulus_defect: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.phases) != len(self.weights):
            raise UsageError("phases and weights differ in length")
        if len(self.phases) == 0:
            raise UsageError("empty measure")
        order = np.argsort(self.phases, kind="stable")
        object.__setattr__(self, "phases", np.asarray(self.phases, dtype=float)[order])
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float)[order])
        self.phases.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def uniform_atoms(cls, phases, **meta):
        phases = wrap(np.atleast_1d(phases))
        return cls(phases, np.full(len(phases), 1.0 / len(phases)), meta=meta)

    @property
    def size(self):
        return len(self.phases)

    @property
    def total_mass(self):
        return float(self.weights.sum())

    def moment(self, s):
        """``int exp(i s lambda) dk(lambda)``."""
        return complex(np.sum(self.weights * np.exp(1j * s * self.phases)))

    def moments(self, s_max):
        return np.array([self.moment(s) for s in range(s_max + 1)])

    def cdf(self, lam):
        """Right-continuous distribution function from -pi."""
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        idx = np.searchsorted(self.phases, np.asarray(lam, dtype=float), side="right")
        out = cum[idx]
        return float(out) if np.ndim(out) == 0 else out

    def histogram(self, bins=N_BINS):
        """Density w.r.t. ``d lambda / 2 pi`` on ``bins`` uniform bins of (-pi, pi]."""
        edges = np.linspace(-np.pi, np.pi, bins + 1)
        mass, _ = np.histogram(self.phases, bins=edges, weights=self.weights)
        return edges, mass * bins

    def to_csv(self, header=None):
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        buf.write("phase,weight\n")
        for p, w in zip(self.phases, self.weights):
            buf.write(f"{p:.17g},{w:.17g}\n")
        return buf.getvalue()

    def summary(self, s_max=8, bins=N_BINS, references=None):
        edges, dens = self.histogram(bins)
        out = {
            "size": self.size,
            "total_mass": self.total_mass,
            "max_modulus_defect": self.max_modulus_defect,
            "moments": [[m.real, m.imag] for m in self.moments(s_max)],
            "histogram": {"edges": edges.tolist(), "density": dens.tolist()},
        }
        if references:
            out["ks"] = {name: ks_distance(self, ref) for name, ref in references.items()}
        return out

    def to_json(self, **kw):
        return json.dumps(self.summary(**kw), indent=2)


def eigenphases(block, check=True):
    """Eigenphases of a truncated block (or any dense unitary) as a measure."""
    m = block.matrix if isinstance(block, TruncatedBlock) else np.asarray(block)
    try:
        ev = scipy.linalg.eigvals(m, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError("eigensolver failed", shape=m.shape, cause=str(exc)) from exc
    defect = float(np.max(np.abs(np.abs(ev) - 1.0)))
    if check and defect > MODULUS_TOL:
        raise NumericError("eigenvalues off the unit circle", max_modulus_defect=defect,
                           shape=m.shape)
    meas = SpectralMeasure(np.angle(ev), np.full(len(ev), 1.0 / len(ev)), defect)
    if isinstance(block, TruncatedBlock):
        meas.meta.update(M=block.M, N=block.N)
    return meas


def _realization_phases(task):
    model, params, M, N, seed, i = task
    ph = model.sample((M - 2, N + 3), seed, i)
    return eigenphases(truncate(params, ph, M, N))


def pooled_measure(model, params, size, n_realizations, seed, M=0, workers=None):
    """Pool eigenphases of ``n_realizations`` truncations on ``M+1..M+size``."""
    if not isinstance(model, PhaseModel):
        raise UsageError("a PhaseModel is required")
    tasks = [(model, params, M, M + size, seed, i) for i in range(n_realizations)]
    parts = ordered_map(_realization_phases, tasks, workers)
    return pool(parts)


def pool(measures):
    """Equal-weight mixture of measures, assembled in the given order."""
    if not measures:
        raise UsageError("nothing to pool")
    ph = np.concatenate([m.phases for m in measures])
    w = np.concatenate([m.weights / len(measures) for m in measures])
    defect = max(m.max_modulus_defect for m in measures)
    return SpectralMeasure(ph, w, defect, meta={"pooled": len(measures)})


def integrated_dos(measure, lam):
    """``N(lambda) = dk((-pi, lambda])`` computed from the raw sorted phases."""
    return measure.cdf(lam)


def ks_distance(measure, reference):
    """Kolmogorov distance to another measure or to a CDF callable on (-pi, pi].

    The string ``"uniform"`` stands for ``d lambda / 2 pi``.
    """
    if isinstance(reference, str):
        if reference != "uniform":
            raise UsageError(f"unknown reference {reference!r}")
        reference = lambda x: (np.asarray(x) + np.pi) / TWO_PI
    x = measure.phases
    right = measure.cdf(x)
    left = measure.cdf(np.nextafter(x, -np.inf))
    if isinstance(reference, SpectralMeasure):
        pts = np.concatenate([x, reference.phases])
        d1 = np.abs(measure.cdf(pts) - reference.cdf(pts))
        # left limits at every atom of either measure
        lm = measure.cdf(np.nextafter(pts, -np.inf))
        lr = reference.cdf(np.nextafter(pts, -np.inf))
        return float(max(d1.max(), np.abs(lm - lr).max()))
    f = np.asarray(reference(x), dtype=float)
    return float(max(np.abs(right - f).max(), np.abs(left - f).max()))


@dataclass(frozen=True)
class MomentEstimate:
    s: np.ndarray
    m: np.ndarray           # complex moments m_s
    stderr: np.ndarray      # standard error of each estimate
    n_realizations: int

    def conj_moment(self, s):
        """``m_{-s} = conj(m_s)``."""
        return np.conj(self.m[int(s)])


def _diagonal_orbit(task):
    model, params, s_max, seed, i = task
    half = 2 * s_max + 4
    ph = model.sample((-half - 1, half + 2), seed, i)
    U = build_u(params, ph, (-half, half + 1)).to_dense()
    v = np.zeros((U.shape[0], 2), dtype=complex)
    v[half, 0] = v[half + 1, 1] = 1.0
    out = np.empty(s_max + 1, dtype=complex)
    for s in range(s_max + 1):
        out[s] = 0.5 * (v[half, 0] + v[half + 1, 1])
        v = U @ v
    return out


def dos_moments(model, params, s_max, n_realizations, seed, workers=None):
    """Monte Carlo ``m_s = E[<phi_0|U^s phi_0> + <phi_1|U^s phi_1>] / 2``, ``s = 0..s_max``.

    Each realization lives on a window of half-width ``2 s_max + 4`` around
    the origin, so the orbit never reaches the window edge.
    """
    if s_max < 1:
        raise UsageError("s_max must be at least 1")
    tasks = [(model, params, int(s_max), seed, i) for i in range(n_realizations)]
    samples = np.array(ordered_map(_diagonal_orbit, tasks, workers))
    m = samples.mean(axis=0)
    m[0] = 1.0
    if n_realizations > 1:
        err = np.sqrt(samples.var(axis=0, ddof=1) / n_realizations)
    else:
        err = np.full(s_max + 1, np.nan)
    err[0] = 0.0
    return MomentEstimate(np.arange(s_max + 1), m, err, n_realizations)
