"""Random five-diagonal unitaries, their free counterpart and phase sampling.

Sites are integers ``k`` and the canonical basis vector at ``k`` is written
``phi_k``. A realization is described by phases ``eta_k`` on the torus; in
the physical model they are built from i.i.d. pairs ``(theta_k, alpha_k)`` as

    eta_k = theta_k + theta_{k-1} + alpha_k - alpha_{k-1}   (mod 2 pi).

Columns of the operator come in pairs ``(2k, 2k+1)``::

    U phi_2k     = i r t a phi_{2k-1} + r^2 a phi_2k + i r t b phi_{2k+1} - t^2 b phi_{2k+2}
    U phi_{2k+1} = -t^2 a phi_{2k-1} + i t r a phi_2k + r^2 b phi_{2k+1} + i r t b phi_{2k+2}

with ``a = exp(-i eta_2k)`` and ``b = exp(-i eta_{2k+1})``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from ._torus import TWO_PI, wrap
from .errors import ConfigurationError, UsageError

__all__ = [
    "Coefficients",
    "DistributionSpec",
    "PhaseModel",
    "PhaseField",
    "BandUnitary",
    "sample_phases",
    "sample_eta_iid",
    "phase_char_fn",
    "build_u",
    "build_free",
    "free_s0",
    "factorize",
    "apply",
]

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Coefficients:
    """Reflexion ``r`` and transition ``t`` coefficients with r^2 + t^2 = 1."""

    r: float
    t: float

    def __post_init__(self):
        r, t = float(self.r), float(self.t)
        if not (0.0 < r < 1.0) or not (0.0 < t < 1.0):
            raise ConfigurationError(f"r and t must lie in (0, 1), got r={r}, t={t}")
        if abs(r * r + t * t - 1.0) > UNIT_TOL:
            raise ConfigurationError(f"r^2 + t^2 = {r * r + t * t!r} != 1")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_r(cls, r):
        r = float(r)
        if not 0.0 < r < 1.0:
            raise ConfigurationError(f"r must lie in (0, 1), got {r}")
        return cls(r, math.sqrt((1.0 - r) * (1.0 + r)))

    @classmethod
    def from_t(cls, t):
        c = cls.from_r(math.sqrt((1.0 - t) * (1.0 + t)))
        return cls(c.r, float(t))

    @classmethod
    def balanced(cls):
        s = math.sqrt(0.5)
        return cls(s, s)

    @property
    def tau(self):
        return self.t / self.r

    @property
    def band_edge(self):
        """Half-aperture ``arccos(r^2 - t^2)`` of the free spectrum."""
        return math.acos(self.r * self.r - self.t * self.t)


_KINDS = ("uniform", "point", "arc", "fourier")


@dataclass(frozen=True)
class DistributionSpec:
    """Law of a torus-valued random variable.

    Use the named constructors: :meth:`uniform`, :meth:`point_mass`,
    :meth:`arc` and :meth:`fourier`. For the Fourier density the stored
    coefficients are the characteristic function ``c_n = E[exp(i n X)]`` for
    ``n = 1..K``, so that ``f(x) = (1/2pi) sum_n c_n exp(-i n x)`` with
    ``c_0 = 1`` and ``c_{-n} = conj(c_n)``.
    """

    kind: str
    center: float = 0.0
    half_width: float = 0.0
    A: float = 1.0
    B: float = 0.0
    coefficients: tuple = ()
    _table: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "arc":
            if not (0.0 <= self.half_width <= math.pi):
                raise ConfigurationError("arc half-width must lie in [0, pi]")
        if self.kind == "fourier":
            self._validate_fourier()

    @classmethod
    def uniform(cls):
        return cls("uniform")

    @classmethod
    def point_mass(cls, c=0.0):
        return cls("point", center=wrap(c))

    @classmethod
    def arc(cls, center, half_width):
        return cls("arc", center=wrap(center), half_width=float(half_width))

    @classmethod
    def fourier(cls, A, B, coefficients):
        coeffs = tuple(complex(c) for c in coefficients)
        return cls("fourier", A=float(A), B=float(B), coefficients=coeffs)

    @classmethod
    def wrapped_cauchy(cls, B, center=0.0):
        """Fourier density with ``c_n = exp(-B n + i n center)``; satisfies A = 1."""
        if B <= 0:
            raise ConfigurationError("B must be positive")
        n_terms = int(math.ceil(40.0 / B))
        n = np.arange(1, n_terms + 1)
        coeffs = np.exp(-B * n + 1j * n * center)
        return cls.fourier(1.0, B, coeffs)

    def _grid_density(self, x):
        n = np.arange(1, len(self.coefficients) + 1)
        c = np.asarray(self.coefficients)
        series = (c[None, :] * np.exp(-1j * np.outer(x, n))).real.sum(axis=1)
        return (1.0 + 2.0 * series) / TWO_PI

    def _validate_fourier(self):
        if self.A < 1.0:
            raise ConfigurationError("A >= 1 is required since the zeroth coefficient is 1")
        if self.B <= 0:
            raise ConfigurationError("B must be positive")
        c = np.asarray(self.coefficients, dtype=complex)
        n = np.arange(1, len(c) + 1)
        bound = self.A * np.exp(-self.B * n)
        if np.any(np.abs(c) > bound * (1 + 1e-12)):
            raise ConfigurationError("coefficients violate |c_n| <= A exp(-B n)")
        grid = -np.pi + TWO_PI * np.arange(4096) / 4096
        if self._grid_density(grid).min() < 0:
            raise ConfigurationError("Fourier density is negative on the 4096-point grid")

    def density(self, x):
        """Probability density w.r.t. Lebesgue measure on (-pi, pi]."""
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            return np.full_like(x, 1.0 / TWO_PI)
        if self.kind == "arc":
            inside = np.abs(wrap(x - self.center)) <= self.half_width
            return np.where(inside, 1.0 / (2.0 * self.half_width), 0.0)
        if self.kind == "fourier":
            return self._grid_density(np.atleast_1d(x)).reshape(x.shape)
        raise ConfigurationError("a point mass has no density")

    def characteristic(self, n):
        """Exact ``E[exp(i n X)]`` for integer ``n``."""
        n = int(n)
        if n == 0:
            return 1.0 + 0j
        if self.kind == "uniform":
            return 0j
        if self.kind == "point":
            return complex(np.exp(1j * n * self.center))
        if self.kind == "arc":
            h = self.half_width
            s = 1.0 if h == 0 else math.sin(n * h) / (n * h)
            return complex(np.exp(1j * n * self.center) * s)
        c = self.coefficients
        if abs(n) > len(c):
            return 0j
        return c[n - 1] if n > 0 else c[-n - 1].conjugate()

    def _inverse_cdf_table(self):
        if self._table is None:
            m = 1 << 14
            x = -np.pi + TWO_PI * np.arange(m + 1) / m
            c = np.asarray(self.coefficients)
            n = np.arange(1, len(c) + 1)
            # integral of exp(-i n s) over [-pi, x]
            prim = (np.exp(-1j * np.outer(x, n)) - np.exp(1j * n * np.pi)[None, :]) / (-1j * n)[None, :]
            cdf = (x + np.pi) / TWO_PI + (c[None, :] * prim).real.sum(axis=1) / np.pi
            cdf[0], cdf[-1] = 0.0, 1.0
            cdf = np.maximum.accumulate(cdf)
            object.__setattr__(self, "_table", (x, cdf))
        return self._table

    def sample(self, u):
        """Map uniform variates ``u`` in [0, 1) to torus values in (-pi, pi]."""
        u = np.asarray(u, dtype=float)
        if self.kind == "uniform":
            return wrap(-np.pi + TWO_PI * u)
        if self.kind == "point":
            return wrap(np.full_like(u, self.center))
        if self.kind == "arc":
            return wrap(self.center + self.half_width * (2.0 * u - 1.0))
        x, cdf = self._inverse_cdf_table()
        return wrap(np.interp(u, cdf, x))

    def support_arcs(self):
        """Closed support as a list of ``(start, end)`` arcs, ``end - start <= 2 pi``."""
        if self.kind in ("uniform", "fourier"):
            # an analytic density vanishes at most on a finite set
            return [(-np.pi, np.pi)]
        if self.kind == "point":
            return [(self.center, self.center)]
        return [(self.center - self.half_width, self.center + self.half_width)]

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "point":
            d["center"] = self.center
        elif self.kind == "arc":
            d.update(center=self.center, half_width=self.half_width)
        elif self.kind == "fourier":
            d.update(A=self.A, B=self.B,
                     coefficients=[[c.real, c.imag] for c in self.coefficients])
        return d

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind")
        if kind == "uniform":
            return cls.uniform()
        if kind == "point":
            return cls.point_mass(d.get("center", 0.0))
        if kind == "arc":
            return cls.arc(d.get("center", 0.0), d["half_width"])
        if kind == "fourier":
            if "coefficients" not in d:
                return cls.wrapped_cauchy(d["B"])
            coeffs = [complex(*c) if isinstance(c, (list, tuple)) else complex(c)
                      for c in d["coefficients"]]
            return cls.fourier(d["A"], d["B"], coeffs)
        raise ConfigurationError(f"unknown distribution kind {kind!r}")


@dataclass(frozen=True)
class PhaseField:
    """Phases of one realization on the sites ``lo..hi`` (inclusive).

    ``theta`` and ``alpha`` live on ``lo-1..hi`` because ``eta_lo`` needs the
    left neighbour; they are ``None`` when the phases ``eta`` were sampled
    directly.
    """

    lo: int
    hi: int
    eta: np.ndarray
    theta: np.ndarray | None = None
    alpha: np.ndarray | None = None

    def __post_init__(self):
        if self.hi < self.lo:
            raise UsageError("empty window")
        if len(self.eta) != self.hi - self.lo + 1:
            raise UsageError("eta length does not match the window")
        for arr in (self.eta, self.theta, self.alpha):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def sites(self):
        return np.arange(self.lo, self.hi + 1)

    def covers(self, lo, hi):
        return self.lo <= lo and hi <= self.hi

    def eta_at(self, k):
        k = np.asarray(k)
        if np.any(k < self.lo) or np.any(k > self.hi):
            raise UsageError(f"site outside phase window [{self.lo}, {self.hi}]")
        return self.eta[k - self.lo]

    def eta_range(self, lo, hi):
        if not self.covers(lo, hi):
            raise UsageError(
                f"phases cover [{self.lo}, {self.hi}] but [{lo}, {hi}] is needed")
        return self.eta[lo - self.lo:hi - self.lo + 1]

    def with_zeroed(self, sites):
        """Copy with ``eta`` set to 0 at the given sites (those inside the window)."""
        eta = self.eta.copy()
        for k in sites:
            if self.lo <= k <= self.hi:
                eta[k - self.lo] = 0.0
        return PhaseField(self.lo, self.hi, eta, self.theta, self.alpha)

    def shifted(self, j):
        """Phase data translated by ``2j`` sites: ``eta'_k = eta_{k+2j}``."""
        s = 2 * int(j)
        return PhaseField(self.lo - s, self.hi - s, self.eta.copy(),
                          None if self.theta is None else self.theta.copy(),
                          None if self.alpha is None else self.alpha.copy())

    def recomputed_eta(self):
        if self.theta is None:
            raise UsageError("phase field was sampled without (theta, alpha)")
        th, al = self.theta, self.alpha
        return wrap(th[1:] + th[:-1] + al[1:] - al[:-1])

    def to_text(self):
        """Columnar text ``site theta alpha eta`` (nan when theta/alpha are absent)."""
        buf = io.StringIO()
        buf.write("# site theta alpha eta\n")
        for i, k in enumerate(range(self.lo, self.hi + 1)):
            th = self.theta[i + 1] if self.theta is not None else float("nan")
            al = self.alpha[i + 1] if self.alpha is not None else float("nan")
            buf.write(f"{k:d} {float(th)!r} {float(al)!r} {float(self.eta[i])!r}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text):
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        sites = np.array([int(r[0]) for r in rows])
        vals = np.array([[float(x) for x in r[1:4]] for r in rows])
        lo, hi = int(sites[0]), int(sites[-1])
        if not np.array_equal(sites, np.arange(lo, hi + 1)):
            raise UsageError("sites must be consecutive")
        return cls(lo, hi, vals[:, 2].copy())


def sample_phases(dist_theta, dist_alpha, window, seed, realization=0):
    """Sample ``theta``, ``alpha`` i.i.d. and derive ``eta`` on ``window``.

    The result is a deterministic function of ``(seed, realization)`` and the
    site index: a larger window contains the smaller one unchanged.
    """
    lo, hi = (int(w) for w in window)
    if hi < lo:
        raise UsageError("window must be nonempty")
    for d in (dist_theta, dist_alpha):
        if not isinstance(d, DistributionSpec):
            raise ConfigurationError("theta and alpha need a DistributionSpec")
    th = dist_theta.sample(_rng.site_uniforms(seed, realization, _rng.TAG_THETA, lo - 1, hi))
    al = dist_alpha.sample(_rng.site_uniforms(seed, realization, _rng.TAG_ALPHA, lo - 1, hi))
    th, al = np.atleast_1d(th), np.atleast_1d(al)
    eta = wrap(th[1:] + th[:-1] + al[1:] - al[:-1])
    return PhaseField(lo, hi, np.atleast_1d(eta), th, al)


def sample_eta_iid(mu, window, seed, realization=0):
    """Sample ``eta_k`` i.i.d. with law ``mu`` (the Anderson-like variant)."""
    lo, hi = (int(w) for w in window)
    if hi < lo:
        raise UsageError("window must be nonempty")
    if not isinstance(mu, DistributionSpec):
        raise ConfigurationError("mu must be a DistributionSpec")
    eta = mu.sample(_rng.site_uniforms(seed, realization, _rng.TAG_ETA, lo, hi))
    return PhaseField(lo, hi, np.atleast_1d(eta))


@dataclass(frozen=True)
class PhaseModel:
    """How phases are generated: from ``(theta, alpha)`` or i.i.d. ``eta``."""

    theta: DistributionSpec | None = None
    alpha: DistributionSpec | None = None
    eta: DistributionSpec | None = None

    def __post_init__(self):
        pair = self.theta is not None and self.alpha is not None
        if pair == (self.eta is not None):
            raise ConfigurationError(
                "give either both theta and alpha distributions or an eta distribution")

    @classmethod
    def uniform(cls):
        return cls(DistributionSpec.uniform(), DistributionSpec.uniform())

    @classmethod
    def free(cls):
        return cls(DistributionSpec.point_mass(0.0), DistributionSpec.point_mass(0.0))

    @classmethod
    def iid(cls, mu):
        return cls(eta=mu)

    @property
    def is_free(self):
        if self.eta is not None:
            return self.eta.kind == "point" and self.eta.center == 0.0
        return all(d.kind == "point" and d.center == 0.0 for d in (self.theta, self.alpha))

    def sample(self, window, seed, realization=0):
        if self.eta is not None:
            return sample_eta_iid(self.eta, window, seed, realization)
        return sample_phases(self.theta, self.alpha, window, seed, realization)

    def eta_law(self):
        """Marginal law of ``eta`` when it is one of the supported closed forms."""
        if self.eta is not None:
            return self.eta
        if "uniform" in (self.theta.kind, self.alpha.kind):
            return DistributionSpec.uniform()
        if self.theta.kind == "point" and self.alpha.kind == "point":
            return DistributionSpec.point_mass(2.0 * self.theta.center)
        raise ConfigurationError("no closed form for the law of eta under this model")

    def to_dict(self):
        if self.eta is not None:
            return {"eta": self.eta.to_dict()}
        return {"theta": self.theta.to_dict(), "alpha": self.alpha.to_dict()}

    @classmethod
    def from_dict(cls, d):
        if "eta" in d:
            return cls(eta=DistributionSpec.from_dict(d["eta"]))
        return cls(DistributionSpec.from_dict(d["theta"]), DistributionSpec.from_dict(d["alpha"]))


def phase_char_fn(samples, orders):
    """Empirical characteristic function of ``eta`` with standard errors.

    ``samples`` is an array of ``eta`` values of shape ``(n_samples,)`` or
    ``(n_samples, n_sites)``, or a list of :class:`PhaseField`. Returns a dict
    with ``phi[n] = mean exp(i n eta)``, its standard error ``stderr[n]``, and,
    when consecutive sites are available, the joint estimates
    ``joint[(n1, n2)] = mean exp(i (n1 eta_k + n2 eta_{k+1}))``.
    """
    if isinstance(samples, (list, tuple)) and samples and isinstance(samples[0], PhaseField):
        arr = np.array([pf.eta for pf in samples])
    else:
        arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise UsageError("empty sample set")
    flat = arr.ravel()
    phi, err = {}, {}
    for n in orders:
        e = np.exp(1j * n * flat)
        phi[n] = e.mean()
        err[n] = 0.0 if n == 0 else float(np.sqrt(np.var(e) / flat.size))
    joint, joint_err = {}, {}
    if arr.ndim == 2 and arr.shape[1] >= 2:
        a, b = arr[:, :-1].ravel(), arr[:, 1:].ravel()
        for n1 in orders:
            for n2 in orders:
                e = np.exp(1j * (n1 * a + n2 * b))
                joint[(n1, n2)] = e.mean()
                joint_err[(n1, n2)] = float(np.sqrt(np.var(e) / a.size))
    return {"phi": phi, "stderr": err, "joint": joint, "joint_stderr": joint_err,
            "n_samples": flat.size}


@dataclass(frozen=True)
class BandUnitary:
    """Five-diagonal matrix on the sites ``lo..hi`` in band storage.

    ``band[i, d]`` is the entry at row ``lo + i`` and column ``lo + i + d - 2``.
    Entries whose column falls outside the window are dropped, so rows and
    columns within two sites of an edge are generally not unitary unless a
    boundary condition was imposed there.
    """

    lo: int
    hi: int
    band: np.ndarray
    params: Coefficients
    boundary: tuple = ()

    @property
    def dim(self):
        return self.hi - self.lo + 1

    @property
    def sites(self):
        return np.arange(self.lo, self.hi + 1)

    @classmethod
    def from_dense(cls, m, lo, params, boundary=()):
        n = m.shape[0]
        band = np.zeros((n, 5), dtype=complex)
        rows = np.arange(n)
        for d in range(5):
            cols = rows + d - 2
            ok = (cols >= 0) & (cols < n)
            band[rows[ok], d] = m[rows[ok], cols[ok]]
        return cls(lo, lo + n - 1, band, params, tuple(boundary))

    def entry(self, i, j):
        d = j - i + 2
        if not (0 <= d <= 4) or not (self.lo <= i <= self.hi) or not (self.lo <= j <= self.hi):
            return 0j
        return complex(self.band[i - self.lo, d])

    def row(self, i):
        """Nonzero ``(column, value)`` pairs of row ``i``."""
        out = []
        for d in range(5):
            j = i + d - 2
            v = self.band[i - self.lo, d]
            if v != 0 and self.lo <= j <= self.hi:
                out.append((j, complex(v)))
        return out

    def to_dense(self):
        n = self.dim
        m = np.zeros((n, n), dtype=complex)
        rows = np.arange(n)
        for d in range(5):
            cols = rows + d - 2
            ok = (cols >= 0) & (cols < n)
            m[rows[ok], cols[ok]] = self.band[rows[ok], d]
        return m

    def to_sparse(self):
        from scipy import sparse
        n = self.dim
        rows = np.repeat(np.arange(n), 5)
        cols = rows + np.tile(np.arange(5) - 2, n)
        vals = self.band.ravel()
        ok = (cols >= 0) & (cols < n) & (vals != 0)
        return sparse.csr_matrix((vals[ok], (rows[ok], cols[ok])), shape=(n, n))

    def apply(self, v):
        return apply(self, v)

    def unitarity_defect(self, margin=2):
        """``max |U*U - I|`` over the rows and columns at least ``margin`` from the edges."""
        m = self.to_dense()
        g = m.conj().T @ m - np.eye(self.dim)
        if margin:
            g = g[margin:-margin, margin:-margin]
        if g.size == 0:
            return 0.0
        return float(np.linalg.norm(g, 2))


def _column_entries(j, eta_j, eta_pair, r, t):
    """Row offsets and values for column ``j`` (vectorized over ``j``).

    ``eta_j`` is eta at the even member ``2k`` of the column pair and
    ``eta_pair`` at the odd member ``2k+1``.
    """
    a = np.exp(-1j * eta_j)
    b = np.exp(-1j * eta_pair)
    rt, r2, t2 = r * t, r * r, t * t
    even = (j % 2) == 0
    # (row offset for even column, row offset for odd column, value even, value odd)
    return [
        (np.where(even, -1, -2), np.where(even, 1j * rt * a, -t2 * a)),
        (np.where(even, 0, -1), np.where(even, r2 * a, 1j * rt * a)),
        (np.where(even, 1, 0), np.where(even, 1j * rt * b, r2 * b)),
        (np.where(even, 2, 1), np.where(even, -t2 * b, 1j * rt * b)),
    ]


def _assemble(params, eta_of, lo, hi, boundary=()):
    n = hi - lo + 1
    band = np.zeros((n, 5), dtype=complex)
    j = np.arange(lo, hi + 1)
    even_site = j - (j % 2)
    for off, val in _column_entries(j, eta_of(even_site), eta_of(even_site + 1),
                                    params.r, params.t):
        rows = j + off
        ok = (rows >= lo) & (rows <= hi)
        band[rows[ok] - lo, (2 - off)[ok]] = val[ok]
    return BandUnitary(lo, hi, band, params, tuple(boundary))


def build_u(params, phases, window=None):
    """Compression of the random operator to the sites ``window = (lo, hi)``.

    The columns at ``lo..hi`` need ``eta`` on ``lo-1..hi+1``; by default the
    window is the phase window shrunk by one site on each side.
    """
    if window is None:
        window = (phases.lo + 1, phases.hi - 1)
    lo, hi = (int(w) for w in window)
    if hi - lo < 4:
        raise UsageError("window must contain at least five sites")
    if not phases.covers(lo - 1, hi + 1):
        raise UsageError(
            f"phases on [{phases.lo}, {phases.hi}] do not cover [{lo - 1}, {hi + 1}]")
    return _assemble(params, lambda k: phases.eta[k - phases.lo], lo, hi)


def build_free(params, window):
    """Compression of the free operator (all phases zero) to ``window``."""
    lo, hi = (int(w) for w in window)
    if hi - lo < 4:
        raise UsageError("window must contain at least five sites")
    return _assemble(params, lambda k: np.zeros(np.shape(k)), lo, hi)


def free_s0(params, window):
    """The real five-diagonal unitary ``S0`` unitarily equivalent to the free operator.

    Rows read ``(rt, r^2, rt, -t^2)`` on columns ``2k-1..2k+2`` for even rows
    ``2k`` and ``(-t^2, -rt, r^2, -rt)`` on ``2k-1..2k+2`` for odd rows ``2k+1``;
    in particular ``<phi_{2k-2}|S0 phi_{2k}> = -t^2``.
    """
    lo, hi = (int(w) for w in window)
    r, t = params.r, params.t
    n = hi - lo + 1
    band = np.zeros((n, 5), dtype=complex)
    i = np.arange(lo, hi + 1)
    even = i % 2 == 0
    pattern_even = {-1: r * t, 0: r * r, 1: r * t, 2: -t * t}
    pattern_odd = {-2: -t * t, -1: -r * t, 0: r * r, 1: -r * t}
    for pat, mask in ((pattern_even, even), (pattern_odd, ~even)):
        for off, val in pat.items():
            cols = i + off
            ok = mask & (cols >= lo) & (cols <= hi)
            band[(i - lo)[ok], off + 2] = val
    return BandUnitary(lo, hi, band, params, ("S0",))


@dataclass(frozen=True)
class Factorization:
    D: np.ndarray        # diagonal entries exp(-i eta_k)
    S0: BandUnitary
    V: np.ndarray        # dense block-rotation unitary
    residual: float


def factorize(U, phases):
    """Write the compression ``U`` as ``V^{-1} D S0 V``.

    ``V`` is the direct sum of the 2x2 blocks ``[[i r, t], [-i t, r]]`` on the
    site pairs ``(2j-1, 2j)``, so the window must start on an odd site and
    end on an even one.
    """
    if U.lo % 2 == 0 or U.hi % 2 == 1:
        raise UsageError("factorization needs a window [odd, even] of even dimension")
    r, t = U.params.r, U.params.t
    n = U.dim
    V = np.zeros((n, n), dtype=complex)
    blk = np.array([[1j * r, t], [-1j * t, r]])
    for i in range(0, n, 2):
        V[i:i + 2, i:i + 2] = blk
    d = np.exp(-1j * phases.eta_range(U.lo, U.hi))
    S0 = free_s0(U.params, (U.lo, U.hi))
    recon = V.conj().T @ (d[:, None] * S0.to_dense()) @ V
    residual = float(np.linalg.norm(U.to_dense() - recon, 2))
    return Factorization(d, S0, V, residual)


def apply(U, v):
    """Matrix-vector product using the band storage."""
    v = np.asarray(v)
    if v.shape[0] != U.dim:
        raise UsageError(f"vector of length {v.shape[0]} for a {U.dim}-site operator")
    n = U.dim
    pad = np.zeros((n + 4,) + v.shape[1:], dtype=complex)
    pad[2:n + 2] = v
    out = np.zeros((n,) + v.shape[1:], dtype=complex)
    for d in range(5):
        coef = U.band[:, d]
        if v.ndim > 1:
            coef = coef.reshape((n,) + (1,) * (v.ndim - 1))
        out += coef * pad[d:d + n]
    return out
