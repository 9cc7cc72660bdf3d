"""Dirichlet-process representations and closed-form moments.

Two exact samplers are provided: finite-dimensional Dirichlet marginals over
a partition, and truncated stick-breaking realizations carrying explicit
truncation bookkeeping.  Closed-form mean/variance/cross-moment formulas and
posterior conjugacy live alongside them so Monte Carlo output can be checked
against exact targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ArgumentError, ParameterError, PartitionError, TruncationError
from .rvgen import DirichletParams, RngStream, sample_dirichlet

# Clipping window applied to uniforms before quantile transforms, so bases
# with unbounded support never produce infinite atoms.
_U_LO = 1e-300
_U_HI = 1.0 - 1e-16


# ---------------------------------------------------------------------------
# Borel sets: finite disjoint unions of half-open intervals (lo, hi]
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BorelSet:
    """A finite union of disjoint, sorted half-open intervals (lo, hi]."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        cleaned = []
        prev_hi = -np.inf
        for pair in self.intervals:
            lo, hi = (float(pair[0]), float(pair[1]))
            if np.isnan(lo) or np.isnan(hi) or not lo < hi:
                raise ParameterError(f"interval ({lo}, {hi}] is empty or invalid")
            if lo < prev_hi:
                raise ParameterError("intervals must be sorted and pairwise disjoint")
            cleaned.append((lo, hi))
            prev_hi = hi
        object.__setattr__(self, "intervals", tuple(cleaned))

    @classmethod
    def interval(cls, lo: float, hi: float) -> "BorelSet":
        return cls(((lo, hi),))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def intersect(self, other: "BorelSet") -> "BorelSet":
        """Intersection, again a sorted disjoint union of half-open intervals."""
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] <= b[j][1]:
                i += 1
            else:
                j += 1
        return BorelSet(tuple(out))

    def contains_interval(self, lo: float, hi: float) -> bool:
        """True when (lo, hi] sits inside one of this set's intervals."""
        return any(l <= lo and hi <= h for l, h in self.intervals)


class MeasureLike(Protocol):
    """Anything that can assign probability mass to a BorelSet."""

    def measure(self, s: BorelSet) -> float: ...


# ---------------------------------------------------------------------------
# Base measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BaseMeasure:
    """A continuous distribution H given by cdf, quantile, and density.

    The callables must accept (and vectorize over) numpy arrays.  The cdf is
    assumed continuous and nondecreasing; quantile inverts it on (0, 1).
    """

    cdf: Callable
    quantile: Callable
    density: Callable
    support: tuple[float, float]
    label: str

    def measure(self, s: BorelSet) -> float:
        if s.is_empty:
            return 0.0
        total = 0.0
        for lo, hi in s.intervals:
            total += float(self.cdf(hi)) - float(self.cdf(lo))
        return total


def uniform_base() -> BaseMeasure:
    return BaseMeasure(
        cdf=lambda x: np.clip(x, 0.0, 1.0),
        quantile=lambda u: np.asarray(u, dtype=float),
        density=lambda x: ((np.asarray(x) >= 0.0) & (np.asarray(x) <= 1.0)).astype(float),
        support=(0.0, 1.0),
        label="uniform",
    )


def exponential_base(rate: float = 1.0) -> BaseMeasure:
    if not np.isfinite(rate) or rate <= 0:
        raise ParameterError("exponential rate must be positive")

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, -np.expm1(-rate * np.maximum(x, 0.0)), 0.0)

    def density(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, rate * np.exp(-rate * np.minimum(x, 7e2)), 0.0)

    return BaseMeasure(
        cdf=cdf,
        quantile=lambda u: -np.log1p(-np.asarray(u, dtype=float)) / rate,
        density=density,
        support=(0.0, np.inf),
        label=f"exponential({rate:g})",
    )


def normal_base(mu: float = 0.0, sigma: float = 1.0) -> BaseMeasure:
    if not np.isfinite(mu) or not np.isfinite(sigma) or sigma <= 0:
        raise ParameterError("normal base needs finite mu and positive sigma")
    norm_const = 1.0 / (sigma * np.sqrt(2.0 * np.pi))
    return BaseMeasure(
        cdf=lambda x: ndtr((np.asarray(x, dtype=float) - mu) / sigma),
        quantile=lambda u: mu + sigma * ndtri(np.asarray(u, dtype=float)),
        density=lambda x: norm_const
        * np.exp(-0.5 * ((np.asarray(x, dtype=float) - mu) / sigma) ** 2),
        support=(-np.inf, np.inf),
        label=f"normal({mu:g},{sigma:g})",
    )


def support_set(base: BaseMeasure) -> BorelSet:
    """The full support of ``base`` as a single half-open interval."""
    return BorelSet.interval(base.support[0], base.support[1])


# ---------------------------------------------------------------------------
# Realizations
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class DpSample:
    """One truncated realization: sorted atoms, positive weights, and the
    stick mass left ungenerated."""

    atoms: np.ndarray
    weights: np.ndarray
    truncation_remainder: float
    concentration: float

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if atoms.size == 0 or atoms.size != weights.size:
            raise ParameterError("atoms and weights must be equal-length, non-empty")
        if not np.all(np.isfinite(atoms)):
            raise ParameterError("atoms must be finite")
        if np.any(weights <= 0.0):
            raise ParameterError("weights must be strictly positive")
        rem = float(self.truncation_remainder)
        if not 0.0 <= rem < 1.0:
            raise ParameterError("truncation_remainder must lie in [0, 1)")
        if abs(weights.sum() + rem - 1.0) > 1e-12:
            raise ParameterError("weights plus truncation remainder must sum to 1")
        if not np.isfinite(self.concentration) or self.concentration <= 0:
            raise ParameterError("concentration must be positive")
        min_gap = np.diff(atoms).min() if atoms.size > 1 else np.inf
        if min_gap < 0.0:
            order = np.argsort(atoms, kind="stable")
            atoms, weights = atoms[order], weights[order]
            min_gap = np.diff(atoms).min()
        if min_gap == 0.0:
            # Ties have probability zero under a continuous base but can occur
            # in floating point; merge them by adding weights.
            uniq, inverse = np.unique(atoms, return_inverse=True)
            merged = np.zeros(uniq.size)
            np.add.at(merged, inverse, weights)
            atoms, weights = uniq, merged
        self.atoms = atoms
        self.weights = weights
        self.truncation_remainder = rem
        self.concentration = float(self.concentration)
        self._cum = None

    def cumulative_weights(self) -> np.ndarray:
        if self._cum is None:
            self._cum = np.cumsum(self.weights)
        return self._cum

    @property
    def n_atoms(self) -> int:
        return self.atoms.size


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule for stick-breaking: stop once the remaining stick mass
    drops below ``epsilon``, or after ``max_atoms`` sticks, whichever is first.

    The expected remainder after N sticks is (a / (1 + a))^N, so for target
    epsilon roughly a * ln(1/epsilon) sticks are generated.
    """

    epsilon: float = 1e-10
    max_atoms: int | None = None

    def __post_init__(self):
        eps = float(self.epsilon)
        if not np.isfinite(eps) or eps >= 1.0:
            raise TruncationError("epsilon must be a real number below 1")
        if eps <= 0.0 and self.max_atoms is None:
            raise TruncationError("epsilon <= 0 requires max_atoms to be set")
        if self.max_atoms is not None and int(self.max_atoms) < 1:
            raise TruncationError("max_atoms must be at least 1")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(
            self, "max_atoms", None if self.max_atoms is None else int(self.max_atoms)
        )


def stick_breaking_sample(
    a: float,
    base: BaseMeasure,
    trunc: TruncationPolicy,
    rng: RngStream,
) -> DpSample:
    """One truncated stick-breaking realization of DP(a, H).

    Sticks V_j ~ Beta(1, a) are drawn by exact inversion, V = 1 - U^(1/a)
    (U and 1-U are both uniform), so the running remainder is tracked in log
    space without cancellation: log of the mass left after stick j is
    cumsum(log U)/a, and the stick weights are its telescoped differences.
    Atoms are i.i.d. from the base via its quantile; since atom order is
    exchangeable and independent of the weights, atoms are generated
    pre-sorted and the weight vector is attached through a uniformly random
    permutation.

    Draw order per stream: stick uniforms (in blocks), atom uniforms, pairing
    permutation.
    """
    if not np.isfinite(a) or a <= 0:
        raise ParameterError("concentration a must be positive")
    if not isinstance(trunc, TruncationPolicy):
        raise TruncationError("trunc must be a TruncationPolicy")

    # log of remaining mass must fall below this to stop on epsilon
    log_target = a * np.log(trunc.epsilon) if trunc.epsilon > 0 else -np.inf
    cap = trunc.max_atoms

    if trunc.epsilon > 0:
        block = int(a * np.log(1.0 / trunc.epsilon) * 1.04) + 64
    else:
        block = 256
    if cap is not None:
        block = min(block, cap)

    log_stick_chunks: list[np.ndarray] = []
    carry = 0.0
    count = 0
    stop_total = None
    while True:
        with np.errstate(divide="ignore"):  # U == 0 has probability 2^-53
            log_q = np.log(np.atleast_1d(rng.uniform(block)))  # log(1 - V_j)
        cs = carry + np.cumsum(log_q)
        hit = np.searchsorted(-cs, -log_target, side="left")
        if hit < cs.size:
            log_stick_chunks.append(log_q[: hit + 1])
            stop_total = count + hit + 1
            break
        log_stick_chunks.append(log_q)
        count += log_q.size
        carry = cs[-1]
        if cap is not None and count >= cap:
            stop_total = cap
            break
        block = max(block // 2, 256)
        if cap is not None:
            block = min(block, cap - count)

    log_q = np.concatenate(log_stick_chunks)[:stop_total]
    if cap is not None and log_q.size > cap:
        log_q = log_q[:cap]
    n = log_q.size
    # remaining mass after each stick; weights telescope: w_j = R_{j-1} - R_j
    remaining = np.exp(np.cumsum(log_q) / a)
    weights = np.empty(n)
    weights[0] = 1.0 - remaining[0]
    np.subtract(remaining[:-1], remaining[1:], out=weights[1:])
    remainder = float(remaining[-1])

    atoms_u = np.sort(np.atleast_1d(rng.uniform(n)))
    atoms = np.asarray(base.quantile(np.clip(atoms_u, _U_LO, _U_HI)), dtype=float)
    weights = weights[rng.permutation(n)]
    if weights.min() <= 0.0:
        keep = weights > 0.0
        atoms, weights = atoms[keep], weights[keep]
    return DpSample(atoms, weights, remainder, a)


def dp_cdf(sample: DpSample, t):
    """P_a((-inf, t]) for the realization: total weight of atoms <= t.

    The truncation remainder is excluded, a documented downward bias of at
    most the policy's epsilon; this keeps the cdf monotone.
    """
    cum = sample.cumulative_weights()
    idx = np.searchsorted(sample.atoms, t, side="right")
    padded = np.concatenate(([0.0], cum))
    out = padded[idx]
    return float(out) if np.isscalar(t) else out


def dp_quantile(sample: DpSample, u):
    """Generalized inverse: the smallest atom whose cumulative weight >= u.

    For u inside the truncated top mass (u > 1 - remainder) the largest atom
    is returned, matching inf over the generated support.
    """
    uarr = np.asarray(u, dtype=float)
    if np.any(uarr <= 0.0) or np.any(uarr > 1.0):
        raise ArgumentError("quantile levels must lie in (0, 1]")
    cum = sample.cumulative_weights()
    idx = np.searchsorted(cum, uarr, side="left")
    idx = np.minimum(idx, sample.n_atoms - 1)
    out = sample.atoms[idx]
    return float(out) if np.isscalar(u) else out


def sample_fidi(
    a: float,
    base: MeasureLike,
    partition: list[BorelSet],
    rng: RngStream,
    size: int | None = None,
):
    """Ferguson marginals: one draw of (P_a(A_1), ..., P_a(A_k)) over a
    partition, distributed Dirichlet(a*H(A_1), ..., a*H(A_k)).

    Cells with H(A_j) = 0 receive exactly zero mass.  Returns shape (k,), or
    (size, k) when ``size`` is given.
    """
    if not np.isfinite(a) or a <= 0:
        raise ParameterError("concentration a must be positive")
    measures = np.array([base.measure(cell) for cell in partition], dtype=float)
    validate_partition(partition, measures)
    return _fidi_from_measures(a, measures, rng, size)


def validate_partition(partition: list[BorelSet], measures: np.ndarray) -> None:
    """Check cells are pairwise disjoint with measures summing to one."""
    if len(partition) == 0:
        raise PartitionError("partition must contain at least one cell")
    for i in range(len(partition)):
        for j in range(i + 1, len(partition)):
            if not partition[i].intersect(partition[j]).is_empty:
                raise PartitionError(f"cells {i} and {j} overlap")
    if np.any(measures < -1e-12):
        raise PartitionError("a cell has negative measure")
    if abs(measures.sum() - 1.0) > 1e-9:
        raise PartitionError(
            f"cell measures sum to {measures.sum():.12g}, expected 1 within 1e-9"
        )


def _fidi_from_measures(a, measures, rng, size=None):
    """Dirichlet draw over precomputed cell measures (zero cells stay zero)."""
    n = 1 if size is None else int(size)
    k = measures.size
    out = np.zeros((n, k))
    positive = np.flatnonzero(measures > 0.0)
    if positive.size == 1:
        out[:, positive[0]] = 1.0
    else:
        params = DirichletParams(tuple(a * measures[positive]))
        out[:, positive] = sample_dirichlet(params, rng, size=n)
    return out[0] if size is None else out


# ---------------------------------------------------------------------------
# Conjugacy
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PosteriorParams:
    """Posterior law DP(a + n, H*) where H* mixes the prior base with the
    empirical measure of the data: H*(t) = (a*H(t) + #{X_k <= t}) / (a + n).
    """

    a_star: float
    prior_concentration: float
    base: BaseMeasure
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.sort(np.asarray(self.data, dtype=float).ravel())
        if data.size and not np.all(np.isfinite(data)):
            raise ParameterError("posterior data must be finite")
        object.__setattr__(self, "data", data)
        if self.a_star != self.prior_concentration + data.size:
            raise ParameterError("a_star must equal a + n exactly")

    @property
    def n(self) -> int:
        return self.data.size

    def cdf(self, t):
        counts = np.searchsorted(self.data, t, side="right")
        out = (self.prior_concentration * self.base.cdf(t) + counts) / self.a_star
        return float(out) if np.isscalar(t) else out

    def measure(self, s: BorelSet) -> float:
        if s.is_empty:
            return 0.0
        total = 0.0
        a = self.prior_concentration
        for lo, hi in s.intervals:
            prior_mass = float(self.base.cdf(hi)) - float(self.base.cdf(lo))
            count = np.searchsorted(self.data, hi, side="right") - np.searchsorted(
                self.data, lo, side="right"
            )
            total += (a * prior_mass + count) / self.a_star
        return total

    def sample_atoms(self, rng: RngStream, size: int) -> np.ndarray:
        """Atoms from H*: with probability a/(a+n) a fresh base draw, else a
        uniformly chosen data point.  Draw order: selector, base uniforms,
        data indices."""
        size = int(size)
        pick_prior = np.atleast_1d(rng.uniform(size)) < self.prior_concentration / self.a_star
        u = np.clip(np.atleast_1d(rng.uniform(size)), _U_LO, _U_HI)
        from_base = np.asarray(self.base.quantile(u), dtype=float)
        if self.n == 0:
            return from_base
        idx = np.atleast_1d(rng.integers(0, self.n, size))
        return np.where(pick_prior, from_base, self.data[idx])


def posterior_update(a: float, base: BaseMeasure, data) -> PosteriorParams:
    """Conjugate update after observing ``data``: DP(a, H) -> DP(a + n, H*)."""
    if not np.isfinite(a) or a <= 0:
        raise ParameterError("concentration a must be positive")
    data = np.asarray(data, dtype=float).ravel()
    return PosteriorParams(a + data.size, float(a), base, data)


# ---------------------------------------------------------------------------
# Closed-form moments
# ---------------------------------------------------------------------------


def dp_moments(a: float, base: MeasureLike, s: BorelSet) -> tuple[float, float]:
    """Exact (mean, variance) of P_a(S): (H(S), H(S)(1 - H(S)) / (1 + a))."""
    if not np.isfinite(a) or a <= 0:
        raise ParameterError("concentration a must be positive")
    m = base.measure(s)
    return m, m * (1.0 - m) / (1.0 + a)


def dp_cross_moment(a: float, base: MeasureLike, s1: BorelSet, s2: BorelSet) -> float:
    """Exact E[P_a(S1) P_a(S2)] = (H(S1 and S2) + a H(S1) H(S2)) / (1 + a).

    For disjoint sets this reduces to a/(1+a) * H(S1) H(S2); the intersection
    term is required whenever the sets overlap.
    """
    if not np.isfinite(a) or a <= 0:
        raise ParameterError("concentration a must be positive")
    m1 = base.measure(s1)
    m2 = base.measure(s2)
    m12 = base.measure(s1.intersect(s2))
    return (m12 + a * m1 * m2) / (1.0 + a)
