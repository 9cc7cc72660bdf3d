"""Limit objects for the large-concentration regime.

Brownian bridge simulation with its covariance, the centered-scaled process
sqrt(a) (P_a - H), the quantile process sqrt(a) (P_a^{-1} - H^{-1}) with its
Gaussian limit covariance, and the exact vs limiting bivariate cell densities
together with their total-variation gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import gammaln

from .dp_core import BaseMeasure, BorelSet, DpSample, MeasureLike, dp_cdf, dp_quantile
from .errors import ArgumentError, ParameterError, SingularDensityError
from .rvgen import RngStream

KIND_SCALED_DP = "scaled-dp"
KIND_QUANTILE = "quantile"
KIND_BRIDGE = "brownian-bridge"
KIND_LIMIT_QUANTILE = "limit-quantile"
_KINDS = (KIND_SCALED_DP, KIND_QUANTILE, KIND_BRIDGE, KIND_LIMIT_QUANTILE)


@dataclass(frozen=True, eq=False)
class Grid:
    """A strictly increasing evaluation grid."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel()
        if pts.size == 0 or not np.all(np.isfinite(pts)):
            raise ParameterError("grid needs at least one finite point")
        if np.any(np.diff(pts) <= 0.0):
            raise ParameterError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.size


@dataclass(frozen=True, eq=False)
class ProcessPath:
    """Values of one stochastic-process realization on a fixed grid."""

    grid: Grid
    values: np.ndarray
    kind: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        if vals.size != len(self.grid):
            raise ParameterError("values and grid lengths differ")
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown path kind {self.kind!r}")
        object.__setattr__(self, "values", vals)


# ---------------------------------------------------------------------------
# Brownian bridge
# ---------------------------------------------------------------------------


def brownian_bridge_paths(grid: Grid, rng: RngStream, n_paths: int) -> np.ndarray:
    """Exact bridge samples on the grid, one row per path.

    Generated left to right through the bridge's Markov conditionals, so the
    joint law at the grid points carries no discretization error; endpoints
    0 and 1 (when present) are exactly zero.
    """
    pts = grid.points
    if pts[0] < 0.0 or pts[-1] > 1.0:
        raise ArgumentError("bridge grid must lie inside [0, 1]")
    out = np.empty((int(n_paths), pts.size))
    b = np.zeros(int(n_paths))
    t_prev = 0.0
    for j, t in enumerate(pts):
        shrink = (1.0 - t) / (1.0 - t_prev) if t < 1.0 else 0.0
        sd = np.sqrt((t - t_prev) * shrink)
        z = np.atleast_1d(rng.normal(int(n_paths)))
        b = b * shrink + sd * z
        out[:, j] = b
        t_prev = t
    return out


def brownian_bridge_path(grid: Grid, rng: RngStream) -> ProcessPath:
    """One Brownian bridge realization on the grid."""
    return ProcessPath(grid, brownian_bridge_paths(grid, rng, 1)[0], KIND_BRIDGE)


def bb_cov(s1: BorelSet, s2: BorelSet, mu: MeasureLike) -> float:
    """Bridge covariance mu(S1 and S2) - mu(S1) mu(S2)."""
    return mu.measure(s1.intersect(s2)) - mu.measure(s1) * mu.measure(s2)


# ---------------------------------------------------------------------------
# Transformed Dirichlet-process paths
# ---------------------------------------------------------------------------


def scaled_process_path(sample: DpSample, base: BaseMeasure, grid: Grid) -> ProcessPath:
    """The centered-scaled process sqrt(a) (P_a(t) - H(t)) on the grid."""
    a = sample.concentration
    values = np.sqrt(a) * (dp_cdf(sample, grid.points) - np.asarray(base.cdf(grid.points)))
    return ProcessPath(grid, values, KIND_SCALED_DP)


def quantile_process_path(sample: DpSample, base: BaseMeasure, ugrid: Grid) -> ProcessPath:
    """The quantile process sqrt(a) (P_a^{-1}(u) - H^{-1}(u)) on a u-grid."""
    u = ugrid.points
    if u[0] <= 0.0 or u[-1] >= 1.0:
        raise ArgumentError("quantile grid must lie strictly inside (0, 1)")
    a = sample.concentration
    values = np.sqrt(a) * (dp_quantile(sample, u) - np.asarray(base.quantile(u)))
    return ProcessPath(ugrid, values, KIND_QUANTILE)


def limit_quantile_cov(u: float, v: float, base: BaseMeasure) -> float:
    """Covariance of the limiting quantile process at levels (u, v):

        (min(u, v) - u v) / (h(H^{-1}(u)) h(H^{-1}(v)))

    where h is the base density.  Raises when h vanishes at either quantile.
    """
    for name, val in (("u", u), ("v", v)):
        if not 0.0 < val < 1.0:
            raise ArgumentError(f"{name} must lie in (0, 1)")
    hu = float(base.density(base.quantile(u)))
    hv = float(base.density(base.quantile(v)))
    if not (np.isfinite(hu) and np.isfinite(hv)) or hu <= 0.0 or hv <= 0.0:
        raise SingularDensityError(
            f"base density vanishes at a requested quantile (h(u)={hu}, h(v)={hv})"
        )
    return (min(u, v) - u * v) / (hu * hv)


# ---------------------------------------------------------------------------
# Bivariate cell densities: exact (finite a) and Gaussian limit
# ---------------------------------------------------------------------------


def _check_cells(l1: float, l2: float) -> tuple[float, float]:
    l1, l2 = float(l1), float(l2)
    if not (0.0 < l1 and 0.0 < l2 and l1 + l2 < 1.0):
        raise ParameterError("cell measures need l1 > 0, l2 > 0, l1 + l2 < 1")
    return l1, l2


@dataclass(frozen=True)
class BivariateGaussianSpec:
    """Covariance of the limiting pair of scaled cell masses.

    Built from two disjoint cell measures (l1, l2):
    sigma11 = l1(1-l1), sigma22 = l2(1-l2),
    rho12 = -sqrt(l1 l2 / ((1-l1)(1-l2))).
    """

    sigma11: float
    sigma22: float
    rho12: float
    covariance_det: float = field(init=False)

    def __post_init__(self):
        if self.sigma11 <= 0 or self.sigma22 <= 0:
            raise ParameterError("variances must be positive")
        if not -1.0 < self.rho12 < 1.0:
            raise ParameterError("correlation must lie in (-1, 1)")
        det = self.sigma11 * self.sigma22 * (1.0 - self.rho12**2)
        object.__setattr__(self, "covariance_det", det)

    @classmethod
    def from_cell_measures(cls, l1: float, l2: float) -> "BivariateGaussianSpec":
        l1, l2 = _check_cells(l1, l2)
        rho = -np.sqrt(l1 * l2 / ((1.0 - l1) * (1.0 - l2)))
        return cls(l1 * (1.0 - l1), l2 * (1.0 - l2), rho)

    @property
    def sigma12(self) -> float:
        return self.rho12 * np.sqrt(self.sigma11 * self.sigma22)


def limit_bivariate_density(y1, y2, spec: BivariateGaussianSpec):
    """Zero-mean bivariate normal density with the spec's covariance."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    z1 = y1 / np.sqrt(spec.sigma11)
    z2 = y2 / np.sqrt(spec.sigma22)
    quad = (z1 * z1 - 2.0 * spec.rho12 * z1 * z2 + z2 * z2) / (1.0 - spec.rho12**2)
    out = np.exp(-0.5 * quad) / (2.0 * np.pi * np.sqrt(spec.covariance_det))
    return float(out) if out.ndim == 0 else out


def scaled_bivariate_density(y1, y2, l1: float, l2: float, a: float):
    """Exact joint density of the scaled masses of two disjoint cells,
    (sqrt(a)(P_a(S1) - l1), sqrt(a)(P_a(S2) - l2)).

    This is the Dirichlet(a l1, a l2, a(1 - l1 - l2)) density pushed through
    the centering-scaling map, evaluated in log space; arguments mapping
    outside the open simplex have density zero.
    """
    l1, l2 = _check_cells(l1, l2)
    if not np.isfinite(a) or a <= 0:
        raise ParameterError("concentration a must be positive")
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    l3 = 1.0 - l1 - l2
    root_a = np.sqrt(a)
    x1 = y1 / root_a + l1
    x2 = y2 / root_a + l2
    x3 = 1.0 - (y1 + y2) / root_a - l1 - l2
    valid = (x1 > 0.0) & (x2 > 0.0) & (x3 > 0.0)
    log_norm = (
        gammaln(a)
        - np.log(a)
        - gammaln(a * l1)
        - gammaln(a * l2)
        - gammaln(a * l3)
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        logf = (
            log_norm
            + (a * l1 - 1.0) * np.log(np.where(valid, x1, 1.0))
            + (a * l2 - 1.0) * np.log(np.where(valid, x2, 1.0))
            + (a * l3 - 1.0) * np.log(np.where(valid, x3, 1.0))
        )
    out = np.exp(np.where(valid, logf, -np.inf))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Tensor-Simpson quadrature with refinement
# ---------------------------------------------------------------------------


class TvEstimate(NamedTuple):
    value: float
    quad_error: float


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive tensor-Simpson settings for the bivariate integrals.

    The grid is refined (n -> 2n - 1 per axis) until the estimate moves by
    less than ``tol``; the last move is reported as the quadrature error.
    """

    half_width: float = 8.0
    n_start: int = 65
    n_max: int = 1025
    tol: float = 1e-4

    def __post_init__(self):
        if self.half_width <= 0:
            raise ParameterError("half_width must be positive")
        for name in ("n_start", "n_max"):
            n = getattr(self, name)
            if n < 3 or n % 2 == 0:
                raise ParameterError(f"{name} must be an odd integer >= 3")
        if self.n_max < self.n_start:
            raise ParameterError("n_max must be >= n_start")
        if self.tol <= 0:
            raise ParameterError("tol must be positive")


def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _refine_simpson_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    xbox: tuple[float, float],
    ybox: tuple[float, float],
    quad: QuadratureSpec,
) -> TvEstimate:
    """Integrate f over the box, doubling resolution until the estimate
    settles within quad.tol (or n_max is reached)."""
    n = quad.n_start
    prev = None
    while True:
        x = np.linspace(xbox[0], xbox[1], n)
        y = np.linspace(ybox[0], ybox[1], n)
        vals = f(x[:, None], y[None, :])
        wx = _simpson_weights(n, x[1] - x[0])
        wy = _simpson_weights(n, y[1] - y[0])
        est = float(wx @ vals @ wy)
        if prev is not None and abs(est - prev) < quad.tol:
            return TvEstimate(est, abs(est - prev))
        if 2 * n - 1 > quad.n_max:
            return TvEstimate(est, abs(est - prev) if prev is not None else quad.tol)
        prev = est
        n = 2 * n - 1


def _support_box(l1: float, l2: float, a: float, half_width: float):
    root_a = np.sqrt(a)
    xbox = (max(-root_a * l1, -half_width), min(root_a * (1.0 - l1), half_width))
    ybox = (max(-root_a * l2, -half_width), min(root_a * (1.0 - l2), half_width))
    return xbox, ybox


def tv_distance_bivariate(
    l1: float,
    l2: float,
    a: float,
    quad: QuadratureSpec | None = None,
) -> TvEstimate:
    """Total-variation distance between the exact scaled cell-mass density at
    concentration ``a`` and its Gaussian limit: half the L1 gap by quadrature.

    Returns the estimate together with the refinement-based error bound.
    """
    quad = quad or QuadratureSpec()
    l1, l2 = _check_cells(l1, l2)
    spec = BivariateGaussianSpec.from_cell_measures(l1, l2)
    xbox, ybox = _support_box(l1, l2, a, quad.half_width)

    def gap(x, y):
        return np.abs(
            scaled_bivariate_density(x, y, l1, l2, a) - limit_bivariate_density(x, y, spec)
        )

    est = _refine_simpson_2d(gap, xbox, ybox, quad)
    # |f - g| integrates to at most 2, so TV cannot exceed 1 beyond
    # quadrature noise; clip the noise.
    return TvEstimate(min(0.5 * est.value, 1.0), 0.5 * est.quad_error)


def bivariate_density_integral(
    l1: float,
    l2: float,
    a: float,
    quad: QuadratureSpec | None = None,
) -> TvEstimate:
    """Quadrature of the exact scaled density over its (boxed) support;
    should be 1 up to quadrature error plus truncated tail mass."""
    quad = quad or QuadratureSpec()
    l1, l2 = _check_cells(l1, l2)
    xbox, ybox = _support_box(l1, l2, a, quad.half_width)
    return _refine_simpson_2d(
        lambda x, y: scaled_bivariate_density(x, y, l1, l2, a), xbox, ybox, quad
    )
