"""Shrinkage covariance estimators toward the scaled identity.

Every estimator here has the form

    sigma_hat = (1 - rho) * S + rho * (Tr(S) / p) * I

where ``S`` is the zero-mean sample covariance and only the rule for ``rho``
changes between methods: the clairvoyant oracle (needs the true covariance),
Ledoit-Wolf (LW), Rao-Blackwellized Ledoit-Wolf (RBLW) and the
oracle-approximating shrinkage (OAS) limit.

The coefficient rules come in two flavours:

* ``*_from_traces`` functions work on ``Tr(S)``, ``Tr(S^2)`` (scalars or
  arrays), which is what the Monte Carlo harness vectorizes over;
* the ``lw_rho`` / ``rblw_rho`` / ``oas_rho`` wrappers take a
  :class:`ShrinkageStatistics` computed once per sample covariance.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSampleError,
    InvalidInputError,
    MissingParameterError,
    NonConvergenceError,
)

# Tr(S^2) - Tr(S)^2/p <= SPHERICITY_RTOL * Tr(S)^2 counts as S = c*I.
SPHERICITY_RTOL = 1e-12


class Method(str, enum.Enum):
    SAMPLE = "sample"
    ORACLE = "oracle"
    LW = "lw"
    RBLW = "rblw"
    OAS = "oas"

    def __str__(self) -> str:
        return self.value


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SampleSet:
    """``p x n`` real observations, one observation per column."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise InvalidInputError(f"expected a non-empty p x n matrix, got shape {data.shape}")
        if np.iscomplexobj(data):
            raise InvalidInputError("SampleSet is real-valued; use complexcov for complex snapshots")
        data = data.astype(float, copy=False)
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("sample contains non-finite entries")
        object.__setattr__(self, "data", _readonly(data))

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class SampleCov:
    s: np.ndarray
    n: int

    @property
    def p(self) -> int:
        return self.s.shape[0]


def sample_covariance(x: SampleSet) -> SampleCov:
    """Zero-mean sample covariance ``(1/n) X X^T``, symmetrized."""
    X = x.data
    m = X @ X.T / x.n
    return SampleCov(_readonly(0.5 * (m + m.T)), x.n)


def shrinkage_target(s: SampleCov) -> np.ndarray:
    """The scaled identity ``(Tr(S)/p) I``."""
    return np.trace(s.s) / s.p * np.eye(s.p)


@dataclass(frozen=True)
class ShrinkageStatistics:
    """Scalar summaries of a sample covariance shared by all coefficient rules.

    ``phi`` is a normalized dispersion in ``[0, 1)`` and ``u`` the sphericity
    statistic; both vanish exactly when ``S`` is a multiple of the identity.
    """

    tr_s: float
    tr_s2: float
    p: int
    n: int
    phi: float = field(init=False)
    u: float = field(init=False)

    def __post_init__(self):
        if self.p < 2:
            raise DegenerateSampleError("dimension p=1: shrinkage toward (Tr/p)I is the identity map")
        if self.n < 1:
            raise InvalidInputError(f"sample count must be positive, got {self.n}")
        if not self.tr_s > 0:
            raise DegenerateSampleError("sample covariance has zero trace (all-zero sample)")
        spread = max(self.tr_s2 - self.tr_s**2 / self.p, 0.0)
        object.__setattr__(self, "phi", spread / (self.tr_s2 + self.tr_s**2))
        object.__setattr__(self, "u", max((self.p * self.tr_s2 / self.tr_s**2 - 1.0) / (self.p - 1), 0.0))

    @property
    def spherical(self) -> bool:
        return bool(_spherical(self.tr_s, self.tr_s2, self.p))


def statistics(s: SampleCov, p: int | None = None, n: int | None = None) -> ShrinkageStatistics:
    """Compute the trace summaries of ``s``.

    ``p`` and ``n`` default to the shape and sample count of ``s``; passing
    ``p`` explicitly overrides the dimension used in the coefficient formulas.
    """
    tr_s = float(np.trace(s.s))
    tr_s2 = float(np.sum(s.s * s.s))
    return ShrinkageStatistics(tr_s, tr_s2, s.p if p is None else p, s.n if n is None else n)


def _spherical(tr_s, tr_s2, p):
    return tr_s2 - tr_s**2 / p <= SPHERICITY_RTOL * tr_s**2


def _ratio_or_one(num, den, spherical):
    num, den, spherical = np.broadcast_arrays(num, den, spherical)
    safe = np.where(spherical, 1.0, den)
    out = np.where(spherical, 1.0, num / safe)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Coefficient rules in trace form (scalar or array inputs)


def lw_from_traces(tr_s, tr_s2, sum_norm4, p: int, n: int):
    """Unclamped LW coefficient.

    Uses ``sum_i ||x_i x_i^T - S||_F^2 = sum_i ||x_i||^4 - n Tr(S^2)``, which
    holds because ``sum_i x_i x_i^T = n S``.
    """
    num = np.maximum(sum_norm4 - n * tr_s2, 0.0)
    den = n**2 * (tr_s2 - tr_s**2 / p)
    return _ratio_or_one(num, den, _spherical(tr_s, tr_s2, p))


def rblw_from_traces(tr_s, tr_s2, p: int, n: int):
    num = (n - 2) / n * tr_s2 + tr_s**2
    den = (n + 2) * (tr_s2 - tr_s**2 / p)
    return _ratio_or_one(num, den, _spherical(tr_s, tr_s2, p))


def oas_from_traces(tr_s, tr_s2, p: int, n: int):
    """Unclamped OAS ratio; apply ``min(., 1)`` for the estimator."""
    num = (1 - 2 / p) * tr_s2 + tr_s**2
    den = (n + 1 - 2 / p) * (tr_s2 - tr_s**2 / p)
    return _ratio_or_one(num, den, _spherical(tr_s, tr_s2, p))


def clamp_unit(rho):
    # Lower clip only absorbs rounding: every rule here is >= 0 in exact arithmetic.
    out = np.clip(rho, 0.0, 1.0)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# Coefficient rules on samples / statistics


def oracle_rho(sigma: np.ndarray, n: int) -> float:
    """MSE-optimal coefficient given the true covariance ``sigma`` (Gaussian data)."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InvalidInputError(f"sigma must be square, got shape {sigma.shape}")
    if n < 1:
        raise InvalidInputError(f"sample count must be positive, got {n}")
    p = sigma.shape[0]
    tr = float(np.trace(sigma))
    if not tr > 0:
        raise DegenerateSampleError("true covariance has zero trace")
    tr2 = float(np.sum(sigma * sigma))
    num = (1 - 2 / p) * tr2 + tr**2
    den = (n + 1 - 2 / p) * tr2 + (1 - n / p) * tr**2
    # den = num + n (Tr(S^2) - Tr(S)^2/p) >= num > 0 for PSD sigma
    assert den >= num * (1 - 1e-12) and den > 0, "oracle denominator must dominate numerator"
    return num / den


def lw_rho(x: SampleSet, s: SampleCov | None = None, stats: ShrinkageStatistics | None = None) -> float:
    """Unclamped Ledoit-Wolf coefficient; 1.0 when ``S`` is numerically spherical."""
    if s is None:
        s = sample_covariance(x)
    if stats is None:
        stats = statistics(s)
    sum_norm4 = float(np.sum(np.sum(x.data**2, axis=0) ** 2))
    return lw_from_traces(stats.tr_s, stats.tr_s2, sum_norm4, stats.p, stats.n)


def lw_rho_star(x: SampleSet, s: SampleCov | None = None, stats: ShrinkageStatistics | None = None) -> float:
    return clamp_unit(lw_rho(x, s, stats))


def rblw_rho(stats: ShrinkageStatistics) -> float:
    """Unclamped RBLW coefficient (conditional expectation of LW given ``S``)."""
    return rblw_from_traces(stats.tr_s, stats.tr_s2, stats.p, stats.n)


def rblw_rho_star(stats: ShrinkageStatistics) -> float:
    return clamp_unit(rblw_rho(stats))


def oas_rho(stats: ShrinkageStatistics) -> float:
    """OAS coefficient, always in ``(0, 1]``."""
    return clamp_unit(oas_from_traces(stats.tr_s, stats.tr_s2, stats.p, stats.n))


@dataclass(frozen=True)
class OasIteration:
    """Iterates of the oracle re-substitution map.

    Only the coefficients are stored; :meth:`sigma` builds the matching
    covariance iterate on request.
    """

    rhos: np.ndarray
    converged: bool

    @property
    def limit(self) -> float:
        return float(self.rhos[-1])

    @property
    def iterations(self) -> int:
        return len(self.rhos) - 1

    def sigma(self, s: SampleCov, j: int = -1) -> np.ndarray:
        return shrink(s, float(self.rhos[j]))


def oas_iterate(
    stats: ShrinkageStatistics,
    rho0: float = 0.5,
    max_iter: int = 10_000,
    tol: float = 1e-12,
) -> OasIteration:
    """Iterate ``rho_{j+1} = oracle(Sigma_j)`` from ``rho0`` until it settles.

    With ``Sigma_j = (1-rho_j) S + rho_j F`` the oracle formula only needs
    ``Tr(Sigma_j) = Tr(S)`` and ``Tr(Sigma_j S) = Tr(S^2) - rho_j (Tr(S^2) - Tr(S)^2/p)``,
    so the update is a linear-fractional map of ``rho`` alone. That map
    fixes ``rho = 1``, hence in ``u = 1 / (1 - rho)`` it is affine,
    ``u' = mu u + nu``, which is what is iterated here: each step is O(1),
    no p x p iterate is formed, and there is no rounding stall near 1.
    The limit is the unclamped OAS ratio when ``mu < 1`` and 1 otherwise.

    ``rho0 = 1`` is itself a fixed point, so a start there stays there;
    any ``rho0 < 1`` reaches the closed form.

    Iteration stops once the last step in ``rho`` is below ``tol`` and the
    remaining geometric tail ``step * f' / (1 - f')``, with ``f'`` the exact
    slope of the map at the new iterate, is below ``tol`` as well.

    Raises :class:`NonConvergenceError` if ``max_iter`` is exhausted, which
    indicates a bug rather than a hard input.
    """
    if not 0.0 <= rho0 <= 1.0:
        raise InvalidInputError(f"rho0 must lie in [0, 1], got {rho0}")
    p, n = stats.p, stats.n
    a2 = stats.tr_s**2
    spread = max(stats.tr_s2 - a2 / p, 0.0)
    if rho0 == 1.0 or spread == 0.0:
        # exact fixed point, or a constant map onto 1
        return OasIteration(np.array([float(rho0), 1.0]), True)
    mu = (1 + 1 / p - 2 / p**2) * a2 / (n * spread)
    nu = (n + 1 - 2 / p) / n
    u = 1.0 / (1.0 - rho0)
    rhos = [float(rho0)]
    for _ in range(max_iter):
        u_prev, u = u, mu * u + nu
        nxt = 1.0 - 1.0 / u
        step = abs(nxt - rhos[-1])
        rhos.append(nxt)
        # d rho'/d rho = mu (1 - rho')^2 / (1 - rho)^2
        slope = mu * (u_prev / u) ** 2
        if step < tol and slope < 1 and step * slope / (1 - slope) < tol:
            return OasIteration(np.array(rhos), True)
    raise NonConvergenceError(
        f"OAS iteration did not reach tol={tol} in {max_iter} steps (phi={stats.phi}, n={n}, p={p})"
    )


# ---------------------------------------------------------------------------
# Unified parameterization


@dataclass(frozen=True)
class RhoParams:
    """Constants of the common form ``min(alpha + beta / U, 1)``."""

    alpha: float
    beta: float

    @classmethod
    def oas(cls, n: int, p: int) -> RhoParams:
        # obtained by writing Tr(S^2)/Tr(S)^2 = ((p-1) U + 1) / p in the OAS ratio
        d = p * (n + 1) - 2
        return cls((p - 2) / d, (p + 2) / d)

    @classmethod
    def rblw(cls, n: int, p: int) -> RhoParams:
        d = n * (n + 2)
        return cls((n - 2) / d, ((p + 1) * n - 2) / (d * (p - 1)))


def rho_param(params: RhoParams, u: float, clamp: bool = True) -> float:
    if u < 0:
        raise InvalidInputError(f"sphericity statistic must be non-negative, got {u}")
    if u == 0:
        return 1.0
    rho = params.alpha + params.beta / u
    return min(rho, 1.0) if clamp else rho


# ---------------------------------------------------------------------------
# Full estimators


@dataclass(frozen=True)
class CovEstimate:
    sigma_hat: np.ndarray
    rho: float
    method: Method
    degenerate: bool = False


def shrink(s: SampleCov, rho: float) -> np.ndarray:
    """``(1 - rho) S + rho (Tr(S)/p) I``."""
    out = (1.0 - rho) * s.s
    out[np.diag_indices(s.p)] += rho * np.trace(s.s) / s.p
    return out


def estimate(
    x: SampleSet,
    method: Method | str,
    sigma: np.ndarray | None = None,
    dim: int | None = None,
) -> CovEstimate:
    """Shrinkage covariance estimate of ``x`` with the given coefficient rule.

    Parameters
    ----------
    x : SampleSet
        Zero-mean observations.
    method : Method or str
        One of ``sample``, ``oracle``, ``lw``, ``rblw``, ``oas``.
    sigma : ndarray, optional
        True covariance; required for ``oracle``.
    dim : int, optional
        Dimension plugged into the coefficient formulas instead of ``x.p``.
        Only used for sensitivity studies of the complex stacking.
    """
    method = Method(method)
    s = sample_covariance(x)
    if method is Method.SAMPLE:
        return CovEstimate(s.s.copy(), 0.0, method)
    if method is Method.ORACLE:
        if sigma is None:
            raise MissingParameterError("the oracle estimator needs the true covariance `sigma`")
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != (x.p, x.p):
            raise InvalidInputError(f"sigma has shape {sigma.shape}, expected {(x.p, x.p)}")
        rho = oracle_rho(sigma, x.n)
        return CovEstimate(shrink(s, rho), rho, method)
    stats = statistics(s, p=dim)
    if method is Method.LW:
        rho = lw_rho_star(x, s, stats)
    elif method is Method.RBLW:
        rho = rblw_rho_star(stats)
    else:
        rho = oas_rho(stats)
    return CovEstimate(shrink(s, rho), rho, method, stats.spherical)
