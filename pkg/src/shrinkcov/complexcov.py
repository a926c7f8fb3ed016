"""Complex covariance shrinkage through the real/imaginary stacking.

A complex snapshot ``x`` of length ``p`` is represented by the real vector
``(Re x; Im x)`` of length ``2p``; the real estimators run on that, and the
``2p x 2p`` result is folded back into a ``p x p`` Hermitian matrix via
``(S_rr + S_ii) + j (S_ir - S_ri)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .estimators import Method, SampleSet, estimate


@dataclass(frozen=True)
class ComplexSampleSet:
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise InvalidInputError(f"expected a non-empty p x n matrix, got shape {data.shape}")
        data = data.astype(complex)
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("snapshots contain non-finite entries")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class HermitianEstimate:
    sigma_hat: np.ndarray
    rho: float
    method: Method


def stack_real(x: ComplexSampleSet) -> SampleSet:
    return SampleSet(np.vstack([x.data.real, x.data.imag]))


def unstack_cov(sigma_s: np.ndarray) -> np.ndarray:
    sigma_s = np.asarray(sigma_s, dtype=float)
    m = sigma_s.shape[0]
    if sigma_s.ndim != 2 or m != sigma_s.shape[1] or m % 2:
        raise InvalidInputError(f"expected a 2p x 2p matrix, got shape {sigma_s.shape}")
    scale = max(float(np.abs(sigma_s).max()), 1.0)
    if not np.allclose(sigma_s, sigma_s.T, rtol=0, atol=1e-12 * scale):
        raise InvalidInputError("stacked covariance must be symmetric")
    p = m // 2
    rr, ri = sigma_s[:p, :p], sigma_s[:p, p:]
    ir, ii = sigma_s[p:, :p], sigma_s[p:, p:]
    c = (rr + ii) + 1j * (ir - ri)
    return 0.5 * (c + c.conj().T)


def estimate_complex(
    x: ComplexSampleSet,
    method: Method | str,
    dim: int | None = None,
) -> HermitianEstimate:
    """Shrinkage estimate of the covariance of complex snapshots.

    The real estimator sees the stacked ``2p``-dimensional problem; ``dim``
    overrides the dimension used inside the coefficient formula (default
    ``2p``).
    """
    method = Method(method)
    if method is Method.ORACLE:
        raise InvalidInputError("the oracle rule is not defined for stacked complex data")
    est = estimate(stack_real(x), method, dim=dim)
    return HermitianEstimate(unstack_cov(est.sigma_hat), est.rho, method)
