"""True-covariance families and a seeded Gaussian sampler."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, InvalidParameterError
from .estimators import SampleSet

# Eigenvalues in [-PSD_RTOL * lambda_max, 0] are treated as rounding noise.
PSD_RTOL = 1e-10


def ar1_cov(p: int, r: float) -> np.ndarray:
    """Toeplitz covariance ``r^|i-j|`` of a unit-variance AR(1) process."""
    if p < 1:
        raise InvalidParameterError(f"p must be positive, got {p}")
    if not abs(r) < 1:
        raise InvalidParameterError(f"AR(1) coefficient must satisfy |r| < 1, got {r}")
    lag = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    return np.power(float(r), lag)


def fbm_cov(p: int, H: float) -> np.ndarray:
    """Covariance of unit-step fractional Brownian motion increments.

    ``0.5 * ((d+1)^2H - 2 d^2H + |d-1|^2H)`` at lag ``d``; the absolute value
    makes the diagonal equal to 1.
    """
    if p < 1:
        raise InvalidParameterError(f"p must be positive, got {p}")
    if not 0.5 <= H <= 1.0:
        raise InvalidParameterError(f"Hurst exponent must lie in [0.5, 1], got {H}")
    d = np.abs(np.subtract.outer(np.arange(p), np.arange(p))).astype(float)
    h2 = 2.0 * H
    return 0.5 * ((d + 1) ** h2 - 2 * d**h2 + np.abs(d - 1) ** h2)


class ModelKind(str, enum.Enum):
    AR1 = "ar1"
    FBM = "fbm"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class CovModel:
    kind: ModelKind
    p: int
    param: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def ar1(cls, p: int, r: float) -> CovModel:
        ar1_cov(1, r)
        return cls(ModelKind.AR1, p, float(r))

    @classmethod
    def fbm(cls, p: int, H: float) -> CovModel:
        fbm_cov(1, H)
        return cls(ModelKind.FBM, p, float(H))

    @classmethod
    def explicit(cls, sigma) -> CovModel:
        sigma = np.array(sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise InvalidInputError(f"covariance must be square, got shape {sigma.shape}")
        if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12 * max(np.abs(sigma).max(), 1.0)):
            raise InvalidInputError("covariance must be symmetric")
        sigma.setflags(write=False)
        return cls(ModelKind.EXPLICIT, sigma.shape[0], None, sigma)

    def covariance(self) -> np.ndarray:
        if self.kind is ModelKind.AR1:
            return ar1_cov(self.p, self.param)
        if self.kind is ModelKind.FBM:
            return fbm_cov(self.p, self.param)
        return np.array(self.matrix)

    def describe(self) -> str:
        if self.kind is ModelKind.AR1:
            return f"AR(1) r={self.param:g}, p={self.p}"
        if self.kind is ModelKind.FBM:
            return f"FBM increments H={self.param:g}, p={self.p}"
        return f"explicit covariance, p={self.p}"


def psd_factor(sigma: np.ndarray) -> np.ndarray:
    """Return ``L`` with ``L @ L.T == sigma``.

    Tries Cholesky first and falls back to a clipped eigendecomposition for
    semi-definite matrices (e.g. FBM increments with H close to 1).
    """
    sigma = np.asarray(sigma, dtype=float)
    try:
        return scipy.linalg.cholesky(sigma, lower=True)
    except np.linalg.LinAlgError:
        pass
    w, v = np.linalg.eigh(0.5 * (sigma + sigma.T))
    floor = -PSD_RTOL * max(w.max(), 0.0)
    if w.min() < floor:
        raise InvalidInputError(f"covariance is not PSD (smallest eigenvalue {w.min():.3e})")
    return v * np.sqrt(np.clip(w, 0.0, None))


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Independent PCG64 stream determined by ``seed`` and the integer ``keys``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class GaussianSampler:
    """Zero-mean Gaussian vectors with covariance ``sigma``.

    Each call to :func:`sample` draws from a stream keyed by ``(seed, *keys)``,
    so trials can be generated in any order or process and still match.
    """

    sigma: np.ndarray
    seed: int = 0
    factor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sigma = np.array(self.sigma, dtype=float)
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        factor = psd_factor(sigma)
        factor.setflags(write=False)
        object.__setattr__(self, "factor", factor)

    @property
    def p(self) -> int:
        return self.sigma.shape[0]

    def draw(self, n: int, *keys: int) -> np.ndarray:
        if n < 1:
            raise InvalidParameterError(f"sample count must be positive, got {n}")
        g = rng_for(self.seed, *keys).standard_normal((self.p, n))
        return self.factor @ g


def sample(sampler: GaussianSampler, n: int, *keys: int) -> SampleSet:
    """``n`` observations ``X = L G`` with ``G`` standard normal from the keyed stream."""
    return SampleSet(sampler.draw(n, *keys))
