"""Uniform linear array scenario, Capon (MVDR) weights and output SINR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, InvalidParameterError, SingularMatrixError


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def omega_from_doa(theta_deg: float) -> float:
    """Spatial frequency of a plane wave at ``theta_deg`` for half-wavelength spacing."""
    return float(np.pi * np.sin(np.deg2rad(theta_deg)))


def array_response(p: int, omega: float) -> np.ndarray:
    """Steering vector ``[1, e^{-j w}, ..., e^{-j (p-1) w}]``."""
    return np.exp(-1j * omega * np.arange(p))


@dataclass(frozen=True)
class Source:
    omega: float
    power: float


@dataclass(frozen=True)
class UlaScenario:
    p: int
    sources: tuple[Source, ...]
    noise_power: float = 1.0
    signal_index: int = 0

    def __post_init__(self):
        if self.p < 1:
            raise InvalidParameterError(f"sensor count must be positive, got {self.p}")
        object.__setattr__(self, "sources", tuple(self.sources))
        if any(not s.power > 0 for s in self.sources) or not self.noise_power > 0:
            raise InvalidParameterError("source and noise powers must be positive")
        if self.sources and not 0 <= self.signal_index < len(self.sources):
            raise InvalidParameterError(f"signal_index {self.signal_index} out of range")

    @classmethod
    def default(
        cls,
        p: int = 10,
        theta_s: float = 20.0,
        theta_i1: float = -30.0,
        gamma: float = 0.9,
        snr_db: float = 10.0,
        inr_db: float = 15.0,
    ) -> UlaScenario:
        """Signal of interest plus two interferers, one a fraction ``gamma``
        of a beamwidth away from the signal. Powers are relative to unit noise."""
        w_s = omega_from_doa(theta_s)
        sources = (
            Source(w_s, db_to_linear(snr_db)),
            Source(omega_from_doa(theta_i1), db_to_linear(inr_db)),
            Source(w_s + 2 * np.pi * gamma / p, db_to_linear(inr_db)),
        )
        return cls(p, sources, 1.0, 0)

    @property
    def signal(self) -> Source:
        return self.sources[self.signal_index]

    @property
    def steering(self) -> np.ndarray:
        return array_response(self.p, self.signal.omega)

    def snapshots(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``p x n`` snapshots: independent circular Gaussian sources plus white noise."""
        k = len(self.sources)
        A = np.stack([array_response(self.p, s.omega) for s in self.sources], axis=1) if k else None
        amp = np.sqrt([s.power for s in self.sources])[:, None]
        g = rng.standard_normal((2, k + self.p, n))
        z = (g[0] + 1j * g[1]) / np.sqrt(2)
        x = np.sqrt(self.noise_power) * z[k:]
        if k:
            x = x + A @ (amp * z[:k])
        return x


def true_cov(scenario: UlaScenario) -> np.ndarray:
    sigma = scenario.noise_power * np.eye(scenario.p, dtype=complex)
    for s in scenario.sources:
        a = array_response(scenario.p, s.omega)
        sigma += s.power * np.outer(a, a.conj())
    return 0.5 * (sigma + sigma.conj().T)


@dataclass(frozen=True)
class BeamWeights:
    w: np.ndarray
    constraint_gain: complex


def capon_weights(sigma: np.ndarray, a_s: np.ndarray, estimator: str | None = None) -> BeamWeights:
    """MVDR weights ``Sigma^{-1} a / (a^H Sigma^{-1} a)`` via a Cholesky solve."""
    sigma = np.asarray(sigma)
    a_s = np.asarray(a_s, dtype=complex)
    if sigma.shape != (a_s.size, a_s.size):
        raise InvalidInputError(f"covariance shape {sigma.shape} does not match steering length {a_s.size}")
    try:
        cf = scipy.linalg.cho_factor(sigma, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("covariance estimate is not positive definite", estimator) from exc
    v = scipy.linalg.cho_solve(cf, a_s)
    denom = np.vdot(a_s, v)
    if not np.isfinite(denom) or denom.real <= 0:
        raise SingularMatrixError("covariance estimate is numerically singular", estimator)
    w = v / denom
    return BeamWeights(w, complex(np.vdot(w, a_s)))


def sinr(w: BeamWeights | np.ndarray, scenario: UlaScenario, sigma: np.ndarray | None = None) -> float:
    """Linear output SINR of ``w`` against the true scenario covariance."""
    w = w.w if isinstance(w, BeamWeights) else np.asarray(w)
    if sigma is None:
        sigma = true_cov(scenario)
    a = scenario.steering
    ps = scenario.signal.power
    signal = ps * abs(np.vdot(w, a)) ** 2
    interference = sigma - ps * np.outer(a, a.conj())
    denom = np.vdot(w, interference @ w).real
    assert denom > 0, "interference-plus-noise power must be positive for PD noise"
    return float(signal / denom)
