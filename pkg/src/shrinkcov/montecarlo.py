"""Monte Carlo experiment runners and moment-identity checks.

Trial ``k`` at grid position ``i`` always draws from the stream
``rng_for(seed, i, k)``; trials are processed in fixed-size chunks and
reduced in trial order, so results do not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .beamform import UlaScenario, capon_weights, sinr, true_cov
from .complexcov import unstack_cov
from .errors import InvalidParameterError, ShrinkageError, SingularMatrixError
from .estimators import (
    Method,
    clamp_unit,
    lw_from_traces,
    oas_from_traces,
    oracle_rho,
    rblw_from_traces,
)
from .models import CovModel, GaussianSampler, psd_factor, rng_for

log = logging.getLogger(__name__)

CHUNK = 250
Z95 = 1.96
CLAIRVOYANT = "clairvoyant"
MAX_EXCLUDED_FRACTION = 1e-3


def mse_frobenius(estimate: np.ndarray, truth: np.ndarray) -> float:
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape:
        raise ValueError(f"shape mismatch: {estimate.shape} vs {truth.shape}")
    d = estimate - truth
    return float(np.sum(np.abs(d) ** 2))


def ci95_halfwidth(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(Z95 * values.std(ddof=1) / math.sqrt(values.size))


@dataclass(frozen=True)
class ExperimentConfig:
    model: CovModel | UlaScenario
    n_grid: tuple[int, ...]
    trials: int = 5000
    seed: int = 0
    methods: tuple[str, ...] = ("oracle", "oas", "rblw", "lw")
    # coefficient dimension for stacked complex data; None means 2p
    dim_override: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "methods", tuple(str(Method(m)) if m != CLAIRVOYANT else m for m in self.methods))
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be >= 1, got {self.trials}")
        if not self.n_grid or min(self.n_grid) < 1:
            raise InvalidParameterError(f"n grid must be non-empty with n >= 1, got {self.n_grid}")
        if not self.methods:
            raise InvalidParameterError("at least one method is required")

    @property
    def p(self) -> int:
        return self.model.p


@dataclass(frozen=True)
class ResultRow:
    n: int
    method: str
    mean: float
    ci95: float
    mean_rho: float
    trials_used: int
    excluded: int = 0


@dataclass
class ExperimentResult:
    """Per-(n, method) summaries; ``kind`` is ``"mse"`` or ``"sinr"``.

    For ``sinr`` results ``mean`` and ``ci95`` are in dB.
    """

    kind: str
    rows: list[ResultRow] = field(default_factory=list)

    def get(self, n: int, method: str) -> ResultRow:
        for row in self.rows:
            if row.n == n and row.method == method:
                return row
        raise KeyError((n, method))

    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.rows))

    def n_values(self) -> list[int]:
        return list(dict.fromkeys(r.n for r in self.rows))


def _pool_map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*tasks)))


def _chunks(trials: int):
    return [(a, min(a + CHUNK, trials)) for a in range(0, trials, CHUNK)]


# ---------------------------------------------------------------------------
# MSE experiment


def _mse_chunk(factor, sigma, n, n_index, seed, start, stop, methods):
    p = sigma.shape[0]
    G = np.stack([rng_for(seed, n_index, k).standard_normal((p, n)) for k in range(start, stop)])
    X = factor @ G
    S = X @ X.transpose(0, 2, 1) / n
    S = 0.5 * (S + S.transpose(0, 2, 1))
    tr_s = np.trace(S, axis1=1, axis2=2)
    tr_s2 = np.sum(S * S, axis=(1, 2))
    out = {}
    for m in methods:
        if m == "sample":
            rho = np.zeros_like(tr_s)
        elif m == "oracle":
            rho = np.full_like(tr_s, oracle_rho(sigma, n))
        elif m == "lw":
            norm4 = np.sum(np.sum(X * X, axis=1) ** 2, axis=1)
            rho = clamp_unit(lw_from_traces(tr_s, tr_s2, norm4, p, n))
        elif m == "rblw":
            rho = clamp_unit(rblw_from_traces(tr_s, tr_s2, p, n))
        elif m == "oas":
            rho = clamp_unit(oas_from_traces(tr_s, tr_s2, p, n))
        else:
            raise InvalidParameterError(f"method {m!r} is not available in the MSE experiment")
        rho = np.atleast_1d(rho)
        est = (1 - rho)[:, None, None] * S
        est += (rho * tr_s / p)[:, None, None] * np.eye(p)
        err = np.sum((est - sigma) ** 2, axis=(1, 2))
        if not np.all(np.isfinite(err)):
            k = start + int(np.flatnonzero(~np.isfinite(err))[0])
            raise ShrinkageError(f"non-finite MSE at trial {k}, n={n}, method={m}")
        out[m] = (err, rho)
    return out


def run_mse_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Mean Frobenius MSE and mean coefficient per (n, method)."""
    if not isinstance(cfg.model, CovModel):
        raise InvalidParameterError("the MSE experiment needs a CovModel")
    if CLAIRVOYANT in cfg.methods:
        raise InvalidParameterError("'clairvoyant' is a beamforming method; use 'oracle' for MSE")
    sigma = cfg.model.covariance()
    factor = psd_factor(sigma)
    tasks = [
        (factor, sigma, n, i, cfg.seed, a, b, cfg.methods)
        for i, n in enumerate(cfg.n_grid)
        for a, b in _chunks(cfg.trials)
    ]
    parts = _pool_map(_mse_chunk, tasks, workers)
    result = ExperimentResult("mse")
    per_n = len(_chunks(cfg.trials))
    for i, n in enumerate(cfg.n_grid):
        chunk = parts[i * per_n:(i + 1) * per_n]
        for m in cfg.methods:
            err = np.concatenate([c[m][0] for c in chunk])
            rho = np.concatenate([c[m][1] for c in chunk])
            result.rows.append(ResultRow(n, m, float(err.mean()), ci95_halfwidth(err), float(rho.mean()), err.size))
        log.info("mse n=%d done", n)
    return result


# ---------------------------------------------------------------------------
# SINR experiment


def _stacked_rho(Xs, m, dim):
    q, n = Xs.shape
    S = Xs @ Xs.T / n
    S = 0.5 * (S + S.T)
    tr_s = float(np.trace(S))
    tr_s2 = float(np.sum(S * S))
    d = q if dim is None else dim
    if m == "sample":
        rho = 0.0
    elif m == "lw":
        norm4 = float(np.sum(np.sum(Xs * Xs, axis=0) ** 2))
        rho = clamp_unit(lw_from_traces(tr_s, tr_s2, norm4, d, n))
    elif m == "rblw":
        rho = clamp_unit(rblw_from_traces(tr_s, tr_s2, d, n))
    elif m == "oas":
        rho = clamp_unit(oas_from_traces(tr_s, tr_s2, d, n))
    else:
        raise InvalidParameterError(f"method {m!r} is not available in the SINR experiment")
    est = (1 - rho) * S
    est[np.diag_indices(q)] += rho * tr_s / q
    return est, rho


def _sinr_chunk(scenario, n, n_index, seed, start, stop, methods, dim):
    sigma = true_cov(scenario)
    a_s = scenario.steering
    out = {m: ([], []) for m in methods}
    excluded = {m: 0 for m in methods}
    clair = sinr(capon_weights(sigma, a_s, CLAIRVOYANT), scenario, sigma)
    for k in range(start, stop):
        x = scenario.snapshots(n, rng_for(seed, n_index, k))
        Xs = np.vstack([x.real, x.imag])
        for m in methods:
            if m == CLAIRVOYANT:
                out[m][0].append(clair)
                out[m][1].append(float("nan"))
                continue
            est, rho = _stacked_rho(Xs, m, dim)
            try:
                w = capon_weights(unstack_cov(est), a_s, m)
            except SingularMatrixError:
                excluded[m] += 1
                continue
            out[m][0].append(sinr(w, scenario, sigma))
            out[m][1].append(rho)
    return out, excluded


def run_sinr_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Mean output SINR (dB) of Capon beamformers built from each estimator.

    The mean is taken over linear SINR and then converted; the dB half-width
    is the delta-method image of the linear one. Sample-only Capon is skipped
    (``trials_used == 0``) for ``n < p`` where the estimate is singular.
    """
    scenario = cfg.model
    if not isinstance(scenario, UlaScenario):
        raise InvalidParameterError("the SINR experiment needs a UlaScenario")
    if "oracle" in cfg.methods:
        raise InvalidParameterError("use 'clairvoyant' for the true-covariance beamformer")
    tasks = []
    for i, n in enumerate(cfg.n_grid):
        methods = tuple(m for m in cfg.methods if not (m == "sample" and n < scenario.p))
        tasks += [(scenario, n, i, cfg.seed, a, b, methods, cfg.dim_override) for a, b in _chunks(cfg.trials)]
    parts = _pool_map(_sinr_chunk, tasks, workers)
    result = ExperimentResult("sinr")
    per_n = len(_chunks(cfg.trials))
    for i, n in enumerate(cfg.n_grid):
        chunk = parts[i * per_n:(i + 1) * per_n]
        for m in cfg.methods:
            if m not in chunk[0][0]:
                result.rows.append(ResultRow(n, m, float("nan"), float("nan"), float("nan"), 0, 0))
                continue
            vals = np.concatenate([np.asarray(c[0][m][0], dtype=float) for c in chunk])
            rhos = np.concatenate([np.asarray(c[0][m][1], dtype=float) for c in chunk])
            excl = sum(c[1][m] for c in chunk)
            if excl > MAX_EXCLUDED_FRACTION * cfg.trials:
                raise SingularMatrixError(
                    f"{excl} of {cfg.trials} trials singular at n={n} (limit {MAX_EXCLUDED_FRACTION:.1%})", m
                )
            mean = float(vals.mean())
            ci_db = 10 / math.log(10) * ci95_halfwidth(vals) / mean
            mean_rho = float(rhos.mean()) if m != CLAIRVOYANT else float("nan")
            result.rows.append(ResultRow(n, m, 10 * math.log10(mean), ci_db, mean_rho, vals.size, excl))
    return result


# ---------------------------------------------------------------------------
# Moment-identity verification


MIN_VERIFY_TRIALS = 10_000
Z_LIMIT = 4.0


@dataclass(frozen=True)
class MomentCheck:
    name: str
    estimate: float
    target: float
    stderr: float
    z: float
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    title: str
    checks: tuple[MomentCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _check(name, samples, target, z_limit=Z_LIMIT, exact_atol=0.0):
    samples = np.asarray(samples, dtype=float)
    est = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(samples.size))
    diff = est - target
    if se == 0.0 or abs(diff) <= exact_atol:
        z = 0.0 if abs(diff) <= exact_atol else math.copysign(math.inf, diff)
    else:
        z = diff / se
    return MomentCheck(name, est, float(target), se, z, abs(z) <= z_limit)


def _require_trials(trials):
    if trials < MIN_VERIFY_TRIALS:
        raise InvalidParameterError(f"verification needs at least {MIN_VERIFY_TRIALS} trials, got {trials}")


def _gaussian_batches(sigma, n, trials, seed):
    factor = psd_factor(sigma)
    p = sigma.shape[0]
    for i, (a, b) in enumerate(_chunks(trials)):
        rng = rng_for(seed, i)
        yield factor @ rng.standard_normal((b - a, p, n))


def verify_wishart_moments(sigma, n: int, trials: int = 100_000, seed: int = 0) -> VerificationReport:
    """Check E Tr(S), E Tr(S^2) and E Tr(S)^2 against their closed forms."""
    _require_trials(trials)
    sigma = np.asarray(sigma, dtype=float)
    t1, t2, t11 = [], [], []
    for X in _gaussian_batches(sigma, n, trials, seed):
        S = X @ X.transpose(0, 2, 1) / n
        tr = np.trace(S, axis1=1, axis2=2)
        t1.append(tr)
        t2.append(np.sum(S * S, axis=(1, 2)))
        t11.append(tr**2)
    tr_sig = float(np.trace(sigma))
    tr_sig2 = float(np.sum(sigma * sigma))
    checks = (
        _check("E Tr(S)", np.concatenate(t1), tr_sig),
        _check("E Tr(S^2)", np.concatenate(t2), (n + 1) / n * tr_sig2 + tr_sig**2 / n),
        _check("E Tr(S)^2", np.concatenate(t11), tr_sig**2 + 2 / n * tr_sig2),
    )
    return VerificationReport(f"Wishart trace moments (p={sigma.shape[0]}, n={n}, trials={trials})", checks)


def verify_haar_moments(p: int, n: int, trials: int = 100_000, seed: int = 0, column: int = 0) -> VerificationReport:
    """Fourth moments of a column of the right singular factor of a Gaussian matrix.

    ``X = H diag(s) Q`` with ``Q`` of shape ``min(p, n) x n``; the entries of a
    column ``q`` should satisfy ``E q_j^4 = 3/(n(n+2))`` and
    ``E q_j^2 q_k^2 = 1/(n(n+2))``.
    """
    _require_trials(trials)
    if not 0 <= column < n:
        raise InvalidParameterError(f"column index {column} out of range for n={n}")
    q4, q22 = [], []
    r = min(p, n)
    for i, (a, b) in enumerate(_chunks(trials)):
        X = rng_for(seed, i).standard_normal((b - a, p, n))
        Q = np.linalg.svd(X, full_matrices=False)[2]
        q = Q[:, :, column]
        q4.append(q[:, 0] ** 4)
        if r >= 2:
            q22.append(q[:, 0] ** 2 * q[:, 1] ** 2)
    d = n * (n + 2)
    checks = [_check("E q_j^4", np.concatenate(q4), 3 / d, exact_atol=1e-12)]
    if q22:
        checks.append(_check("E q_j^2 q_k^2", np.concatenate(q22), 1 / d))
    return VerificationReport(f"Haar column moments (p={p}, n={n}, trials={trials})", tuple(checks))


def verify_norm_moment(sigma, n: int, trials: int = 100_000, seed: int = 0) -> VerificationReport:
    """Total-expectation form of the conditional fourth-norm identity.

    Compares ``E ||x_i||^4`` with ``n/(n+2) E[2 Tr(S^2) + Tr(S)^2]`` through
    the per-trial difference of the two sides (same draws). For ``n = 1`` the
    identity holds sample by sample; the report then also carries the largest
    relative per-trial deviation as a separate check.
    """
    _require_trials(trials)
    sigma = np.asarray(sigma, dtype=float)
    lhs_all, rhs_all = [], []
    for X in _gaussian_batches(sigma, n, trials, seed):
        S = X @ X.transpose(0, 2, 1) / n
        norm4 = np.mean(np.sum(X * X, axis=1) ** 2, axis=1)
        tr = np.trace(S, axis1=1, axis2=2)
        tr2 = np.sum(S * S, axis=(1, 2))
        lhs_all.append(norm4)
        rhs_all.append(n / (n + 2) * (2 * tr2 + tr**2))
    lhs = np.concatenate(lhs_all)
    rhs = np.concatenate(rhs_all)
    diff = lhs - rhs
    scale = float(np.abs(lhs).mean())
    checks = [
        _check("E||x||^4 - n/(n+2) E[2Tr(S^2)+Tr(S)^2]", diff, 0.0, exact_atol=1e-10 * scale),
    ]
    if n == 1:
        rel = float(np.max(np.abs(diff) / np.maximum(np.abs(lhs), 1e-300)))
        checks.append(MomentCheck("per-sample relative deviation (n=1)", rel, 0.0, 0.0, 0.0, rel <= 1e-10))
    return VerificationReport(f"fourth-norm moment (p={sigma.shape[0]}, n={n}, trials={trials})", tuple(checks))
