"""Recursive identification of impact effects and bootstrap impulse responses.

The contemporaneous impact of policy shock k on a later-ordered variable j
is read off the lower-triangular factor of the residual covariance matrix:
``gamma = lower[j, k] / lower[k, k]``.  In the two-variable case this
equals the regression coefficient cov(policy residual, outcome residual) /
var(policy residual).  Dynamics come from powers of the companion matrix;
confidence bands from a recursive residual bootstrap.

Ordering caveat (documented, not asserted): permuting two policy columns
leaves the residual covariance matrix unchanged but changes the factor,
and with it which estimand each impact coefficient targets.  Variable
order is a modelling choice, not a mechanical detail.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BootstrapUnstable, CausalPvarError, NotPSD, ZeroPolicyVariance
from .panel import PanelDataset, PVARFit, PVARSpec, companion, fit_pvar

__all__ = [
    "CholeskyFactor",
    "ImpulseResponse",
    "BootstrapBands",
    "cholesky_lower",
    "impact_gamma",
    "irf",
    "irf_from_impact",
    "bootstrap_irf",
]

UNIT_SHOCK = "unit-shock"
ONE_SD = "one-sd"


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor O with O @ O.T equal to the covariance."""

    lower: np.ndarray

    @property
    def n_vars(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True)
class ImpulseResponse:
    """Responses of every variable to one identified shock.

    ``responses[v, h]`` is the response of variable v at horizon h.
    Under unit-shock normalization the shocked variable responds by
    exactly 1 at h = 0.
    """

    shock_index: int
    horizons: np.ndarray
    responses: np.ndarray
    normalization: str


@dataclass(frozen=True)
class BootstrapBands:
    """Percentile bands around an impulse response."""

    level: float
    lower: np.ndarray
    upper: np.ndarray
    n_reps: int
    seed: int


def cholesky_lower(sigma: np.ndarray, clamp: float = 1e-10) -> CholeskyFactor:
    """Lower-triangular factorization of a symmetric PSD matrix.

    Eigenvalues in (-1e-8, 0] are clamped to a tiny positive ridge so that
    numerically semidefinite inputs still factor; anything below -1e-8
    raises NotPSD.
    """
    sigma = np.asarray(sigma, dtype=float)
    sigma = (sigma + sigma.T) / 2.0
    eigmin = float(np.linalg.eigvalsh(sigma).min())
    if eigmin < -1e-8:
        raise NotPSD(f"minimum eigenvalue {eigmin:.3e} below -1e-8")
    if eigmin < clamp:
        sigma = sigma + (clamp - eigmin) * np.eye(sigma.shape[0])
    return CholeskyFactor(np.linalg.cholesky(sigma))


def impact_gamma(chol: CholeskyFactor, k: int, j: int) -> float:
    """Impact coefficient of shock k on variable j: lower[j, k] / lower[k, k].

    Indices are zero-based positions in the (policies-first) ordering and
    must satisfy k < j.  Equals the coefficient on variable k in the
    least-squares regression of variable j's residual on the residuals of
    variables 0..k.
    """
    if not 0 <= k < j < chol.n_vars:
        raise CausalPvarError(f"need 0 <= k < j < m, got k={k}, j={j}, m={chol.n_vars}")
    diag = chol.lower[k, k]
    if abs(diag) < 1e-12:
        raise ZeroPolicyVariance(f"policy residual {k} has ~zero variance")
    return float(chol.lower[j, k] / diag)


def _propagate(fit: PVARFit, impact: np.ndarray, horizon: int) -> np.ndarray:
    m = fit.n_vars
    comp = companion(fit).matrix
    state = np.zeros(comp.shape[0])
    state[:m] = impact
    out = np.empty((m, horizon + 1))
    out[:, 0] = impact
    for h in range(1, horizon + 1):
        state = comp @ state
        out[:, h] = state[:m]
    return out


def irf(
    fit: PVARFit,
    chol: CholeskyFactor,
    k: int,
    horizon: int,
    normalization: str = UNIT_SHOCK,
) -> ImpulseResponse:
    """Impulse response to shock k over horizons 0..horizon.

    The h = 0 column is the k-th column of the lower factor, rescaled so
    the shocked variable moves by one under unit-shock normalization; the
    h-step block applies the companion matrix h times.
    """
    if horizon < 0:
        raise CausalPvarError("horizon must be >= 0")
    impact = chol.lower[:, k].copy()
    if normalization == UNIT_SHOCK:
        diag = chol.lower[k, k]
        if abs(diag) < 1e-12:
            raise ZeroPolicyVariance(f"policy residual {k} has ~zero variance")
        impact = impact / diag
    elif normalization != ONE_SD:
        raise CausalPvarError(f"unknown normalization {normalization!r}")
    return ImpulseResponse(
        shock_index=k,
        horizons=np.arange(horizon + 1),
        responses=_propagate(fit, impact, horizon),
        normalization=normalization,
    )


def irf_from_impact(fit: PVARFit, impact: np.ndarray, horizon: int) -> ImpulseResponse:
    """Propagate a caller-supplied impact vector (e.g. a plug-in (1, delta)).

    Used when the impact column is identified outside the recursive scheme,
    as with the spillover-adjusted estimate; only the supplied column is
    needed, the remaining rotation stays unidentified.
    """
    impact = np.asarray(impact, dtype=float)
    if impact.shape != (fit.n_vars,) or not np.isfinite(impact).all():
        raise CausalPvarError("impact must be a finite vector of length m")
    return ImpulseResponse(
        shock_index=-1,
        horizons=np.arange(horizon + 1),
        responses=_propagate(fit, impact, horizon),
        normalization="plug-in",
    )


def _regenerate(panel: PanelDataset, fit: PVARFit, shocks: np.ndarray) -> PanelDataset:
    """Rebuild a panel from fitted dynamics and resampled residual vectors.

    The first ``drop`` observed values per unit are held fixed as initial
    conditions.
    """
    n, t, m = panel.values.shape
    p = fit.spec.lag_order
    drop = fit.sample_offset
    out = np.empty_like(panel.values)
    out[:, :drop, :] = panel.values[:, :drop, :]
    const = fit.intercepts                                     # (n, m)
    dummy_part = None
    if fit.dummy_coef is not None:
        dmat = panel.exogenous_dummies[:, :, list(fit.spec.dummy_columns)]
        dummy_part = np.einsum("ntd,dm->ntm", dmat, fit.dummy_coef)
    for s in range(drop, t):
        x = const + shocks[:, s - drop, :]
        for l in range(1, p + 1):
            x = x + out[:, s - l, :] @ fit.phi[l - 1].T
        if dummy_part is not None:
            x = x + dummy_part[:, s, :]
        out[:, s, :] = x
    return PanelDataset(out, panel.n_policies, panel.variable_names, panel.exogenous_dummies)


def bootstrap_irf(
    panel: PanelDataset,
    spec: PVARSpec,
    k: int,
    horizon: int,
    n_reps: int,
    level: float,
    seed: int,
    normalization: str = UNIT_SHOCK,
    n_threads: int = 1,
) -> tuple[ImpulseResponse, BootstrapBands]:
    """Point impulse response plus percentile bootstrap bands.

    Residual vectors are resampled i.i.d. over (unit, time) cells with
    replacement, panels regenerated from the fitted dynamics, refitted, and
    the impulse response recomputed.  Replication r draws from its own RNG
    stream derived from (seed, r), so results are identical whether the
    loop runs sequentially or on several threads.
    """
    if n_reps < 100:
        raise CausalPvarError("need at least 100 bootstrap replications")
    if not 0.0 < level < 1.0:
        raise CausalPvarError("level must be in (0, 1)")
    fit = fit_pvar(panel, spec)
    point = irf(fit, cholesky_lower(fit.sigma), k, horizon, normalization)

    n, m = fit.n_units, fit.n_vars
    tr = fit.residuals.shape[1]
    pool = fit.residuals.reshape(n * tr, m)
    children = np.random.SeedSequence(seed).spawn(n_reps)
    results = np.full((n_reps, m, horizon + 1), np.nan)
    failures = np.zeros(n_reps, dtype=bool)

    def run_rep(r: int) -> None:
        rng = np.random.default_rng(children[r])
        idx = rng.integers(0, n * tr, size=n * tr)
        shocks = pool[idx].reshape(n, tr, m)
        try:
            sim = _regenerate(panel, fit, shocks)
            refit = fit_pvar(sim, spec)
            rep_irf = irf(refit, cholesky_lower(refit.sigma), k, horizon, normalization)
        except CausalPvarError:
            failures[r] = True
            return
        results[r] = rep_irf.responses

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool_exec:
            list(pool_exec.map(run_rep, range(n_reps)))
    else:
        for r in range(n_reps):
            run_rep(r)

    n_failed = int(failures.sum())
    if n_failed > 0.05 * n_reps:
        raise BootstrapUnstable(f"{n_failed}/{n_reps} replications failed to refit")
    good = results[~failures]
    alpha = (1.0 - level) / 2.0
    bands = BootstrapBands(
        level=level,
        lower=np.quantile(good, alpha, axis=0),
        upper=np.quantile(good, 1.0 - alpha, axis=0),
        n_reps=n_reps,
        seed=seed,
    )
    return point, bands
