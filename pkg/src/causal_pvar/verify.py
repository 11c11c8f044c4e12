"""Monte-Carlo verification of which estimand the impact coefficient recovers.

Each check runs seeded end-to-end pipelines (simulate -> within fit ->
recursive identification -> impact coefficient), computes the predicted
estimand from the potential-outcome oracles on the same simulated data,
and compares the mean discrepancy against three Monte-Carlo standard
errors of that mean.  T1 is an exact finite-sample decomposition and is
checked at 1e-10 instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as _stats

from .errors import BadConfig, RegimeMismatch
from .estimands import did_four_means, dummy_gamma, oracle_estimands, selection_bias
from .identify import cholesky_lower, impact_gamma
from .panel import PVARSpec, fit_pvar
from .scenarios import (
    GAUSSIAN_CONTINUOUS,
    HETEROGENEOUS_DUMMY,
    HOMOGENEOUS_DUMMY,
    NONNEGATIVE_CONTINUOUS,
    ScenarioConfig,
    linear_impact,
    quadratic_impact,
    simulate_scenario,
)
from .weights import gaussian_weights, nonneg_weights, weighted_estimand

__all__ = ["VerificationReport", "verify_theorem", "default_config", "THEOREMS"]

THEOREMS = ("T1", "T2", "T3", "T4", "T5", "T6", "T7", "T9", "T10")

_REGIME_FOR = {
    "T1": HETEROGENEOUS_DUMMY,
    "T2": HOMOGENEOUS_DUMMY,
    "T3": GAUSSIAN_CONTINUOUS,
    "T4": GAUSSIAN_CONTINUOUS,
    "T5": GAUSSIAN_CONTINUOUS,
    "T6": NONNEGATIVE_CONTINUOUS,
    "T7": NONNEGATIVE_CONTINUOUS,
    "T9": HETEROGENEOUS_DUMMY,
    "T10": HETEROGENEOUS_DUMMY,
}


@dataclass(frozen=True)
class VerificationReport:
    """Aggregate of one theorem-style Monte-Carlo check."""

    theorem: str
    n_reps: int
    estimate_mean: float
    oracle_mean: float
    discrepancy: float
    mc_se: float
    passed: bool
    details: dict

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{self.theorem}: {status}  |mean gamma_hat - oracle| = "
            f"{self.discrepancy:.6g} vs 3*SE = {3 * self.mc_se:.6g} "
            f"({self.n_reps} reps)"
        )


def default_config(theorem: str) -> ScenarioConfig:
    """A scenario satisfying the theorem's premises, sized for desk runs."""
    if theorem == "T1":
        return ScenarioConfig(
            regime=HETEROGENEOUS_DUMMY, n_units=40, n_times=60, seed=0,
            impact=linear_impact(2.0), effect_sd=0.6, treat_on_gain=0.4,
            treat_prob=0.4, time_frac=0.4,
        )
    if theorem == "T2":
        return ScenarioConfig(
            regime=HOMOGENEOUS_DUMMY, n_units=200, n_times=200, seed=0,
            impact=linear_impact(2.0), treat_prob=0.3, effect_sd=0.5,
        )
    if theorem == "T3":
        return ScenarioConfig(
            regime=GAUSSIAN_CONTINUOUS, n_units=100, n_times=150, seed=0,
            impact=quadratic_impact(1.0, 0.4), policy_sigma=1.0,
        )
    if theorem == "T4":
        return ScenarioConfig(
            regime=GAUSSIAN_CONTINUOUS, n_units=100, n_times=150, seed=0,
            impact=linear_impact(1.0), policy_sigma=1.0, selection_strength=0.5,
        )
    if theorem == "T5":
        return ScenarioConfig(
            regime=GAUSSIAN_CONTINUOUS, n_units=100, n_times=150, seed=0,
            impact=linear_impact(1.0), policy_sigma=1.0,
        )
    if theorem in ("T6", "T7"):
        # Coarse dose grid: the conditional-mean bins carry outcome noise
        # into the ACRT gradient, and a quadratic impact has no binning
        # bias, so fewer bins just means a quieter oracle.
        return ScenarioConfig(
            regime=NONNEGATIVE_CONTINUOUS, n_units=100, n_times=100, seed=0,
            impact=quadratic_impact(0.5, 0.3), zero_prob=0.5, support=(1.0, 2.0),
            lambda_grid=np.concatenate([[0.0], np.linspace(1.0, 2.0, 41)]),
        )
    if theorem in ("T9", "T10"):
        return ScenarioConfig(
            regime=HETEROGENEOUS_DUMMY, n_units=100, n_times=150, seed=0,
            impact=linear_impact(1.0), treat_prob=0.4, time_frac=0.4,
        )
    raise BadConfig(f"unknown theorem {theorem!r}")


def _pipeline_gamma(panel, lag_order: int = 1) -> tuple:
    fit = fit_pvar(panel, PVARSpec(lag_order))
    gamma = impact_gamma(cholesky_lower(fit.sigma), 0, 1)
    return gamma, fit


def _rep_seeds(seed: int, reps: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return rng.integers(0, 2**63 - 1, size=reps)


def verify_theorem(theorem: str, config: ScenarioConfig | None = None, reps: int = 200) -> VerificationReport:
    """Run one theorem check for ``reps`` seeded replications."""
    theorem = theorem.upper()
    if theorem not in THEOREMS:
        raise BadConfig(f"unknown theorem {theorem!r}; choose from {THEOREMS}")
    config = config or default_config(theorem)
    if config.regime != _REGIME_FOR[theorem]:
        raise RegimeMismatch(
            f"{theorem} needs regime {_REGIME_FOR[theorem]!r}, got {config.regime!r}"
        )
    if reps < 2:
        raise BadConfig("need at least 2 replications")
    seeds = _rep_seeds(config.seed, reps)

    if theorem == "T1":
        return _verify_t1(config, seeds)

    estimates = np.empty(reps)
    oracles = np.empty(reps)
    deltas = np.empty(reps) if theorem == "T2" else None

    quad_oracle = None
    if theorem == "T3":
        quad_oracle = _gaussian_quadrature_oracle(config)

    for r, s in enumerate(seeds):
        panel, pop = simulate_scenario(config.with_seed(s))
        gamma, _ = _pipeline_gamma(panel)
        estimates[r] = gamma
        if theorem == "T2":
            report = oracle_estimands(pop)
            oracles[r] = report.ate
            deltas[r] = report.selection_bias
        elif theorem == "T3":
            oracles[r] = quad_oracle
        elif theorem in ("T4", "T5"):
            profile = gaussian_weights(config.policy_sigma, pop.lambda_grid)
            mode = "acrt" if theorem == "T4" else "acr"
            oracles[r] = weighted_estimand(profile, pop, mode)
        elif theorem in ("T6", "T7"):
            if theorem == "T6":
                from .weights import ZeroInflatedUniform

                law = ZeroInflatedUniform(config.zero_prob, *config.support)
                profile = nonneg_weights(law=law)
            else:
                profile = nonneg_weights(sample=pop.assignments)
            oracles[r] = weighted_estimand(profile, pop, "nonneg")
        elif theorem == "T9":
            oracles[r] = did_four_means(
                pop.realized_outcomes, pop.groups.treated_units, pop.groups.treated_times
            )
        elif theorem == "T10":
            oracles[r] = oracle_estimands(pop).att

    diffs = estimates - oracles
    mc_se = float(diffs.std(ddof=1) / np.sqrt(reps))
    discrepancy = float(abs(diffs.mean()))
    passed = discrepancy < 3.0 * mc_se
    details = {
        "estimates_sd": float(estimates.std(ddof=1)),
        "oracle_sd": float(oracles.std(ddof=1)),
    }
    if theorem == "T2":
        delta_se = float(deltas.std(ddof=1) / np.sqrt(reps))
        delta_pass = abs(deltas.mean()) < 3.0 * delta_se
        details["selection_bias_mean"] = float(deltas.mean())
        details["selection_bias_se"] = delta_se
        details["selection_bias_pass"] = bool(delta_pass)
        passed = bool(passed and delta_pass)
    if theorem == "T4":
        details["note"] = "discrepancy reported for nonlinear selection; bound asserted only on linear designs"
    return VerificationReport(
        theorem=theorem,
        n_reps=reps,
        estimate_mean=float(estimates.mean()),
        oracle_mean=float(oracles.mean()),
        discrepancy=discrepancy,
        mc_se=mc_se,
        passed=bool(passed),
        details=details,
    )


def _verify_t1(config: ScenarioConfig, seeds) -> VerificationReport:
    """Exact decomposition: binary contrast = ATE + selection bias.

    Computed on the true innovations with population-style sample moments,
    the identity is algebraic and must hold to 1e-10 on every draw, with
    or without selection.
    """
    worst = 0.0
    gammas = np.empty(len(seeds))
    for r, s in enumerate(seeds):
        _, pop = simulate_scenario(config.with_seed(s))
        gamma = dummy_gamma(pop.assignments, pop.realized_outcomes)
        report = oracle_estimands(pop)
        worst = max(worst, abs(gamma - (report.ate + report.selection_bias)))
        gammas[r] = gamma
    return VerificationReport(
        theorem="T1",
        n_reps=len(seeds),
        estimate_mean=float(gammas.mean()),
        oracle_mean=float(gammas.mean()),
        discrepancy=float(worst),
        mc_se=0.0,
        passed=bool(worst < 1e-10),
        details={"criterion": "max |gamma - (ATE + bias)| < 1e-10"},
    )


def _gaussian_quadrature_oracle(config: ScenarioConfig) -> float:
    """Independent fine-grid quadrature of density-weighted derivative."""
    sigma = config.policy_sigma
    lam = np.linspace(-8.0 * sigma, 8.0 * sigma, 20_001)
    dens = _stats.norm.pdf(lam, scale=sigma)
    return float(np.trapezoid(dens * config.impact.derivative(lam), lam))
