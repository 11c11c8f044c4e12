"""Dose-mixing weight functions for continuous policy regimes.

A recursive impact coefficient on a continuous policy averages the local
dose-response derivative with weights determined entirely by the policy
distribution.  For an unbounded mean-zero policy the weights are

    q(lam) = (E[W] F(lam) - theta(lam)) / var(W),   theta(lam) = E[W 1{W <= lam}],

which integrates to one and reduces to the policy density in the Gaussian
case.  For a non-negative policy with a point mass at zero the weights
split into a density part over the positive support [d_L, d_U]

    q1(lam) = (E[W | W >= lam] - E[W]) P(W >= lam) / var(W)

and a scalar q0 = (E[W | W > 0] - E[W]) P(W > 0) d_L / var(W) attached to
the extensive margin, with integral(q1) + q0 = 1 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import AllZeros, BadConfig, GridMismatch, GridTooNarrow
from .estimands import oracle_estimands
from .scenarios import PotentialOutcomePanel

__all__ = [
    "WeightProfile",
    "ZeroInflatedUniform",
    "gaussian_weights",
    "nonneg_weights",
    "weighted_estimand",
]


@dataclass(frozen=True)
class WeightProfile:
    """Weights over the dose grid plus the scalar extensive-margin weight."""

    grid: np.ndarray
    d_lower: float
    d_upper: float
    q: np.ndarray | None = None
    theta: np.ndarray | None = None
    cdf: np.ndarray | None = None
    q_integral: float | None = None
    q1: np.ndarray | None = None
    q0: float | None = None
    q1_integral: float | None = None
    no_zero_mass: bool = False


@dataclass(frozen=True)
class ZeroInflatedUniform:
    """Point mass at zero mixed with a uniform positive part on [low, high]."""

    zero_prob: float
    low: float
    high: float

    def __post_init__(self):
        if not (0.0 <= self.zero_prob < 1.0 and 0.0 < self.low <= self.high):
            raise BadConfig("need 0 <= zero_prob < 1 and 0 < low <= high")

    @property
    def d_lower(self) -> float:
        return self.low

    @property
    def d_upper(self) -> float:
        return self.high

    def mean(self) -> float:
        return (1.0 - self.zero_prob) * (self.low + self.high) / 2.0

    def second_moment(self) -> float:
        lo, hi = self.low, self.high
        return (1.0 - self.zero_prob) * (lo * lo + lo * hi + hi * hi) / 3.0

    def variance(self) -> float:
        return self.second_moment() - self.mean() ** 2

    def prob_zero(self) -> float:
        return self.zero_prob

    def prob_ge(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.high == self.low:
            tail = (lam <= self.low).astype(float)
        else:
            tail = np.clip((self.high - lam) / (self.high - self.low), 0.0, 1.0)
            tail = np.where(lam <= self.low, 1.0, tail)
        return (1.0 - self.zero_prob) * tail

    def partial_mean_ge(self, lam):
        """E[W 1{W >= lam}]."""
        lam = np.asarray(lam, dtype=float)
        if self.high == self.low:
            mass = np.where(lam <= self.low, self.low, 0.0)
            return (1.0 - self.zero_prob) * mass
        cut = np.clip(lam, self.low, self.high)
        mass = (self.high**2 - cut**2) / (2.0 * (self.high - self.low))
        full = (self.low + self.high) / 2.0
        mass = np.where(lam <= self.low, full, mass)
        return (1.0 - self.zero_prob) * mass


def gaussian_weights(sigma: float, grid) -> WeightProfile:
    """Dose weights for a mean-zero Gaussian policy innovation.

    theta(lam) = integral of m f(m) up to lam = -sigma^2 f(lam) in closed
    form, so q(lam) = (0 * F(lam) - theta(lam)) / sigma^2 collapses to the
    Gaussian density itself.  The grid must capture all but 1e-6 of the
    probability mass.
    """
    if sigma <= 0:
        raise BadConfig("sigma must be positive")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or (np.diff(grid) <= 0).any():
        raise BadConfig("grid must be strictly increasing")
    law = stats.norm(loc=0.0, scale=sigma)
    mass = law.cdf(grid[-1]) - law.cdf(grid[0])
    if mass < 1.0 - 1e-6:
        raise GridTooNarrow(f"grid captures only {mass:.8f} of the policy mass")
    pdf = law.pdf(grid)
    cdf = law.cdf(grid)
    theta = -(sigma**2) * pdf
    q = (0.0 * cdf - theta) / sigma**2
    return WeightProfile(
        grid=grid,
        d_lower=float(grid[0]),
        d_upper=float(grid[-1]),
        q=q,
        theta=theta,
        cdf=cdf,
        q_integral=float(np.trapezoid(q, grid)),
    )


def nonneg_weights(sample=None, law=None, grid=None, n_grid: int = 201) -> WeightProfile:
    """Dose weights for a non-negative policy, from a sample or a law.

    The positive support is [d_L, d_U] with d_L the smallest positive
    value observed (or the law's lower endpoint).  ``q1_integral`` is
    computed from exact moment identities rather than grid quadrature, so
    q1_integral + q0 = 1 holds to machine precision.  When the input has
    no mass at zero the profile degenerates to the pure continuous case:
    q0 = 0 and ``no_zero_mass`` is set.
    """
    if (sample is None) == (law is None):
        raise BadConfig("pass exactly one of sample= or law=")
    if sample is not None:
        w = np.asarray(sample, dtype=float).ravel()
        if w.size == 0 or (w < 0).any():
            raise BadConfig("sample must be non-negative and non-empty")
        pos = w[w > 0]
        if pos.size == 0:
            raise AllZeros("sample has no positive values")
        d_lo, d_hi = float(pos.min()), float(pos.max())
        ew = float(w.mean())
        var = float(w.var())
        p0 = float(np.mean(w == 0.0))
        if var <= 0:
            raise BadConfig("policy sample has zero variance")
        grid = np.linspace(d_lo, d_hi, n_grid) if grid is None else np.asarray(grid, dtype=float)
        pos_sorted = np.sort(pos)
        suffix = np.concatenate([np.cumsum(pos_sorted[::-1])[::-1], [0.0]])
        idx = np.searchsorted(pos_sorted, grid, side="left")
        prob_ge = (pos_sorted.size - idx) / w.size
        partial_ge = suffix[idx] / w.size
        q1_int = float(
            (np.mean(pos * (pos - d_lo)) * pos.size - ew * np.sum(pos - d_lo)) / (var * w.size)
        )
    else:
        d_lo, d_hi = float(law.d_lower), float(law.d_upper)
        ew = float(law.mean())
        var = float(law.variance())
        p0 = float(law.prob_zero())
        if var <= 0:
            raise BadConfig("policy law has zero variance")
        grid = np.linspace(d_lo, d_hi, n_grid) if grid is None else np.asarray(grid, dtype=float)
        prob_ge = law.prob_ge(grid)
        partial_ge = law.partial_mean_ge(grid)
        q1_int = float(1.0 - ew * p0 * d_lo / var)

    q1 = (partial_ge - ew * prob_ge) / var
    q0 = ew * p0 * d_lo / var
    return WeightProfile(
        grid=grid,
        d_lower=d_lo,
        d_upper=d_hi,
        q1=q1,
        q0=float(q0),
        q1_integral=q1_int,
        no_zero_mass=(p0 == 0.0),
    )


def weighted_estimand(profile: WeightProfile, pop: PotentialOutcomePanel, mode: str) -> float:
    """Compose the dose weights with oracle estimands into one scalar.

    mode "acr":  integral of q * ACR  (unconditional derivative)
    mode "acrt": integral of q * ACRT (derivative conditioned on dose)
    mode "nonneg": integral of q1 * ACRT over [d_L, d_U]
                   plus q0 * (mean po(d_L) - mean po(0)) / d_L.
    """
    report = oracle_estimands(pop)
    grid = profile.grid
    if grid[0] < pop.lambda_grid[0] - 1e-9 or grid[-1] > pop.lambda_grid[-1] + 1e-9:
        raise GridMismatch("weight grid extends beyond the potential-outcome grid")

    if mode in ("acr", "acrt"):
        if profile.q is None:
            raise GridMismatch("profile has no q weights; use gaussian_weights")
        values = report.acr_grid if mode == "acr" else _fill_nan(report.acrt_grid)
        values = np.interp(grid, report.grid, values)
        return float(np.trapezoid(profile.q * values, grid))

    if mode == "nonneg":
        if profile.q1 is None or profile.q0 is None:
            raise GridMismatch("profile has no q1/q0 weights; use nonneg_weights")
        acrt = np.interp(grid, report.grid, _fill_nan(report.acrt_grid))
        intensive = float(np.trapezoid(profile.q1 * acrt, grid))
        gain = float(pop.po_at(profile.d_lower).mean() - pop.po_at(0.0).mean())
        return intensive + profile.q0 * gain / profile.d_lower

    raise BadConfig(f"unknown mode {mode!r}")


def _fill_nan(values: np.ndarray) -> np.ndarray:
    """Linear-interpolate NaN grid entries (empty realized-dose bins)."""
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values)
    if not bad.any():
        return values
    if bad.all():
        raise GridMismatch("no realized doses on the grid")
    idx = np.arange(values.size)
    out = values.copy()
    out[bad] = np.interp(idx[bad], idx[~bad], values[~bad])
    return out
