"""Exception hierarchy for the causal_pvar package.

Every error raised by the library derives from :class:`CausalPvarError`,
so callers (notably the CLI) can map any expected failure to a nonzero
exit code without enumerating causes.
"""


class CausalPvarError(Exception):
    """Base class for all causal_pvar errors."""


# --- panel construction / validation ---------------------------------------

class UnbalancedPanel(CausalPvarError):
    """A (unit, time) cell is missing from the panel."""

    def __init__(self, unit, time):
        self.unit = unit
        self.time = time
        super().__init__(f"missing cell (unit={unit}, time={time})")


class NonFinite(CausalPvarError):
    """Panel values contain NaN or infinity."""


class BadOrdering(CausalPvarError):
    """Policy/outcome counts are inconsistent with the variable layout."""


class ParseError(CausalPvarError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


# --- estimation -------------------------------------------------------------

class DegenerateDummy(CausalPvarError):
    """An exogenous dummy is collinear with the unit means."""


class SingularDesign(CausalPvarError):
    """The lag regressor Gram matrix is not invertible."""


class InsufficientObs(CausalPvarError):
    """Too few time periods per unit for the requested lag order."""


# --- identification ---------------------------------------------------------

class NotPSD(CausalPvarError):
    """Covariance matrix has an eigenvalue below the clamp threshold."""


class ZeroPolicyVariance(CausalPvarError):
    """The policy residual has (numerically) zero variance."""


class BootstrapUnstable(CausalPvarError):
    """More than 5% of bootstrap replications failed to refit."""


# --- simulation / estimands ---------------------------------------------------

class BadConfig(CausalPvarError):
    """Scenario configuration is internally inconsistent."""


class RegimeMismatch(CausalPvarError):
    """Scenario regime does not match the requested verification."""


class EmptyTreatedSet(CausalPvarError):
    """No realized-treated cells; ATT/ACRT undefined."""


class DegenerateAssignment(CausalPvarError):
    """All cells treated or all cells control."""


class EmptyCell(CausalPvarError):
    """One of the four difference-in-means cells is empty."""


# --- weights ------------------------------------------------------------------

class GridTooNarrow(CausalPvarError):
    """Weight grid does not capture enough probability mass."""


class GridMismatch(CausalPvarError):
    """Weight grid and estimand grid do not align."""


class AllZeros(CausalPvarError):
    """Non-negative policy sample contains no positive values."""


# --- spillover ------------------------------------------------------------------

class AsymmetricAdjacency(CausalPvarError):
    """Adjacency matrix is not symmetric."""


class SelfLoop(CausalPvarError):
    """Adjacency matrix has a nonzero diagonal entry."""


class CollinearRegressors(CausalPvarError):
    """Policy residual and exposure are numerically collinear."""


class NoTreatedCells(CausalPvarError):
    """Exposure-adjusted estimands need at least one treated cell."""


class IoError(CausalPvarError):
    """Filesystem failure while writing results."""
