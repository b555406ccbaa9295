"""Exception types raised across the package."""


class RareExitError(Exception):
    """Base class for all package errors."""


class NonStableRestPoint(RareExitError):
    """The rest point is not a stable equilibrium (c <= 0) or not a zero of b."""


class DegenerateDiffusion(RareExitError):
    """The diffusion coefficient vanishes or changes sign."""


class InvalidDomain(RareExitError):
    """The exit domain does not contain the rest point or violates the drift sign conditions."""


class QuadratureFailure(RareExitError):
    """Adaptive quadrature did not reach the requested tolerance."""


class InvalidM(RareExitError):
    """Terminal curvature M too small for the handoff rule (requires M sigma^2 > 2c)."""


class ComplexRoots(RareExitError):
    """The crossing equation F2 = F1 has no real roots at the requested time."""


class NonFiniteState(RareExitError):
    """A simulated state or log likelihood ratio became non-finite."""


class HypothesisViolation(RareExitError):
    """Parameters violate the hypotheses of a lemma or theorem."""

    def __init__(self, failed):
        self.failed = list(failed)
        super().__init__("; ".join(self.failed))


class LemmaViolation(RareExitError):
    """A region lemma lower bound failed on the evaluation grid."""

    def __init__(self, region, t, x, margin):
        self.region, self.t, self.x, self.margin = region, t, x, margin
        super().__init__(f"{region}: margin {margin:.3e} at t={t:.6g}, x={x:.6g}")


class ConfigError(RareExitError):
    """Invalid experiment specification; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
