"""Exception types shared across the package."""


class CritmixError(Exception):
    """Base class for all package-specific failures."""


class VolumeBelowCovolume(CritmixError):
    """Requested state has V at or below the mixture covolume."""


class DerivativeStepUnderflow(CritmixError):
    """Mole numbers too small for the requested finite-difference step."""


class DegenerateQ(CritmixError):
    """Both off-diagonal pivots of Q vanish; no null direction can be normalized."""


class BisectionStall(CritmixError):
    """A sign change bracketed on a grid edge evaporated under refinement."""


class TraceLost(CritmixError):
    """Curve continuation could not re-acquire the zero set after adaptation."""


class EmptyBank(CritmixError):
    """No solved points available (bank construction failed or file empty)."""


class ModelMismatch(CritmixError):
    """Bank reuse attempted across different component pairs or model stacks."""


class NoConvergence(CritmixError):
    """All solver paths failed; details carry per-path outcomes."""


class SingularDerivative(CritmixError):
    """A scalar Newton derivative vanished within tolerance."""


class InnerDivergence(CritmixError):
    """Inner temperature loop of the double-loop solver failed to converge."""


class OuterDivergence(CritmixError):
    """Outer volume loop of the double-loop solver failed to converge."""


class ConfigInvalid(CritmixError):
    """Configuration file missing, unparsable, or violating invariants."""
