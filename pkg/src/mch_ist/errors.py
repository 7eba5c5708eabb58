class IstError(Exception):
    """Base class; `module` names the pipeline stage that raised."""

    module = "mch_ist"


class ConfigError(IstError):
    module = "cli"


class DomainError(IstError, ValueError):
    pass


class DecayError(IstError):
    module = "direct_scattering"


class MonotonicityError(IstError):
    module = "reconstruct"


class ResonanceError(IstError):
    module = "direct_scattering"


class ContourResolutionError(IstError):
    module = "direct_scattering"


class NonConvergenceError(IstError):
    module = "rhp_solver"


class SingularSystemError(IstError):
    module = "rhp_solver"


class RegimeError(IstError):
    module = "reconstruct"


class CollisionError(IstError):
    module = "soliton"


class StepperError(IstError):
    module = "validate"


class GridMismatchError(IstError, ValueError):
    module = "validate"
