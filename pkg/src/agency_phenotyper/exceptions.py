"""Exception types raised across the package."""


class AgencyError(Exception):
    """Base class for every error raised by agency_phenotyper."""


class InvalidDistribution(AgencyError, ValueError):
    pass


class AllZeroWeights(InvalidDistribution):
    """Raised when normalizing a weight vector with no positive mass.

    Under a generative model this usually means an observation the model
    considers impossible.
    """


class SupportMismatch(AgencyError, ValueError):
    pass


class InvalidChannel(AgencyError, ValueError):
    pass


class TooManyInputs(AgencyError, ValueError):
    pass


class LabelMismatch(AgencyError, ValueError):
    pass


class ModelShapeMismatch(AgencyError, ValueError):
    pass


class UnknownModality(AgencyError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class UnknownAction(AgencyError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ImpossibleObservation(AgencyError):
    """The observation has zero likelihood under the agent's predictive state."""


class InvalidParameter(AgencyError, ValueError):
    pass


class OutOfRange(AgencyError, ValueError):
    pass


class InvalidModel(AgencyError, ValueError):
    """Raised by the model loader; carries the list of violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"{v.kind} at {v.location}" for v in self.violations)
        super().__init__(f"invalid generative model: {lines}")


class BatteryError(AgencyError):
    def __init__(self, spec_name, seed, cause):
        self.spec_name = spec_name
        self.seed = seed
        self.cause = cause
        super().__init__(f"battery cell (spec={spec_name!r}, seed={seed}) failed: {cause}")
