"""Exception types raised across the package."""


class CliqueSplitError(Exception):
    """Base class for all package errors."""


class AllCliquesOverflow(CliqueSplitError):
    pass


class UncoveredNode(CliqueSplitError):
    """A node belongs to no selected clique."""

    def __init__(self, node):
        self.node = node
        super().__init__(f"node {node + 1} is not covered by any clique")


class AssumptionViolation(CliqueSplitError):
    pass


class DimensionMismatch(CliqueSplitError, ValueError):
    pass


class EpsilonOutOfRange(CliqueSplitError, ValueError):
    pass


class ProxFailure(CliqueSplitError):
    pass


class StepSizeOutOfRange(CliqueSplitError, ValueError):
    pass


class NonFiniteIterate(CliqueSplitError, FloatingPointError):
    pass


class NotConsensusProblem(CliqueSplitError):
    pass


class NonzeroGhat(CliqueSplitError):
    """Algorithm requires every node-wise nonsmooth term to be zero."""


class BadSchedule(CliqueSplitError, ValueError):
    pass


class InvalidRateInputs(CliqueSplitError, ValueError):
    pass


class MissingReference(CliqueSplitError):
    pass


class OracleDisagreement(CliqueSplitError):
    pass


class ConfigError(CliqueSplitError, ValueError):
    pass
