"""Exception hierarchy.

``UsageError`` subclasses map to CLI exit code 2, ``ComputationError``
subclasses to exit code 1.
"""


class ProphetBoxError(Exception):
    pass


class UsageError(ProphetBoxError, ValueError):
    pass


class ComputationError(ProphetBoxError, RuntimeError):
    pass


class NegativeProbability(UsageError):
    pass


class ProbabilitySumMismatch(UsageError):
    pass


class NegativeValue(UsageError):
    pass


class NotPerfectSquare(UsageError):
    pass


class NotDecreasing(UsageError):
    pass


class LengthMismatch(UsageError):
    pass


class VariantMismatch(UsageError):
    pass


class UnsupportedInstance(UsageError):
    pass


class InstanceFormatError(UsageError):
    pass


class IllegalAction(ComputationError):
    def __init__(self, step, reason):
        super().__init__(f"illegal action at step {step}: {reason}")
        self.step = step
        self.reason = reason


class StateSpaceTooLarge(ComputationError):
    pass


class RandomizedPolicyUnsupported(ComputationError):
    pass
