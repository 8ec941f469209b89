"""Exception hierarchy shared by all modules."""


class FKError(Exception):
    """Base class; `code` is the machine-readable tag used by the CLI."""

    code = "fk_error"

    def to_dict(self):
        return {"error": self.code, "type": type(self).__name__, "message": str(self)}


class DegenerateDirection(FKError):
    code = "degenerate_direction"


class MultiplicityViolation(FKError):
    code = "multiplicity_violation"


class NotPrimitive(FKError):
    code = "not_primitive"


class IntrinsicResonant(FKError):
    code = "intrinsic_resonant"


class MediumResonant(FKError):
    code = "medium_resonant"


class DimensionMismatch(FKError):
    code = "dimension_mismatch"


class CutoffOverflow(FKError):
    code = "cutoff_overflow"


class NonZeroAverage(FKError):
    code = "nonzero_average"


class SmallDivisor(FKError):
    code = "small_divisor"

    def __init__(self, k, divisor):
        self.k = tuple(int(x) for x in k)
        self.divisor = float(divisor)
        super().__init__(f"divisor {self.divisor:.3e} at mode {self.k}")


class AliasingExcess(FKError):
    code = "aliasing_excess"


class NoContraction(FKError):
    code = "no_contraction"


class IdenticallyZero(FKError):
    code = "identically_zero"


class Degenerate(FKError):
    code = "degenerate"


class NoConvergence(FKError):
    code = "no_convergence"


class ConfigError(FKError):
    code = "config_error"
