"""Exception hierarchy.

Every error carries a ``code`` (stable machine-readable tag) and an
``exit_code`` used by the command-line front-end.
"""

from __future__ import annotations


class CavSqueezeError(Exception):
    code = "error"
    exit_code = 1


class InvalidDimensionError(CavSqueezeError, ValueError):
    code = "invalid-dimension"
    exit_code = 9


class OutOfRangeError(CavSqueezeError, ValueError):
    code = "out-of-range"
    exit_code = 9


class SpaceMismatchError(CavSqueezeError, ValueError):
    code = "space-mismatch"
    exit_code = 9


class NonHermitianError(CavSqueezeError, ValueError):
    code = "non-hermitian-input"
    exit_code = 9


class TruncationOverflowError(CavSqueezeError):
    code = "truncation-overflow"
    exit_code = 4


class StepNonconvergenceError(CavSqueezeError):
    code = "step-nonconvergence"
    exit_code = 5


class ZeroDetuningError(CavSqueezeError, ValueError):
    code = "zero-detuning"
    exit_code = 6


class DegenerateSpectrumError(CavSqueezeError):
    code = "degenerate-spectrum"
    exit_code = 7


class ZeroNormError(CavSqueezeError, ValueError):
    code = "zero-norm"
    exit_code = 8


class InvalidSeedError(CavSqueezeError, ValueError):
    code = "invalid-seed"
    exit_code = 10


class ConfigParseError(CavSqueezeError):
    code = "parse-error"
    exit_code = 2


class ConfigValidationError(CavSqueezeError):
    code = "validation-error"
    exit_code = 3

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ResonanceWarning(UserWarning):
    """Drive detuning is off the parametric resonance Delta = 2 chi."""


ALL_ERRORS = (
    InvalidDimensionError,
    OutOfRangeError,
    SpaceMismatchError,
    NonHermitianError,
    TruncationOverflowError,
    StepNonconvergenceError,
    ZeroDetuningError,
    DegenerateSpectrumError,
    ZeroNormError,
    InvalidSeedError,
    ConfigParseError,
    ConfigValidationError,
)
