from typing import Optional, Tuple


class RabiSpectrumError(Exception):
    """Base class for every error raised by the spectrum engine"""


class ConfigurationError(RabiSpectrumError, ValueError):
    """Invalid parameters or configuration values"""


class CoefficientDomainError(RabiSpectrumError, ValueError):
    """A recurrence coefficient is non-finite or degenerate at some index"""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class PoleProximityError(CoefficientDomainError):
    """x lies within the pole margin of a baseline n*omega"""

    def __init__(self, n: int, x: float, margin: float):
        super().__init__(
            f"x={x!r} is within {margin:g} of the pole at n={n}",
            index=n,
        )
        self.n = n
        self.x = x
        self.margin = margin


class DegenerateHeadError(CoefficientDomainError):
    """a(1) vanishes, so the first convergent of the fraction is undefined"""

    def __init__(self, message: str = "a(1) = 0: the Euler series has no first term"):
        super().__init__(message, index=1)


class DegenerateNormalizationError(RabiSpectrumError):
    """Backward recursion kept producing c0 = 0"""

    def __init__(self, message: str, depth: int):
        super().__init__(message)
        self.depth = depth


class NonConvergenceError(RabiSpectrumError):
    """A ratio or series did not converge; diagnostics carry the partial result"""

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class RefinementError(RabiSpectrumError):
    """Root refinement failed inside a bracket"""

    def __init__(self, message: str, bracket: Tuple[float, float]):
        super().__init__(message)
        self.bracket = bracket


class SpuriousSignChangeError(RefinementError):
    """The sign change in the bracket is a pole, not a zero"""

    def __init__(self, bracket: Tuple[float, float], residual: float):
        super().__init__(
            f"sign change in [{bracket[0]!r}, {bracket[1]!r}] is a pole "
            f"(|F| = {residual:g} at the refined point)",
            bracket,
        )
        self.residual = residual


class NumericalFailureError(RabiSpectrumError):
    """The dense eigensolver exhausted its iteration budget"""

    def __init__(self, message: str, sweeps: int):
        super().__init__(message)
        self.sweeps = sweeps


class TruncationFailureError(RabiSpectrumError):
    """Oracle levels did not stabilize below the Fock-space cutoff cap"""

    def __init__(self, message: str, n_fock: int):
        super().__init__(message)
        self.n_fock = n_fock
