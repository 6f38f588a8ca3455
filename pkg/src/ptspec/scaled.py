"""Complex numbers carried as mantissa * exp(log_scale)."""
import cmath
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ScaledComplex:
    mantissa: complex
    log_scale: float = 0.0

    @classmethod
    def from_log(cls, logz):
        logz = complex(logz)
        return cls(cmath.exp(1j * logz.imag), logz.real)

    def normalized(self):
        r = abs(self.mantissa)
        if r == 0 or not math.isfinite(r):
            return self
        return ScaledComplex(self.mantissa / r, self.log_scale + math.log(r))

    @property
    def value(self):
        """Plain complex value; may over- or underflow."""
        return self.mantissa * math.exp(self.log_scale) if self.mantissa else 0j

    def log(self):
        """Principal complex logarithm."""
        return cmath.log(self.mantissa) + self.log_scale

    def log_abs(self):
        if self.mantissa == 0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.log_scale

    def phase(self):
        return cmath.phase(self.mantissa)

    def scaled_to(self, log_ref):
        """Complex value of self * exp(-log_ref)."""
        if self.mantissa == 0:
            return 0j
        return self.mantissa * math.exp(self.log_scale - log_ref)

    def __mul__(self, other):
        if isinstance(other, ScaledComplex):
            return ScaledComplex(self.mantissa * other.mantissa,
                                 self.log_scale + other.log_scale).normalized()
        return ScaledComplex(self.mantissa * other, self.log_scale)

    def __truediv__(self, other):
        if isinstance(other, ScaledComplex):
            return ScaledComplex(self.mantissa / other.mantissa,
                                 self.log_scale - other.log_scale).normalized()
        return ScaledComplex(self.mantissa / other, self.log_scale)

    def __neg__(self):
        return ScaledComplex(-self.mantissa, self.log_scale)

    def __add__(self, other):
        if self.mantissa == 0:
            return other
        if other.mantissa == 0:
            return self
        ref = max(self.log_scale + math.log(abs(self.mantissa)),
                  other.log_scale + math.log(abs(other.mantissa)))
        return ScaledComplex(self.scaled_to(ref) + other.scaled_to(ref), ref).normalized()

    def __sub__(self, other):
        return self + (-other)

    def __abs__(self):
        return abs(self.value)
