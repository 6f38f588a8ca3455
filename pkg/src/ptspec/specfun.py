"""Real Gamma, Beta and generalized binomial coefficients."""
import math


class PoleError(ValueError):
    """Raised when Gamma is evaluated at a non-positive integer."""


def _is_pole(x):
    return x <= 0 and float(x).is_integer()


def gamma(x):
    """Gamma function for real ``x``.

    Negative non-integer arguments go through the reflection formula
    Gamma(x) Gamma(1 - x) = pi / sin(pi x).
    """
    x = float(x)
    if _is_pole(x):
        raise PoleError(f"Gamma has a pole at x = {x:g}")
    if x < 0.5:
        s = math.sin(math.pi * x)
        return math.pi / (s * math.gamma(1.0 - x))
    return math.gamma(x)


def beta(x, y):
    """Beta function B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y).

    Valid whenever none of x, y, x + y is a non-positive integer, including
    negative non-integer arguments.
    """
    x = float(x)
    y = float(y)
    for arg in (x, y, x + y):
        if _is_pole(arg):
            raise PoleError(f"Beta({x:g}, {y:g}) hits a Gamma pole at {arg:g}")
    # log-space keeps large arguments from overflowing
    if x > 0 and y > 0 and x + y > 30:
        return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))
    return gamma(x) * gamma(y) / gamma(x + y)


def gen_binom(alpha, k):
    """Generalized binomial coefficient alpha (alpha-1) ... (alpha-k+1) / k!."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out = 1.0
    for i in range(k):
        out *= (alpha - i) / (i + 1)
    return out
