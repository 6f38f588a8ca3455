"""Dense complex polynomials, coefficients stored in ascending degree."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CPoly:
    """Polynomial sum_d coeffs[d] z**d.

    Trailing exact zeros are dropped on construction; nothing is pruned by
    tolerance. The zero polynomial has an empty coefficient tuple.
    """

    coeffs: tuple = ()

    def __post_init__(self):
        c = [complex(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_array(cls, arr):
        return cls(tuple(np.asarray(arr, dtype=complex)))

    @property
    def degree(self):
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def array(self):
        return np.array(self.coeffs, dtype=complex)

    def __call__(self, z):
        acc = 0j if np.isscalar(z) else np.zeros_like(z, dtype=complex)
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def __mul__(self, other):
        return mul(self, other)

    def __pow__(self, k):
        return pow(self, k)

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        out = np.zeros(n, dtype=complex)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return CPoly.from_array(out)

    def scale(self, c):
        return CPoly(tuple(c * x for x in self.coeffs))


ONE = CPoly((1.0,))


def mul(p, q):
    if p.is_zero() or q.is_zero():
        return CPoly()
    return CPoly.from_array(np.convolve(p.array(), q.array()))


def pow(p, k):
    if k < 0:
        raise ValueError("k must be non-negative")
    out = ONE
    for _ in range(k):
        out = mul(out, p)
    return out


def translate(p, t0):
    """Return q with q(t) = p(t + t0), by repeated synthetic division."""
    c = list(p.coeffs)
    n = len(c)
    t0 = complex(t0)
    # Taylor shift: after pass i, c[i] holds the i-th coefficient about t0
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            c[j] += t0 * c[j + 1]
    return CPoly(tuple(c))


def coeff_of(p, d):
    if d < 0:
        raise ValueError("degree must be non-negative")
    return p.coeffs[d] if d < len(p.coeffs) else 0j
