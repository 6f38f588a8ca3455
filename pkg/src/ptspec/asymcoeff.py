"""Coefficient tower for the large-eigenvalue asymptotics.

For a potential spec (m, a) with P(z) = a_1 z^(m-1) + ... + a_m this module
computes b_{j,k}, b_j, nu, K_{m,j}, c_j, the reverted coefficients d_j, and
the eigenvalue predictions built from them.
"""
import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import polyalg
from .polyalg import CPoly
from .specfun import beta, gen_binom


@dataclass(frozen=True)
class PotentialSpec:
    """Degree ``m`` and coefficients ``a = (a_1, ..., a_m)`` of P."""

    m: int
    a: tuple

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 3:
            raise ValueError(f"m must be an integer >= 3, got {self.m!r}")
        a = tuple(complex(x) for x in self.a)
        if len(a) != self.m:
            raise ValueError(f"expected {self.m} coefficients, got {len(a)}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "a", a)

    @classmethod
    def zero(cls, m):
        return cls(m, (0,) * m)

    @property
    def rho(self):
        return 0.5 + 1.0 / self.m

    @property
    def omega(self):
        return cmath.exp(2j * math.pi / (self.m + 2))

    def poly(self):
        """P as a CPoly (ascending coefficients)."""
        m = self.m
        return CPoly(tuple(self.a[m - 1 - d] for d in range(m)))

    def full_poly(self):
        """t^m + P(t)."""
        m = self.m
        return CPoly(tuple(self.a[m - 1 - d] for d in range(m)) + (1,))

    def is_real(self, tol=0.0):
        return max(abs(x.imag) for x in self.a) <= tol


def omega(m):
    return cmath.exp(2j * math.pi / (m + 2))


def _omega_pow(m, p):
    """omega**p for integer p, reduced mod m+2 before exponentiating."""
    return cmath.exp(2j * math.pi * ((p % (m + 2)) / (m + 2)))


def _sinpi(r):
    """sin(pi r) for rational r, exactly zero at integers."""
    r = Fraction(r)
    if r.denominator == 1:
        return 0.0
    return math.sin(math.pi * float(r - 2 * math.floor(r / 2)))


def g_transform(spec, ell):
    """Gauge rotation a_k -> omega^(-k ell) a_k."""
    m = spec.m
    return PotentialSpec(m, tuple(_omega_pow(m, -k * ell) * spec.a[k - 1]
                                  for k in range(1, m + 1)))


def compute_bjk(spec, jmax=None):
    """Table ``b[j, k]`` for 1 <= k <= j <= jmax; other entries are zero.

    b_{j,k} is the coefficient of z^(mk - j) in binom(1/2, k) P(z)^k.
    """
    m = spec.m
    jmax = m + 1 if jmax is None else jmax
    if jmax < 1:
        raise ValueError("jmax must be >= 1")
    P = spec.poly()
    b = np.zeros((jmax + 1, jmax + 1), dtype=complex)
    Pk = polyalg.ONE
    for k in range(1, jmax + 1):
        Pk = polyalg.mul(Pk, P)
        g = gen_binom(0.5, k)
        for j in range(k, jmax + 1):
            d = m * k - j
            if d >= 0:
                b[j, k] = g * polyalg.coeff_of(Pk, d)
    return b


def compute_b(spec, jmax=None):
    """b_j = sum_k b_{j,k}; index 0 unused (zero)."""
    return compute_bjk(spec, jmax).sum(axis=1)


def compute_nu(spec):
    m = spec.m
    if m % 2:
        return 0j
    return complex(compute_b(spec, m // 2 + 1)[m // 2 + 1])


def K0(m):
    return beta(0.5, 1.0 + 1.0 / m) / (2.0 * math.cos(math.pi / m))


def K_coefficient(m, j, k):
    """The constant K_{m,j,k} multiplying b_{j,k} in K_{m,j}."""
    if j == 1:
        return -2.0 / m
    if m % 2 == 0 and j == m // 2 + 1:
        return (2.0 / m) * (math.log(2.0) - sum(1.0 / (2 * s - 1) for s in range(1, k)))
    return beta(k - (j - 1) / m, (j - 1) / m - 0.5) / m


def compute_K(spec, jmax=None):
    m = spec.m
    jmax = m + 1 if jmax is None else jmax
    b = compute_bjk(spec, jmax)
    K = np.zeros(jmax + 1, dtype=complex)
    K[0] = K0(m)
    for j in range(1, jmax + 1):
        kmin = (j - 1) // m + 1
        K[j] = sum(K_coefficient(m, j, k) * b[j, k] for k in range(kmin, j + 1))
    return K


def c_from_K(m, K, nu):
    c = np.zeros(len(K), dtype=complex)
    for j in range(len(K)):
        if m % 2 == 0 and j == m // 2 + 1:
            c[j] = 2.0 * nu / m
        else:
            c[j] = K[j] * _sinpi(Fraction(2 * (1 - j), m)) / math.pi
    return c


def compute_c(spec):
    return c_from_K(spec.m, compute_K(spec), compute_nu(spec))


@dataclass(frozen=True)
class CoeffTable:
    m: int
    bjk: np.ndarray
    bj: np.ndarray
    nu: complex
    rm: complex
    mu: complex
    K: np.ndarray
    c: np.ndarray


def coeff_table(spec):
    m = spec.m
    bjk = compute_bjk(spec)
    nu = compute_nu(spec)
    K = compute_K(spec)
    return CoeffTable(m=m, bjk=bjk, bj=bjk.sum(axis=1), nu=nu,
                      rm=-m / 4 - nu, mu=m / 4 - nu, K=K, c=c_from_K(m, K, nu))


# -- power series helpers (coefficient arrays, ascending order) --------------

def _ps_mul(p, q, n):
    return np.convolve(p[:n], q[:n])[:n]


def _ps_pow(p, alpha, n):
    """(p)^alpha truncated to n terms; p[0] must be nonzero."""
    p = np.asarray(p, dtype=complex)[:n]
    p = np.concatenate([p, np.zeros(max(0, n - len(p)), dtype=complex)])
    out = np.zeros(n, dtype=complex)
    out[0] = p[0] ** alpha
    for k in range(1, n):
        acc = 0j
        for i in range(1, k + 1):
            acc += ((alpha + 1) * i - k) * p[i] * out[k - i]
        out[k] = acc / (k * p[0])
    return out


@dataclass(frozen=True)
class SeriesInverse:
    m: int
    d: np.ndarray

    @property
    def exponents(self):
        m = self.m
        return np.array([(2 * m / (m + 2)) * (1 - j / m) for j in range(m + 2)])


def invert_series(c, m):
    """Revert sum_j c_j lam^(rho - j/m) = x into lam = sum_j d_j x^(e_j).

    With s = x^(-2/(m+2)) and lam = x^(1/rho) D(s), the counting relation
    becomes sum_j c_j s^j D(s)^(rho - j/m) = 1, solved order by order for
    the coefficients of D up to s^(m+1).
    """
    c = np.asarray(c, dtype=complex)
    c0 = c[0]
    if abs(c0.imag) > 1e-14 * abs(c0) or c0.real <= 0:
        raise ValueError(f"c_0 must be real and positive, got {c0}")
    n = m + 2
    rho = 0.5 + 1.0 / m
    d = np.zeros(n, dtype=complex)
    d[0] = c0.real ** (-1.0 / rho)
    slope = c0 * rho * d[0] ** (rho - 1.0)
    for k in range(1, n):
        # residual of the order-k coefficient with d_k = 0
        g = 0j
        for j in range(0, k + 1):
            if c[j] == 0:
                continue
            g += c[j] * _ps_pow(d, rho - j / m, k + 1)[k - j]
        d[k] = -g / slope
    return SeriesInverse(m=m, d=d)


def predict_lambda(inv, n):
    """Eigenvalue estimate sum_j d_j (n + 1/2)^(e_j); n may be fractional."""
    if n < 0:
        raise ValueError("n must be >= 0")
    x = n + 0.5
    return complex(np.sum(inv.d * x ** inv.exponents))


def spacing_estimate(spec, n, constant="beta"):
    """Leading-order gap lambda_{n+1} - lambda_n.

    ``constant="beta"`` uses (2m/(m+2)) (pi / B(1/2, 1+1/m))^(2m/(m+2));
    ``constant="d0"`` uses (2m/(m+2)) d_0, the derivative of the leading
    term d_0 (n+1/2)^(2m/(m+2)).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    m = spec.m
    e = 2 * m / (m + 2)
    B = beta(0.5, 1 + 1 / m)
    if constant == "beta":
        amp = (math.pi / B) ** e
    elif constant == "d0":
        amp = (math.pi / (math.sin(math.pi / m) * B)) ** e
    else:
        raise ValueError(f"unknown constant {constant!r}")
    return e * amp * (n + 0.5) ** ((m - 2) / (m + 2))


def counting_sum(c, m, lam):
    lam = complex(lam)
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    if lam.imag == 0 and lam.real < 0:
        raise ValueError("lambda on the negative real axis (branch cut)")
    rho = 0.5 + 1.0 / m
    log_lam = cmath.log(lam)
    return sum(complex(c[j]) * cmath.exp((rho - j / m) * log_lam) for j in range(len(c)))


def counting_residual(c, m, lam, n):
    """sum_j c_j lam^(rho - j/m) - (n + 1/2), principal branch."""
    return counting_sum(c, m, lam) - (n + 0.5)
