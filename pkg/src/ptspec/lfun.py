"""The L-integral, its large-lambda expansion, determinant asymptotics and
the quantization-condition eigenvalue solver.

    L(a, lam) = int_0^inf ( sqrt(t^m + P(t) + lam) - t^(m/2)
                            - sum_{j <= (m+1)//2} b_j t^(m/2 - j)
                            - nu / (t + 1) ) dt
"""
import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .asymcoeff import (PotentialSpec, compute_b, compute_K, compute_nu,
                        g_transform, _omega_pow)
from .polyalg import CPoly
from .scaled import ScaledComplex
from .specfun import gen_binom


class BranchCollisionError(ArithmeticError):
    """The square-root argument comes too close to zero on [0, inf)."""


class QuadratureError(ArithmeticError):
    pass


class SectorError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LEvalConfig:
    """Quadrature settings. ``split_radius=None`` picks one from lambda and a."""

    split_radius: float = None
    rel_tol: float = 1e-13
    max_subdivisions: int = 500

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-4:
            raise ValueError("rel_tol must lie in (0, 1e-4]")
        if self.split_radius is not None and self.split_radius <= 0:
            raise ValueError("split_radius must be positive")


@dataclass(frozen=True)
class SectorSpec:
    """Closed arg(lambda) range where the determinant asymptotics apply."""

    m: int
    delta: float
    lower: float
    upper: float

    @classmethod
    def for_degree(cls, m, delta=1e-3):
        if m == 3:
            return cls(m, delta, -math.pi / 5 + delta, math.pi - delta)
        lo = math.pi - 4 * (m // 2) * math.pi / (m + 2) + delta
        hi = math.pi - 4 * math.pi / (m + 2) - delta
        return cls(m, delta, lo, hi)

    @property
    def middle(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, lam):
        return self.lower <= cmath.phase(lam) <= self.upper


def _split_radius(spec, lam, ratio=0.25):
    """Smallest convenient T with |P(t) + lam| <= ratio t^m for all t >= T."""
    m = spec.m
    T = max(1.0, (abs(lam) / ratio) ** (1.0 / m))
    absa = [abs(x) for x in spec.a]
    while abs(lam) + sum(absa[j - 1] * T ** (m - j) for j in range(1, m + 1)) > ratio * T ** m:
        T *= 1.2
    return T


def _binomial_tail_terms(spec, lam, T, kmax=400):
    """Expansion of sqrt(t^m + P(t) + lam) for t >= T.

    Returns ``{j: coeff}`` so that the root equals sum_j coeff_j t^(m/2 - j).
    Terms are accumulated until they are negligible at t = T.
    """
    m = spec.m
    base = spec.poly().array()
    base = np.concatenate([base, np.zeros(m - len(base), dtype=complex)])
    base[0] += lam
    terms = {}
    pk = np.array([1.0 + 0j])
    small = 0
    for k in range(kmax):
        if k:
            pk = np.convolve(pk, base)
        g = gen_binom(0.5, k)
        size = 0.0
        for d, coef in enumerate(pk):
            if coef == 0:
                continue
            j = m * k - d
            terms[j] = terms.get(j, 0j) + g * coef
            size = max(size, abs(g * coef) * T ** (m / 2 - j))
        if k > 2 and size < 1e-18 * T ** (m / 2):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    return terms


def _tail_integral(spec, lam, T, cut, nu):
    """int_T^inf of the subtracted integrand, via the binomial expansion.

    Terms t^(m/2 - j) with j <= cut are the subtracted ones; the t^-1 term
    (m even) pairs with nu/(t+1) to give nu*ln(1 + 1/T).
    """
    m = spec.m
    total = 0j
    for j, coef in _binomial_tail_terms(spec, lam, T).items():
        if j <= cut:
            continue
        if m % 2 == 0 and j == m // 2 + 1:
            continue
        e = m / 2 - j + 1
        total += coef * T ** e / (-e)
    if m % 2 == 0:
        total += nu * math.log1p(1.0 / T)
    return total


def _branch_breaks(Q, T, lam):
    """Points in (0, T) where the principal root flips sign, head to tail.

    The principal root of Q(t) jumps where Q crosses the negative real axis.
    Raises BranchCollisionError when Q nearly vanishes on the path.
    """
    scale = abs(lam) + 1.0
    im = CPoly(tuple(complex(c.imag) for c in Q.coeffs))
    breaks = []
    if im.is_zero():
        ts = np.linspace(0.0, T, 2001)
        if np.any(Q(ts).real <= 1e-12 * scale):
            raise BranchCollisionError("t^m + P(t) + lam is real and non-positive on the path")
        return breaks
    roots = np.roots(im.array().real[::-1])
    for r in sorted(roots):
        if abs(r.imag) > 1e-9 * (1 + abs(r)) or not 0 < r.real < T:
            continue
        t = r.real
        val = Q(t)
        if abs(val) < 1e-10 * scale:
            raise BranchCollisionError(f"root argument vanishes near t = {t:.6g}")
        if val.real < 0:
            h = 1e-7 * (1 + t)
            if np.sign(Q(t - h).imag) != np.sign(Q(t + h).imag):
                breaks.append(t)
    return breaks


def eval_L(spec, lam, cfg=None):
    """Evaluate L(a, lam) by adaptive quadrature on [0, T] plus a series tail."""
    cfg = cfg or LEvalConfig()
    lam = complex(lam)
    m = spec.m
    if lam == 0 or (lam.imag == 0 and lam.real < 0):
        raise SectorError("lambda must not lie on the closed negative real axis")
    T = cfg.split_radius or _split_radius(spec, lam)
    if T < (2 * abs(lam)) ** (1 / m):
        raise ValueError("split_radius must be >= (2|lam|)^(1/m)")
    cut = (m + 1) // 2
    b = compute_b(spec, max(cut, m // 2 + 1))
    nu = compute_nu(spec)

    coeffs = list(spec.full_poly().coeffs)
    coeffs[0] += lam
    Q = CPoly(tuple(coeffs))
    breaks = _branch_breaks(Q, T, lam)

    # sign of the continuous branch on each piece, fixed by the t -> inf end
    edges = [0.0] + breaks + [T]
    signs = [(-1) ** (len(breaks) - i) for i in range(len(edges) - 1)]

    def root(t):
        return cmath.sqrt(Q(t))

    head = 0j
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for (lo, hi), sgn in zip(zip(edges[:-1], edges[1:]), signs):
            try:
                val, _ = integrate.quad(root, lo, hi, complex_func=True,
                                        epsabs=0.0, epsrel=cfg.rel_tol,
                                        limit=cfg.max_subdivisions)
            except integrate.IntegrationWarning as exc:
                # roundoff-limited pieces are accepted at a looser tolerance
                val, _ = integrate.quad(root, lo, hi, complex_func=True,
                                        epsabs=0.0, epsrel=max(cfg.rel_tol, 1e-10),
                                        limit=4 * cfg.max_subdivisions)
                if not np.isfinite(val):
                    raise QuadratureError(str(exc)) from exc
            head += sgn * val

    # analytic part of the subtraction on [0, T]
    sub = T ** (m / 2 + 1) / (m / 2 + 1)
    for j in range(1, cut + 1):
        e = m / 2 - j + 1
        sub += b[j] * T ** e / e
    sub += nu * math.log1p(T)
    return head - sub + _tail_integral(spec, lam, T, cut, nu)


def eval_L_series(spec, lam):
    """sum_{j<=m+1} K_{m,j} lam^(1/2 + (1-j)/m) - (nu/m) ln(lam)."""
    lam = complex(lam)
    if lam == 0 or (lam.imag == 0 and lam.real < 0):
        raise SectorError("lambda must not lie on the branch cut")
    m = spec.m
    K = compute_K(spec)
    nu = compute_nu(spec)
    log_lam = cmath.log(lam)
    out = sum(K[j] * cmath.exp((0.5 + (1 - j) / m) * log_lam) for j in range(m + 2))
    return out - nu / m * log_lam


def _rotate(lam, m, p):
    """omega^p * lam with the argument kept continuous (not wrapped)."""
    r = abs(lam)
    phi = cmath.phase(lam) + 2 * math.pi * p / (m + 2)
    return cmath.rect(r, phi), phi


def _L_at(spec, lam, m, p, cfg):
    z, phi = _rotate(lam, m, p)
    if not -math.pi < phi < math.pi:
        raise SectorError(f"rotated argument {phi:.4f} leaves the cut plane")
    return eval_L(spec, z, cfg)


def asym_C(spec, lam, cfg=None, sector=None):
    """Leading-order large-lambda form of the spectral determinant.

    Returned as a ScaledComplex since the exponentials easily under- or
    overflow.
    """
    m = spec.m
    lam = complex(lam)
    sector = sector or SectorSpec.for_degree(m)
    if not sector.contains(lam):
        raise SectorError(f"arg(lambda) = {cmath.phase(lam):.4f} is outside "
                          f"[{sector.lower:.4f}, {sector.upper:.4f}]")
    L0 = eval_L(spec, lam, cfg)
    if m == 3:
        e1 = _L_at(g_transform(spec, 4), lam, m, -2, cfg) - L0
        e2 = -_L_at(g_transform(spec, 2), lam, m, -1, cfg) - L0
        c1 = -_omega_pow(m, -2)
        c2 = -1j * cmath.exp(2j * math.pi * 1.75 / (m + 2))
    else:
        nu = compute_nu(spec)
        e1 = _L_at(g_transform(spec, -1), lam, m, -2, cfg) - L0
        e2 = _L_at(g_transform(spec, 1), lam, m, 2, cfg) - L0
        c1 = cmath.exp(2j * math.pi * 0.5 / (m + 2))
        c2 = cmath.exp(2j * math.pi * (0.5 + 2 * nu) / (m + 2))
    return ScaledComplex.from_log(cmath.log(c1) + e1) + ScaledComplex.from_log(cmath.log(c2) + e2)


def quantization_lhs(spec, lam, cfg=None):
    """Left side of the quantization condition (error term dropped)."""
    m = spec.m
    if m == 3:
        return (-_L_at(g_transform(spec, 4), lam, m, -2, cfg)
                - _L_at(g_transform(spec, 2), lam, m, -1, cfg))
    return (_L_at(g_transform(spec, 1), lam, m, 2, cfg)
            - _L_at(g_transform(spec, -1), lam, m, -2, cfg))


def quantization_rhs(spec, n):
    m = spec.m
    nu = compute_nu(spec)
    return (2 * n + 1) * math.pi * 1j - 4 * nu * math.pi * 1j / (m + 2)


def quantization_solve(spec, n, seed, cfg=None, tol=1e-12, max_iter=60):
    """Solve the quantization condition for the n-th eigenvalue by secant
    iteration started at ``seed``."""
    m = spec.m
    target = quantization_rhs(spec, n)
    max_arg = math.pi / (m + 2)

    def g(lam):
        if abs(cmath.phase(lam)) > max_arg:
            raise SectorError(f"iterate {lam} left the sector |arg| <= {max_arg:.4f}")
        return quantization_lhs(spec, lam, cfg) - target

    x0 = complex(seed)
    x1 = x0 * (1 + 1e-4) + 1e-4
    g0, g1 = g(x0), g(x1)
    for _ in range(max_iter):
        if g1 == g0:
            break
        x2 = x1 - g1 * (x1 - x0) / (g1 - g0)
        if abs(x2 - x1) <= tol * (1 + abs(x2)):
            return x2
        x0, g0 = x1, g1
        x1, g1 = x2, g(x2)
    raise ConvergenceError(f"quantization solve for n={n} did not converge from {seed}")
