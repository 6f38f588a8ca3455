"""Eigenvalues by shooting on the spectral determinant.

The rotated equation -v'' + (z^m + P(z) + lam) v = 0 has a solution f that
decays in the sector S_0 around the positive real axis, normalised by
f ~ z^(r_m) exp(-F(z)). The solution decaying in S_k is obtained from f by
the gauge identity f_k(z) = f(omega^-k z, G^k(a), omega^(-mk) lam), so
every integration starts far out on the positive real axis of a
transformed problem. f_-1 and f_1 are carried inward to a matching point
chosen where neither is exponentially large (see ``match_plan``).

Eigenvalues are the zeros of C(a, lam) = W(f_-1, f_1) / W(f_0, f_1).
"""
import cmath
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import _ode
from .asymcoeff import (PotentialSpec, coeff_table, counting_residual,
                        g_transform, invert_series, predict_lambda, _omega_pow)
from .scaled import ScaledComplex

log = logging.getLogger(__name__)


class ShootingError(ArithmeticError):
    pass


class StepSizeCollapse(ShootingError):
    def __init__(self, msg, z):
        super().__init__(msg)
        self.z = z


class NonConvergence(ShootingError):
    pass


class DuplicateRoot(ShootingError):
    def __init__(self, msg, lam, known):
        super().__init__(msg)
        self.lam = lam
        self.known = known


class SectorViolation(ValueError):
    pass


class TrackingError(ShootingError):
    pass


@dataclass(frozen=True)
class RayConfig:
    """Integration settings for one ray.

    ``start_radius=None`` chooses R from lam and a so that the asymptotic
    start data are accurate to ``wkb_tol``.
    """

    start_radius: float = None
    rtol: float = 1e-11
    max_steps: int = 400_000
    wkb_tol: float = 1e-13
    sector_index: int = 0


@dataclass(frozen=True)
class SolutionSample:
    """(value, derivative) * exp(log_scale) of a solution at z0."""

    value: complex
    derivative: complex
    log_scale: float
    z0: complex = 0j

    def __post_init__(self):
        if self.value == 0 and self.derivative == 0:
            raise ValueError("solution sample is identically zero")


@dataclass
class EigenvalueRecord:
    n: int
    lam: complex
    source: str
    det_residual: float = math.nan
    counting_residual: complex = complex(math.nan, math.nan)


# -- asymptotic start data ----------------------------------------------------

def _riccati_coeffs(spec, lam, nmax):
    """Coefficients e_n of y = t^(m/2) sum_n e_n t^(-n/2) with y^2 - y' = Q.

    y is the logarithmic derivative (v = exp(-int y)) of the solution that
    decays along the positive axis.
    """
    m = spec.m
    u = np.zeros(nmax + 1, dtype=complex)
    for j in range(1, min(m, nmax // 2) + 1):
        u[2 * j] = spec.a[j - 1]
    if 2 * m <= nmax:
        u[2 * m] += lam
    e = np.zeros(nmax + 1, dtype=complex)
    e[0] = 1.0
    for n in range(1, nmax + 1):
        acc = u[n] - np.dot(e[1:n], e[n - 1:0:-1])
        if n - m - 2 >= 0:
            acc += 0.5 * (2 * m + 2 - n) * e[n - m - 2]
        e[n] = 0.5 * acc
    return e


def _phase_integral(spec, lam, z, nmax=160):
    """Return (Phi(z), y(z), err) with f(z) = exp(-Phi), f'(z) = -y f.

    Phi is normalised so that Phi - F(z) - (m/4 + nu) ln z -> 0 at infinity.
    ``err`` is the smallest term reached, an estimate of the truncation error.
    """
    m = spec.m
    e = _riccati_coeffs(spec, lam, nmax)
    z = complex(z)
    log_z = cmath.log(z)
    n = np.arange(nmax + 1)
    zp = np.exp(0.5 * (m - n) * log_z)
    ty = e * zp
    p = 0.5 * (m + 2 - n)
    p[m + 2] = 1.0
    tphi = ty * z / p
    tphi[m + 2] = e[m + 2] * log_z
    sizes = np.abs(ty) + np.abs(tphi)

    # nonzero coefficients recur with periods m + 2 (a = 0) and 2m (lam);
    # truncate the asymptotic series before the first window that is not
    # smaller than the one before it
    block = 2 * m + 2
    stop = m + 3 + block
    err = sizes[m + 3:stop].max()
    prev = err
    while stop + block <= nmax + 1:
        nxt = sizes[stop:stop + block].max()
        if nxt >= prev:
            break
        stop += block
        prev = err = nxt
        if nxt < 1e-17 * (1 + abs(tphi[:stop].sum())):
            break
    return complex(tphi[:stop].sum()), complex(ty[:stop].sum()), float(err)


def wkb_init(spec, lam, z, refined=True):
    """Start data for the S_0-recessive solution at large ``z``.

    ``refined=False`` gives the leading forms z^(r_m) exp(-F) and
    -z^(r_m + m/2) exp(-F); the default carries the asymptotic series of the
    logarithmic derivative until its terms stop decreasing.
    Magnitudes are returned through ``log_scale`` to avoid underflow.
    """
    m = spec.m
    z = complex(z)
    if abs(cmath.phase(z)) > 3 * math.pi / (m + 2):
        raise SectorViolation(f"arg z = {cmath.phase(z):.4f} outside the "
                              f"asymptotic sector |arg z| <= 3 pi/(m+2)")
    if refined:
        phi, y, _ = _phase_integral(spec, lam, z)
        mant = cmath.exp(-1j * phi.imag)
        return SolutionSample(mant, -y * mant, -phi.real, z)
    e = _riccati_coeffs(spec, lam, m + 2)
    log_z = cmath.log(z)
    F = sum(e[n] * cmath.exp(0.5 * (m + 2 - n) * log_z) / (0.5 * (m + 2 - n))
            for n in range(m + 2))
    r_m = -e[m + 2]  # e_{m+2} = m/4 + nu
    mant = cmath.exp(r_m * log_z - 1j * F.imag)
    return SolutionSample(mant, -cmath.exp(0.5 * m * log_z) * mant, -F.real, z)


def _start_radius(spec, lam, cfg):
    if cfg.start_radius is not None:
        return float(cfg.start_radius)
    m = spec.m
    absa = [abs(x) for x in spec.a]
    R = max(2.0, (8.0 * (1.0 + abs(lam))) ** (1.0 / m))
    for _ in range(60):
        small = abs(lam) + sum(absa[j - 1] * R ** (m - j) for j in range(1, m + 1))
        if small <= 0.125 * R ** m and R ** (0.5 * (m + 2)) >= 50.0:
            _, _, err = _phase_integral(spec, lam, R)
            if err <= cfg.wkb_tol:
                return R
        R *= 1.15
    raise ShootingError("could not find a start radius with accurate asymptotics")


# -- integration -------------------------------------------------------------

def _recessive_at(spec, lam, path, cfg):
    """Integrate the S_0-recessive solution of (spec, lam) from R through the
    points of ``path`` (this frame; points beyond R are skipped)."""
    R = _start_radius(spec, lam, cfg)
    start = wkb_init(spec, lam, R)
    q = np.array(spec.full_poly().coeffs, dtype=complex)
    q[0] += lam
    v, dv, ls = start.value, start.derivative, start.log_scale
    pts = [R] + [complex(z) for z in path[:-1] if abs(z) < R] + [complex(path[-1])]
    for za, zb in zip(pts[:-1], pts[1:]):
        if za == zb:
            continue
        v, dv, dls, status, _, zstop = _ode.integrate_segment(
            q, za, zb, v, dv, rtol=cfg.rtol, max_steps=cfg.max_steps)
        if status != _ode.OK:
            raise StepSizeCollapse(
                f"integration stalled at z = {zstop:.6g} (status {status})", zstop)
        ls += dls
    return v, dv, ls


def integrate_ray(spec, lam, k, cfg=None, z_end=0.0, via=None):
    """Sample f_k (the solution decaying in S_k) at ``z_end``.

    Points are in the original plane. The path starts far out on the ray
    arg z = 2 pi k/(m+2) and passes through ``via``; by default it runs in
    along the ray to radius |z_end| and then along a chord.
    """
    if k not in (-1, 0, 1):
        raise ValueError("sector index must be -1, 0 or 1")
    cfg = cfg or RayConfig()
    m = spec.m
    lam = complex(lam)
    z_end = complex(z_end)
    if via is None:
        via = [abs(z_end) * _omega_pow(m, k)]
    rspec = g_transform(spec, k)
    rlam = _omega_pow(m, -m * k) * lam
    rot = _omega_pow(m, -k)
    path = [rot * complex(z) for z in via] + [rot * z_end]
    v, dv, ls = _recessive_at(rspec, rlam, path, cfg)
    big = max(abs(v), abs(dv))
    return SolutionSample(v / big, rot * dv / big, ls + math.log(big), z_end)


# -- choice of matching point ---------------------------------------------------

_RADII = (0.6, 0.85, 1.1, 1.4, 1.8, 2.4)


def _continued_sqrt(vals, first):
    """sqrt of ``vals`` (last axis ordered along a path) continued from the
    branch value ``first`` at the start of each row."""
    r = np.sqrt(vals)
    prev = np.concatenate([np.broadcast_to(first, r.shape[:-1] + (1,)), r[..., :-1]], axis=-1)
    # sign flips where the principal root jumps; carry them along the path
    flip = np.abs(r - prev) > np.abs(r + prev)
    sign = np.where(np.cumsum(flip, axis=-1) % 2, -1.0, 1.0)
    return r * sign


def _cumulative(f, z):
    """Real part of the running trapezoid integral of f dz along each row."""
    inc = 0.5 * (f[..., 1:] + f[..., :-1]) * np.diff(z, axis=-1)
    return np.concatenate([np.zeros(f.shape[:-1] + (1,)), np.cumsum(inc.real, axis=-1)], axis=-1)


@dataclass(frozen=True)
class MatchPlan:
    z_match: complex
    via: dict          # k -> list of intermediate points (original plane)
    cost: float


class _Rays:
    """WKB exponent along the two rays, shared by all candidate chords."""

    def __init__(self, Q, m, R, r_min):
        self.Q = Q
        self.data = {}
        for k in (-1, 1):
            d = cmath.exp(2j * math.pi * k / (m + 2))
            r = np.geomspace(R, min(r_min, R), 200)
            z = r * d
            s0 = cmath.sqrt(Q(z[0]))
            if (s0 * d).real < 0:
                s0 = -s0
            sq = _continued_sqrt(Q(z), s0)
            G = _cumulative(sq, z)
            self.data[k] = (r, z, sq, G, np.minimum.accumulate(G))

    def score(self, k, radii, zs, npts=33):
        """Per candidate point: (bound on log|f_k|, via point, amplification)."""
        r, z, sq, G, gmin = self.data[k]
        idx = np.unique([int(np.argmin(np.abs(r - x))) for x in radii])
        start = z[idx]
        t = np.linspace(0.0, 1.0, npts)
        chord = start[:, None, None] + (zs[None, :, None] - start[:, None, None]) * t
        cs = _continued_sqrt(self.Q(chord), sq[idx][:, None, None])
        Gc = G[idx][:, None, None] + _cumulative(cs, chord)
        g_end = Gc[..., -1]
        amp = 2 * (g_end - np.minimum(Gc.min(axis=-1), gmin[idx][:, None]))
        # the WKB size of f_k, raised by the amplification in case the
        # chord crossed a Stokes line
        bound = amp - g_end
        j = np.argmin(bound, axis=0)
        cols = np.arange(len(zs))
        return bound[j, cols], start[j], amp[j, cols]


_GL_U, _GL_W = np.polynomial.legendre.leggauss(40)
_GL_U, _GL_W = 0.5 * (_GL_U + 1), 0.5 * _GL_W


def _action(Q, t, z):
    """Re int_t^z sqrt(Q) along the segment, up to sign, for a zero t of Q.

    The substitution zeta = t + (z - t) u^2 removes the square-root
    singularity at t.
    """
    d = z - t
    u = _GL_U
    zeta = t + d[..., None] * u * u
    g = Q(zeta) / (u * u)
    r = _continued_sqrt(g, np.sqrt(g[..., :1]))
    return np.abs(((2 * d[..., None] * u * u) * r * _GL_W).sum(axis=-1).real)


def _anti_stokes_point(Q, m):
    """Point between the two turning points that straddle arg z = 0.

    When both lie strictly between the rays arg z = +-2pi/(m+2), the
    solutions decaying along those rays are both of moderate size on the
    anti-Stokes curve that joins the turning points. Returns the point where
    that curve crosses the perpendicular bisector, or None.
    """
    roots = Q.roots()
    args = np.angle(roots)
    edge = 2 * math.pi / (m + 2)
    up = [r for r, a in zip(roots, args) if 0 <= a < edge]
    lo = [r for r, a in zip(roots, args) if -edge < a < 0]
    if len(up) != 1 or len(lo) != 1:
        return None
    tp, tm = complex(up[0]), complex(lo[0])
    mid = 0.5 * (tp + tm)
    d = 0.5j * (tp - tm)
    d = d if (d * mid.conjugate()).real <= 0 else -d  # toward the origin first
    h = lambda x: float(_action(Q, tm, np.asarray(mid + x * d)))
    xs = np.linspace(-1.0, 1.0, 81)
    vals = _action(Q, tm, mid + xs * d)
    i = int(np.argmin(vals))
    res = optimize.minimize_scalar(h, bounds=(xs[max(i - 1, 0)], xs[min(i + 1, 80)]),
                                   method="bounded", options={"xatol": 1e-12})
    return complex(mid + res.x * d)


def match_plan(spec, lam, cfg=None):
    """Pick the matching point and paths for f_-1 and f_1.

    A local error e at z' in either integration changes W_{-1,1} by about
    e |f_-1(z') f_1(z')| |Q(z')|^(1/2). Candidates are a matching point z
    and, for each solution, a path in along its ray to some radius and then
    a chord to z. They are scored with WKB magnitudes: log |f_-1(z) f_1(z)|
    plus the worst error amplification along the paths. The grid of z is
    refined once around the best coarse point.
    """
    cfg = cfg or RayConfig()
    m = spec.m
    lam = complex(lam)
    coeffs = np.array(spec.full_poly().coeffs, dtype=complex)
    coeffs[0] += lam
    Q = np.polynomial.polynomial.Polynomial(coeffs)
    ell = max(1.0, float(np.abs(Q.roots()).max()))
    R = _start_radius(g_transform(spec, 1), _omega_pow(m, -m) * lam, cfg)
    radii = [x * ell for x in _RADII if x * ell < R] or [R]
    rays = _Rays(Q, m, R, min(radii))

    z_as = _anti_stokes_point(Q, m)
    if z_as is not None:
        zs = np.array([z_as])
        sc = {k: rays.score(k, radii, zs) for k in (-1, 1)}
        cost = sc[-1][0][0] + sc[1][0][0] + 0.5 * math.log(abs(Q(z_as)) + 1e-300)
        return MatchPlan(z_as, {k: [complex(sc[k][1][0])] for k in (-1, 1)}, float(cost))

    def best(zs):
        sc = {k: rays.score(k, radii, zs) for k in (-1, 1)}
        total = sc[-1][0] + sc[1][0] + 0.5 * np.log(np.abs(Q(zs)) + 1e-300)
        i = int(np.argmin(total))
        return zs[i], {k: [complex(sc[k][1][i])] for k in (-1, 1)}, float(total[i])

    g = np.linspace(-1.2, 1.2, 13)
    zs = (ell * (g[:, None] + 1j * g[None, :])).ravel()
    z0, _, _ = best(zs[np.abs(zs) <= 1.2 * ell])
    f = np.linspace(-0.2, 0.2, 9) * ell
    z1, via, cost = best((z0 + f[:, None] + 1j * f[None, :]).ravel())
    return MatchPlan(complex(z1), via, cost)


def wronskian(s1, s2):
    """f g' - f' g in scaled form."""
    if s1.z0 != s2.z0:
        raise ValueError("samples taken at different points")
    return ScaledComplex(s1.value * s2.derivative - s1.derivative * s2.value,
                         s1.log_scale + s2.log_scale).normalized()


def _samples(spec, lam, cfg, ks=(-1, 0, 1)):
    return {k: integrate_ray(spec, lam, k, cfg) for k in ks}


def _matched_w(spec, lam, cfg):
    plan = match_plan(spec, lam, cfg)
    f = {k: integrate_ray(spec, lam, k, cfg, plan.z_match, plan.via[k]) for k in (-1, 1)}
    return wronskian(f[-1], f[1])


def w01_exact(spec):
    """W(f_0, f_1) = 2 omega^mu(a), independent of lambda."""
    m = spec.m
    mu = coeff_table(spec).mu
    return 2 * cmath.exp(2j * math.pi * mu / (m + 2))


def spectral_det(spec, lam, cfg=None, normalization="exact"):
    """C(a, lam) = W_{-1,1} / W_{0,1} as a ScaledComplex.

    The denominator is lambda-independent. ``normalization="exact"`` uses its
    closed form; ``"numeric"`` integrates f_0 as well. The numeric quotient
    loses all accuracy for large lambda near the positive axis, where f_0 and
    f_1 nearly coincide at the origin.
    """
    if normalization == "exact":
        return _matched_w(spec, lam, cfg) / w01_exact(spec)
    if normalization != "numeric":
        raise ValueError("normalization must be 'exact' or 'numeric'")
    s = _samples(spec, lam, cfg)
    return wronskian(s[-1], s[1]) / wronskian(s[0], s[1])


# -- root finding --------------------------------------------------------------

def _muller(fun, x0, x1, x2, tol_abs, tol_rel, max_iter):
    """Muller iteration on a function returning ScaledComplex values.

    Returns (root, last step size, iterations).
    """
    xs = [complex(x0), complex(x1), complex(x2)]
    fs = [fun(x) for x in xs]
    for it in range(max_iter):
        ref = max(f.log_abs() for f in fs)
        if not math.isfinite(ref):
            ref = 0.0
        f0, f1, f2 = (f.scaled_to(ref) for f in fs)
        x0, x1, x2 = xs
        if f2 == 0:
            return x2, 0.0, it
        h1, h2 = x1 - x0, x2 - x1
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = cmath.sqrt(b * b - 4 * f2 * a)
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if den == 0:
            dx = (abs(x2) + 1) * 1e-3
        else:
            dx = -2 * f2 / den
        x3 = x2 + dx
        xs = [x1, x2, x3]
        fs = [fs[1], fs[2], fun(x3)]
        if abs(dx) <= tol_abs + tol_rel * abs(x3):
            return x3, abs(dx), it + 1
    raise NonConvergence(f"Muller iteration did not converge in {max_iter} steps "
                         f"(last iterate {xs[-1]})")


def find_eigenvalue(spec, seed, cfg=None, tol_abs=1e-12, tol_rel=1e-12,
                    max_iter=40, known=(), dedupe_tol=1e-7, n=None, deflate=()):
    """Polish a determinant zero from ``seed`` by Muller iteration.

    ``det_residual`` is the final Newton-like step |C / C'| relative to
    1 + |lam|. Raises DuplicateRoot if the zero is within ``dedupe_tol``
    (relative) of one of ``known``. Zeros listed in ``deflate`` are divided
    out of C first, which separates nearly coincident roots.
    """
    seed = complex(seed)
    h = 1e-3 * (1 + abs(seed))
    deflate = [complex(r) for r in deflate]

    def fun(x):
        val = spectral_det(spec, x, cfg)
        for r in deflate:
            val = val / (x - r) if x != r else val / (1e-300 + 0j)
        return val

    lam, step, _ = _muller(fun, seed - h, seed + h, seed, tol_abs, tol_rel, max_iter)
    for other in known:
        if abs(lam - other) <= dedupe_tol * (1 + abs(lam)):
            raise DuplicateRoot(f"seed {seed} converged to known eigenvalue {other}",
                                lam, other)
    rec = EigenvalueRecord(n=-1 if n is None else n, lam=lam, source="shooting",
                           det_residual=step / (1 + abs(lam)))
    if n is not None:
        rec.counting_residual = counting_residual(coeff_table(spec).c, spec.m, lam, n)
    return rec


def winding_number(spec, center, radius, cfg=None, max_samples=8192, nmin=64):
    """Zeros of C inside the circle, by accumulating the phase of C.

    Returns (count, samples) where samples is a list of (lam, log C) around
    the circle with the imaginary parts unwrapped.
    """
    pts, logs = _contour(spec, center, radius, cfg, max_samples, nmin)
    total = logs[-1].imag - logs[0].imag
    count = total / (2 * math.pi)
    nearest = round(count)
    if abs(count - nearest) > 1e-6:
        raise ShootingError(f"non-integer winding {count:.6f}")
    return int(nearest), list(zip(pts, logs))


def _contour(spec, center, radius, cfg, max_samples, nmin):
    """Adaptive sampling of log C on a circle; closed (last = first angle)."""
    def log_det(theta):
        lam = center + radius * cmath.exp(1j * theta)
        return spectral_det(spec, lam, cfg).log()

    thetas = list(np.linspace(0.0, 2 * math.pi, nmin + 1))
    vals = [log_det(t) for t in thetas[:-1]]
    vals.append(vals[0])
    i = 0
    # refine until consecutive phase jumps and modulus changes are small
    while i < len(thetas) - 1:
        dphi = _wrap(vals[i + 1].imag - vals[i].imag)
        dmod = abs(vals[i + 1].real - vals[i].real)
        if abs(dphi) > math.pi / 4 or dmod > 1.0:
            if len(thetas) >= max_samples:
                raise ShootingError("phase sampling hit the sample cap; "
                                    "a zero may lie on the contour")
            tm = 0.5 * (thetas[i] + thetas[i + 1])
            thetas.insert(i + 1, tm)
            vals.insert(i + 1, log_det(tm))
            continue
        i += 1
    unwrapped = [vals[0]]
    for v_prev, v in zip(vals[:-1], vals[1:]):
        im = unwrapped[-1].imag + _wrap(v.imag - v_prev.imag)
        unwrapped.append(complex(v.real, im))
    pts = [center + radius * cmath.exp(1j * t) for t in thetas]
    return pts, unwrapped


def _wrap(x):
    return (x + math.pi) % (2 * math.pi) - math.pi


def _moment_roots(samples, count, center):
    """Roots from power sums (1/2 pi i) int (lam-center)^p dlogC, p = 1..count."""
    pts = np.array([p for p, _ in samples]) - center
    lg = np.array([v for _, v in samples])
    mid = 0.5 * (pts[1:] + pts[:-1])
    dlog = np.diff(lg)
    s = [np.sum(mid ** p * dlog) / (2j * math.pi) for p in range(1, count + 1)]
    # Newton identities -> elementary symmetric polynomials
    e = [1.0 + 0j]
    for k in range(1, count + 1):
        acc = sum((-1) ** (i - 1) * e[k - i] * s[i - 1] for i in range(1, k + 1))
        e.append(acc / k)
    coeffs = [(-1) ** k * e[k] for k in range(count + 1)]
    return list(np.roots(coeffs) + center)


def eigenvalues_in_disk(spec, center, radius, cfg=None, depth=0, max_depth=6,
                        _radius_retry=0):
    """All determinant zeros inside |lam - center| < radius."""
    try:
        count, samples = winding_number(spec, center, radius, cfg)
    except ShootingError:
        if _radius_retry >= 3:
            raise
        return eigenvalues_in_disk(spec, center, radius * (1 + 0.013 * (_radius_retry + 1)),
                                   cfg, depth, max_depth, _radius_retry + 1)
    log.debug("disk c=%s r=%.4g holds %d zeros", center, radius, count)
    if count == 0:
        return []
    if count <= 4:
        found = []
        for guess in _moment_roots(samples, count, center):
            try:
                rec = find_eigenvalue(spec, guess, cfg, known=[r.lam for r in found])
            except (NonConvergence, DuplicateRoot):
                break
            if abs(rec.lam - center) < radius:
                found.append(rec)
        if len(found) == count:
            return found
    if depth >= max_depth:
        raise ShootingError(f"could not separate {count} zeros in disk "
                            f"center={center} radius={radius}")
    # cover the disk by seven disks of radius 0.55 r and merge
    subs = [center] + [center + 0.5 * math.sqrt(3) * radius * cmath.exp(1j * (k * math.pi / 3 + 0.1))
                       for k in range(6)]
    found = []
    for c in subs:
        for rec in eigenvalues_in_disk(spec, c, 0.55 * radius, cfg, depth + 1, max_depth):
            if abs(rec.lam - center) >= radius:
                continue
            if all(abs(rec.lam - f.lam) > 1e-7 * (1 + abs(rec.lam)) for f in found):
                found.append(rec)
    if len(found) != count:
        raise ShootingError(f"subdivision found {len(found)} zeros, winding says {count}")
    return found


# -- continuation --------------------------------------------------------------

def _lerp_spec(a_from, a_to, s):
    m = a_from.m
    return PotentialSpec(m, tuple((1 - s) * x + s * y for x, y in zip(a_from.a, a_to.a)))


@dataclass
class TrackResult:
    s: np.ndarray
    paths: np.ndarray          # shape (n_paths, n_points)
    collisions: list = field(default_factory=list)
    trust_radius: float = 0.0

    @property
    def path(self):
        return self.paths[0]

    def max_jump(self):
        if self.paths.shape[1] < 2:
            return 0.0
        return float(np.abs(np.diff(self.paths, axis=1)).max())

    def departures(self, tol=1e-6):
        """Where paths leave the real axis.

        Returns a list of ``(s, indices, kind)``. ``kind`` is "conjugate_pair"
        when two paths leave at the same step as conjugates of each other,
        otherwise "single". A path counts as real while
        |Im lam| <= tol (1 + |lam|).
        """
        real = np.abs(self.paths.imag) <= tol * (1 + np.abs(self.paths))
        left = {}
        for i in range(self.paths.shape[0]):
            for k in range(1, self.paths.shape[1]):
                if real[i, k - 1] and not real[i, k]:
                    left.setdefault(k, []).append(i)
                    break
        out = []
        for k in sorted(left):
            rest = list(left[k])
            while rest:
                i = rest.pop(0)
                li = self.paths[i, k]
                partner = None
                for j in rest:
                    lj = self.paths[j, k]
                    if abs(lj - li.conjugate()) <= 10 * tol * (1 + abs(li)) + 0.1 * abs(li.imag):
                        partner = j
                        break
                if partner is None:
                    out.append((float(self.s[k]), (i,), "single"))
                else:
                    rest.remove(partner)
                    out.append((float(self.s[k]), (i, partner), "conjugate_pair"))
        return out


def track_eigenvalues(spec_from, spec_to, starts, steps=40, cfg=None,
                      trust_radius=0.5, min_ds=1e-6, collision_tol=1e-6):
    """Follow eigenvalues along a(s) = (1-s) a_from + s a_to, s in [0, 1].

    Each accepted step moves every path by less than ``trust_radius``;
    otherwise the step is halved. Paths meeting within ``collision_tol`` are
    recorded in ``collisions`` as (s, i, j) and tracking continues.
    """
    if spec_from.m != spec_to.m:
        raise ValueError("specs must share m")
    cur = [complex(x) for x in starts]
    prev = list(cur)
    s = 0.0
    ds = 1.0 / steps
    ss = [0.0]
    out = [list(cur)]
    collisions = []
    while s < 1.0 - 1e-14:
        ds = min(ds, 1.0 - s)
        spec = _lerp_spec(spec_from, spec_to, s + ds)
        # linear extrapolation from the last two points
        new = []
        ok = True
        for c, p in zip(cur, prev):
            guess = c + (c - p) * (ds / max(ss[-1] - ss[-2], ds) if len(ss) > 1 else 0.0)
            try:
                lam = find_eigenvalue(spec, guess, cfg).lam
                same = [x for x in new if abs(lam - x) <= 1e-7 * (1 + abs(x))]
                if same:
                    # two paths landed on one root; look for the partner
                    lam = find_eigenvalue(spec, guess, cfg, deflate=same).lam
            except NonConvergence:
                ok = False
                break
            if abs(lam - c) >= trust_radius:
                ok = False
                break
            new.append(lam)
        if not ok:
            ds *= 0.5
            if ds < min_ds:
                raise TrackingError(f"step size collapsed at s = {s:.6g}")
            continue
        prev, cur = cur, new
        s += ds
        ss.append(s)
        out.append(list(cur))
        for i in range(len(cur)):
            for j in range(i + 1, len(cur)):
                if abs(cur[i] - cur[j]) <= collision_tol * (1 + abs(cur[i])):
                    collisions.append((s, i, j))
                    log.warning("paths %d and %d collide at s = %.6g", i, j, s)
        ds = min(2 * ds, 1.0 / steps)
    return TrackResult(np.array(ss), np.array(out).T, collisions, trust_radius)


def track_eigenvalue(spec_from, spec_to, lam_start, steps=40, cfg=None, trust_radius=0.5):
    """Single-path version of ``track_eigenvalues``; returns the path array."""
    if spec_from == spec_to:
        return np.full(steps + 1, complex(lam_start))
    return track_eigenvalues(spec_from, spec_to, [lam_start], steps, cfg,
                             trust_radius).path


# -- spectrum pipeline -------------------------------------------------------

class SpectrumGap(ShootingError):
    """Some requested indices could not be resolved; partial results attached."""

    def __init__(self, msg, records, missing):
        super().__init__(msg)
        self.records = records
        self.missing = missing


def default_cutoff(spec):
    return 6


def spectrum(spec, n_min, n_max, cfg=None, cutoff=None, seed_source="quantization"):
    """Eigenvalues with indices n_min..n_max, ordered by magnitude.

    Indices below ``cutoff`` come from an argument-principle search of an
    origin-centred disk; higher ones are seeded by the quantization condition
    (or the reverted series) and polished.
    """
    from . import lfun

    if n_min < 0 or n_max < n_min:
        raise ValueError("need 0 <= n_min <= n_max")
    if seed_source not in ("quantization", "series"):
        raise ValueError("seed_source must be 'quantization' or 'series'")
    cutoff = default_cutoff(spec) if cutoff is None else cutoff
    table = coeff_table(spec)
    inv = invert_series(table.c, spec.m)

    records = []
    first = n_min
    if n_min < cutoff:
        radius = _disk_radius(spec, inv, cutoff)
        low = sorted(eigenvalues_in_disk(spec, 0j, radius, cfg), key=lambda r: abs(r.lam))
        for i, r in enumerate(low):
            r.n = i
        records.extend(low)
        first = len(low)
    known = [r.lam for r in records]
    missing = []
    for n in range(first, n_max + 1):
        seed = predict_lambda(inv, n)
        if seed_source == "quantization":
            try:
                seed = lfun.quantization_solve(spec, n, seed)
            except (ArithmeticError, ValueError) as exc:
                log.info("quantization seed failed for n=%d (%s); using series", n, exc)
        try:
            rec = find_eigenvalue(spec, seed, cfg, known=known, n=n)
        except (NonConvergence, DuplicateRoot) as exc:
            log.warning("no eigenvalue for n=%d: %s", n, exc)
            missing.append(n)
            continue
        records.append(rec)
        known.append(rec.lam)

    records.sort(key=lambda r: abs(r.lam))
    if any(r1.n >= r2.n for r1, r2 in zip(records[:-1], records[1:])):
        log.warning("index order disagrees with magnitude order: %s",
                    [(r.n, r.lam) for r in records])
    for r in records:
        if not (r.lam.imag == 0 and r.lam.real < 0):
            r.counting_residual = counting_residual(table.c, spec.m, r.lam, r.n)
    out = [r for r in records if n_min <= r.n <= n_max]
    if missing:
        raise SpectrumGap(f"indices {missing} unresolved", out, missing)
    return out


def _disk_radius(spec, inv, cutoff):
    """|lambda| midway between the predicted (cutoff-1)-th and cutoff-th values."""
    r = abs(predict_lambda(inv, cutoff - 0.5))
    lead = replace(inv, d=np.concatenate([inv.d[:1], np.zeros(len(inv.d) - 1)]))
    r_lead = abs(predict_lambda(lead, cutoff - 0.5))
    # low-index series values are unreliable when a is large; keep it sane
    if not math.isfinite(r) or r < 0.5 * r_lead or r > 2 * r_lead:
        r = r_lead
    return r + abs(spec.a[-1])
