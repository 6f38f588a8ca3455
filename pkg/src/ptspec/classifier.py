"""Reality classification of the potential by translation normalisation.

A potential t^m + P(t) whose t^(m-1) coefficient vanishes after a shift of
the variable, and whose shifted coefficients are then all real, has
infinitely many real eigenvalues. Otherwise only finitely many are real.
"""
import enum
from dataclasses import dataclass

from . import polyalg
from .asymcoeff import PotentialSpec


class Verdict(str, enum.Enum):
    PT = "PT"
    TRANSLATED_PT = "TRANSLATED_PT"
    GENERIC = "GENERIC"


@dataclass(frozen=True)
class RealityVerdict:
    verdict: Verdict
    z0: complex
    translated_a: tuple
    tolerance: float

    @property
    def has_real_spectrum(self):
        return self.verdict is not Verdict.GENERIC


def _shift(spec, t0):
    """Coefficients of Q(t + t0) with Q = t^m + P, as a new spec."""
    m = spec.m
    q = polyalg.translate(spec.full_poly(), t0)
    c = [polyalg.coeff_of(q, d) for d in range(m)]
    return PotentialSpec(m, tuple(c[m - j] for j in range(1, m + 1)))


def normalize_translation(spec):
    """Shift away the t^(m-1) term.

    Returns ``(spec', z0)`` where spec' has a'_1 = 0 and z0 = -(a_1/m) i is
    the matching translation of the original variable.
    """
    a1 = spec.a[0]
    if a1 == 0:
        return spec, 0j
    t0 = -a1 / spec.m
    out = _shift(spec, t0)
    # the shifted t^(m-1) coefficient is zero analytically
    out = PotentialSpec(spec.m, (0j,) + out.a[1:])
    return out, t0 * 1j


def translate_potential(spec, z0):
    """Potential translated forward by z0 in the original variable.

    With V(z) = -(iz)^m - P(iz) this returns the PotentialSpec of V(z + z0), so that
    ``normalize_translation`` of the result reports z0 on top of whatever
    the input already carried.
    """
    return _shift(spec, 1j * complex(z0))


def default_tolerance(spec):
    return 1e-10 * (1 + max(abs(x) for x in spec.a))


def _max_imag(a):
    return max(abs(x.imag) for x in a)


def classify_reality(spec, tol=None):
    """PT, TRANSLATED_PT or GENERIC, from coefficient realness."""
    if tol is None:
        tol = default_tolerance(spec)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if _max_imag(spec.a) <= tol:
        return RealityVerdict(Verdict.PT, 0j, spec.a, tol)
    norm, z0 = normalize_translation(spec)
    if _max_imag(norm.a) <= tol:
        return RealityVerdict(Verdict.TRANSLATED_PT, z0, norm.a, tol)
    return RealityVerdict(Verdict.GENERIC, z0, norm.a, tol)


def conjugate_pair_check(eigs, tol=1e-8):
    """Check that non-real eigenvalues come in conjugate pairs.

    ``eigs`` holds EigenvalueRecords or plain numbers. An eigenvalue counts as
    non-real when |Im lam| > tol (1 + |lam|), and a partner must lie within
    the same distance of its conjugate. Returns ``(ok, unpaired)``.
    """
    items = list(eigs)
    vals = [complex(getattr(e, "lam", e)) for e in items]
    used = set()
    unpaired = []
    for i, lam in enumerate(vals):
        scale = tol * (1 + abs(lam))
        if abs(lam.imag) <= scale or i in used:
            continue
        best = None
        for j, mu in enumerate(vals):
            if j == i or j in used:
                continue
            d = abs(mu - lam.conjugate())
            if d <= scale and (best is None or d < best[0]):
                best = (d, j)
        if best is None:
            unpaired.append(items[i])
        else:
            used.update((i, best[1]))
    return not unpaired, unpaired
