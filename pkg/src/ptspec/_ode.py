"""Compiled DOP853 stepping for v'' = q(z) v along straight complex segments.

The state is (v, v') and q is a polynomial given by complex coefficients in
ascending degree. The solution is renormalised whenever its size leaves
[1e-50, 1e50]; the discarded scale is returned as a natural logarithm.
"""
import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dop

_NS = _dop.N_STAGES
_A = np.ascontiguousarray(_dop.A[:_NS, :_NS])
_B = np.ascontiguousarray(_dop.B)
_C = np.ascontiguousarray(_dop.C[:_NS])
_E3 = np.ascontiguousarray(_dop.E3)
_E5 = np.ascontiguousarray(_dop.E5)

OK = 0
TOO_SMALL_STEP = 1
TOO_MANY_STEPS = 2

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ERR_EXP = -1.0 / 8.0


@njit(cache=True)
def _horner(coeffs, z):
    acc = 0j
    for i in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * z + coeffs[i]
    return acc


@njit(cache=True)
def _integrate(q, za, zb, v0, dv0, rtol, max_steps, A, B, C, E3, E5):
    ns = B.shape[0]
    dz = zb - za
    kv = np.empty(ns + 1, dtype=np.complex128)
    kd = np.empty(ns + 1, dtype=np.complex128)

    v = v0
    dv = dv0
    log_scale = 0.0
    s = 0.0
    # initial step from the local exponential rate
    rate = np.sqrt(abs(_horner(q, za))) * abs(dz) + 1.0
    h = min(1.0, 0.05 / rate)
    fv = dz * dv
    fd = dz * _horner(q, za) * v
    steps = 0
    status = OK
    while s < 1.0:
        if steps >= max_steps:
            status = TOO_MANY_STEPS
            break
        if h < 1e-14:
            status = TOO_SMALL_STEP
            break
        if s + h > 1.0:
            h = 1.0 - s
        accepted = False
        while not accepted:
            kv[0] = fv
            kd[0] = fd
            for i in range(1, ns):
                yv = v
                yd = dv
                for j in range(i):
                    yv += h * A[i, j] * kv[j]
                    yd += h * A[i, j] * kd[j]
                z = za + (s + C[i] * h) * dz
                kv[i] = dz * yd
                kd[i] = dz * _horner(q, z) * yv
            nv = v
            nd = dv
            for i in range(ns):
                nv += h * B[i] * kv[i]
                nd += h * B[i] * kd[i]
            znew = za + (s + h) * dz
            kv[ns] = dz * nd
            kd[ns] = dz * _horner(q, znew) * nv

            # mixed scale: v is measured against v'/k so zeros of v do not stall
            kloc = np.sqrt(abs(_horner(q, znew))) + 1.0
            mag = max(abs(v), abs(nv), abs(dv) / kloc, abs(nd) / kloc)
            sc_v = rtol * mag
            sc_d = rtol * mag * kloc
            e5v = 0j
            e5d = 0j
            e3v = 0j
            e3d = 0j
            for i in range(ns + 1):
                e5v += E5[i] * kv[i]
                e5d += E5[i] * kd[i]
                e3v += E3[i] * kv[i]
                e3d += E3[i] * kd[i]
            e5 = (abs(e5v) / sc_v) ** 2 + (abs(e5d) / sc_d) ** 2
            e3 = (abs(e3v) / sc_v) ** 2 + (abs(e3d) / sc_d) ** 2
            if e5 == 0.0 and e3 == 0.0:
                err = 0.0
            else:
                err = h * e5 / np.sqrt((e5 + 0.01 * e3) * 2.0)
            if err <= 1.0:
                accepted = True
                if err == 0.0:
                    factor = _MAX_FACTOR
                else:
                    factor = min(_MAX_FACTOR, _SAFETY * err ** _ERR_EXP)
                s += h
                v = nv
                dv = nd
                fv = kv[ns]
                fd = kd[ns]
                h = h * factor
            else:
                h = h * max(_MIN_FACTOR, _SAFETY * err ** _ERR_EXP)
                if h < 1e-14:
                    break
        if not accepted:
            status = TOO_SMALL_STEP
            break
        steps += 1
        big = max(abs(v), abs(dv))
        if big > 1e50 or big < 1e-50:
            log_scale += np.log(big)
            v = v / big
            dv = dv / big
            fv = fv / big
            fd = fd / big
    zfail = za + s * dz
    return v, dv, log_scale, status, steps, zfail


def integrate_segment(q, za, zb, v0, dv0, rtol=1e-10, max_steps=200_000):
    """Integrate v'' = q(z) v from ``za`` to ``zb`` along the straight segment.

    Returns ``(v, dv, log_scale, status, steps, z_stop)``; the true solution at
    ``zb`` is ``(v, dv) * exp(log_scale)``.
    """
    q = np.ascontiguousarray(q, dtype=np.complex128)
    return _integrate(q, complex(za), complex(zb), complex(v0), complex(dv0),
                      float(rtol), int(max_steps), _A, _B, _C, _E3, _E5)
