import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptspec import _ode
from ptspec.asymcoeff import PotentialSpec, compute_c, invert_series, predict_lambda
from ptspec.classifier import normalize_translation
from ptspec.shooting import (RayConfig, SectorViolation, SolutionSample, TrackResult,
                             eigenvalues_in_disk, find_eigenvalue, integrate_ray,
                             match_plan, spectral_det, spectrum, track_eigenvalues,
                             w01_exact, winding_number, wkb_init, wronskian)

LAM0 = 1.1562670719903794      # lowest m = 3, a = 0 eigenvalue, grid-scan value 1.15627


def test_ode_segment_exact_solution():
    # v'' = v has v = cosh z + 2 sinh z along any complex segment
    q = np.array([1.0 + 0j])
    za, zb = 0.3 + 0.1j, 4.0 - 2.0j
    v0 = cmath.cosh(za) + 2 * cmath.sinh(za)
    dv0 = cmath.sinh(za) + 2 * cmath.cosh(za)
    v, dv, ls, status, steps, _ = _ode.integrate_segment(q, za, zb, v0, dv0, rtol=1e-12)
    assert status == _ode.OK
    ref = cmath.cosh(zb) + 2 * cmath.sinh(zb)
    assert v * math.exp(ls) == pytest.approx(ref, rel=1e-10)
    assert dv * math.exp(ls) == pytest.approx(cmath.sinh(zb) + 2 * cmath.cosh(zb), rel=1e-10)


def test_ode_rescales_large_solutions():
    # growth by e^300 is carried in the log scale
    q = np.array([1.0 + 0j])
    v, dv, ls, status, _, _ = _ode.integrate_segment(q, 0j, 300 + 0j, 1 + 0j, 1 + 0j, rtol=1e-12)
    assert status == _ode.OK
    assert math.log(abs(v)) + ls == pytest.approx(300.0, rel=1e-10)


def test_ode_against_mpmath():
    q = np.array([2.0 + 1j, 0, 0, 1.0])     # v'' = (z^3 + 2 + i) v
    v, dv, ls, status, _, _ = _ode.integrate_segment(q, 0j, 1.5 + 0.5j, 1 + 0j, 0j, rtol=1e-12)
    assert status == _ode.OK
    # mpmath's Taylor integrator runs along the real parameter s of z = s w
    w = mpmath.mpc(1.5, 0.5)
    sol = mpmath.odefun(lambda s, y: [y[1], w * w * ((s * w) ** 3 + mpmath.mpc(2, 1)) * y[0]],
                        0, [mpmath.mpc(1), mpmath.mpc(0)])
    ref = sol(1)
    assert v * math.exp(ls) == pytest.approx(complex(ref[0]), rel=1e-10)
    assert dv * math.exp(ls) == pytest.approx(complex(ref[1]) / complex(w), rel=1e-10)


def test_ode_step_cap():
    q = np.array([1.0 + 0j])
    *_, status, steps, _ = _ode.integrate_segment(q, 0j, 500 + 0j, 1 + 0j, 0j, rtol=1e-12, max_steps=3)
    assert status == _ode.TOO_MANY_STEPS


def test_wkb_leading_form():
    spec = PotentialSpec.zero(3)
    z = 4.0
    s = wkb_init(spec, 0.0, z, refined=False)
    assert s.log_scale == pytest.approx(-0.4 * z ** 2.5)
    assert s.value == pytest.approx(z ** -0.75)
    assert s.derivative == pytest.approx(-z ** 0.75)
    with pytest.raises(SectorViolation):
        wkb_init(spec, 0.0, -4.0)


def test_solution_sample_rejects_zero():
    with pytest.raises(ValueError):
        SolutionSample(0j, 0j, 0.0)


def _airy_like():
    """f(0), f'(0) for m = 3, a = 0, lam = 0.

    There f = sqrt(4/(5 pi)) z^(1/2) K_{1/5}(2 z^(5/2) / 5), normalised to
    z^(-3/4) exp(-2 z^(5/2)/5) at infinity.
    """
    c = mpmath.sqrt(4 / (5 * mpmath.pi))
    f0 = c * mpmath.gamma(0.2) * mpmath.mpf(5) ** 0.2 / 2
    df0 = c * mpmath.gamma(-0.2) * mpmath.mpf(5) ** -0.2 / 2
    return complex(f0), complex(df0)


@pytest.mark.parametrize("R", [4.0, 6.0, 10.0])
def test_normalisation_matches_bessel_form(R):
    f0, df0 = _airy_like()
    s = integrate_ray(PotentialSpec.zero(3), 0.0, 0, RayConfig(start_radius=R, rtol=1e-12))
    scale = math.exp(s.log_scale)
    assert s.value * scale == pytest.approx(f0, rel=1e-9)
    assert s.derivative * scale == pytest.approx(df0, rel=1e-9)
    assert math.log(f0.real) == pytest.approx(0.468867505775854, rel=1e-12)


@pytest.mark.parametrize("m,seed,lam", [(3, 0, 2.0), (4, 1, 5 + 3j), (5, 2, -1 + 1j), (6, 3, 8.0)])
def test_w01_closed_form(m, seed, lam):
    rng = np.random.default_rng(seed)
    spec = PotentialSpec(m, tuple(0.5 * (rng.uniform(-1, 1, m) + 1j * rng.uniform(-1, 1, m))))
    f0 = integrate_ray(spec, lam, 0)
    f1 = integrate_ray(spec, lam, 1)
    w = wronskian(f0, f1)
    assert w.value == pytest.approx(w01_exact(spec), rel=1e-8)


def test_exact_and_numeric_normalisation_agree():
    spec = PotentialSpec(3, (0.3, -0.2j, 0.5))
    for lam in (2.0, 6 + 2j):
        a = spectral_det(spec, lam).value
        b = spectral_det(spec, lam, normalization="numeric").value
        assert a == pytest.approx(b, rel=1e-8)
    with pytest.raises(ValueError):
        spectral_det(spec, 2.0, normalization="other")


def test_wronskian_independent_of_matching_point():
    spec = PotentialSpec(4, (0.2, 0.1j, -0.3, 0.4))
    lam = 3 + 1j
    ws = []
    for z in (0j, 0.5 + 0.2j, -0.4j):
        f = {k: integrate_ray(spec, lam, k, z_end=z) for k in (-1, 1)}
        ws.append(wronskian(f[-1], f[1]).value)
    assert ws[1] == pytest.approx(ws[0], rel=1e-8)
    assert ws[2] == pytest.approx(ws[0], rel=1e-8)


def test_matching_plan_avoids_growth():
    # for large real lam the matching point sits near the real-axis
    # crossing of the anti-Stokes curve, about 0.417 lam^(1/3) for m = 3
    lam = 635.0
    plan = match_plan(PotentialSpec.zero(3), lam)
    assert plan.z_match.real / lam ** (1 / 3) == pytest.approx(0.417, abs=2e-3)
    assert abs(plan.z_match.imag) < 1e-8


def test_determinant_zero_and_nonzero():
    spec = PotentialSpec.zero(3)
    small = spectral_det(spec, LAM0).log_abs()
    between = spectral_det(spec, 2.5).log_abs()
    assert between - small > 20


def test_start_radius_doubling():
    spec = PotentialSpec.zero(3)
    inv = invert_series(compute_c(spec), 3)
    for n in range(6):
        seed = predict_lambda(inv, n)
        a = find_eigenvalue(spec, seed, RayConfig(start_radius=8.0)).lam
        b = find_eigenvalue(spec, seed, RayConfig(start_radius=16.0)).lam
        assert abs(a - b) < 1e-8 * abs(a)


def test_find_lowest_from_rough_seed():
    rec = find_eigenvalue(PotentialSpec.zero(3), 1.09)
    assert rec.lam.real == pytest.approx(1.15627, rel=1e-5)
    assert rec.lam == pytest.approx(LAM0, abs=1e-10)
    assert rec.det_residual < 1e-10


def test_series_seeds_give_increasing_real_eigenvalues():
    spec = PotentialSpec.zero(3)
    inv = invert_series(compute_c(spec), 3)
    lams = [find_eigenvalue(spec, predict_lambda(inv, n), n=n).lam for n in range(10)]
    assert all(abs(x.imag) < 1e-9 * abs(x) for x in lams)
    re = [x.real for x in lams]
    assert all(x < y for x, y in zip(re, re[1:]))
    assert re[:4] == pytest.approx([LAM0, 4.109228752809974, 7.562273854971666,
                                    11.314421820194552], rel=1e-10)


def test_disk_search():
    spec = PotentialSpec.zero(3)
    found = sorted(r.lam.real for r in eigenvalues_in_disk(spec, 5.0, 4.0))
    # |lam_0 - 5| = 3.84 also puts the lowest eigenvalue inside this disk
    assert found == pytest.approx([LAM0, 4.109228752809974, 7.562273854971666], rel=1e-10)
    count, _ = winding_number(spec, 5.0, 4.0)
    assert count == 3
    assert eigenvalues_in_disk(spec, 5.8, 1.0) == []
    assert winding_number(spec, 5.8, 1.0)[0] == 0


def test_spectrum_records(cubic_spectrum):
    assert [r.n for r in cubic_spectrum] == list(range(32))
    lams = [r.lam for r in cubic_spectrum]
    assert all(abs(x.imag) < 1e-9 * (1 + abs(x)) for x in lams)
    assert lams[12].real == pytest.approx(52.0814360527, rel=1e-10)
    assert lams[20].real == pytest.approx(94.2923191557, rel=1e-10)
    assert lams[30].real == pytest.approx(151.888622876, rel=1e-10)
    assert all(abs(r.counting_residual) < 0.1 for r in cubic_spectrum[10:])


def test_quartic_spectrum_real():
    recs = spectrum(PotentialSpec.zero(4), 0, 5)
    lams = [r.lam for r in recs]
    assert all(abs(x.imag) < 1e-9 * (1 + abs(x)) for x in lams)
    assert lams[5].real == pytest.approx(33.6942798766, rel=1e-10)


def test_non_pt_cubic_is_not_real():
    recs = spectrum(PotentialSpec(3, (0, 1j, 0)), 0, 4)
    assert all(abs(r.lam.imag) > 0.1 for r in recs)


def test_real_coefficients_give_conjugate_pair():
    # a2 = 3 pushes the two lowest levels into a complex pair
    spec = PotentialSpec(3, (0, 3, 0))
    a = find_eigenvalue(spec, 1.2 + 0.8j).lam
    b = find_eigenvalue(spec, 1.2 - 0.8j).lam
    assert a == pytest.approx(1.22585 + 0.76002j, abs=1e-5)
    assert b == pytest.approx(a.conjugate(), abs=1e-9)


def test_translation_leaves_spectrum_unchanged():
    spec = PotentialSpec(3, (3j, -2, 0))
    norm, z0 = normalize_translation(spec)
    assert z0 == pytest.approx(1.0)
    for lam in (2.0, 8 + 1j, 12.0):
        a, b = spectral_det(spec, lam), spectral_det(norm, lam)
        assert a.log_abs() == pytest.approx(b.log_abs(), abs=1e-7)
        assert a.phase() == pytest.approx(b.phase(), abs=1e-7)
    for rec in spectrum(norm, 0, 3):
        assert find_eigenvalue(spec, rec.lam * 1.01).lam == pytest.approx(rec.lam, rel=1e-9)


def test_real_homotopy_stays_real():
    s0 = PotentialSpec.zero(3)
    tr = track_eigenvalues(s0, PotentialSpec(3, (0, 1, 0)), [LAM0, 4.109228752809974], steps=10)
    assert np.all(np.abs(tr.paths[:, -1].imag) < 1e-9 * np.abs(tr.paths[:, -1]))
    assert tr.max_jump() < tr.trust_radius
    assert tr.departures() == []


def test_departure_classification():
    s = np.linspace(0, 1, 4)
    paths = np.array([[1.0, 1.2, 1.3 + 0.2j, 1.3 + 0.4j],
                      [1.5, 1.4, 1.3 - 0.2j, 1.3 - 0.4j],
                      [4.0, 4.0, 4.0 - 0.1j, 4.0 - 0.2j]])
    tr = TrackResult(s, paths, trust_radius=0.5)
    out = tr.departures()
    assert (s[2], (0, 1), "conjugate_pair") in out
    assert (s[2], (2,), "single") in out
    assert tr.max_jump() == pytest.approx(abs(1.4 - (1.3 - 0.2j)))


@settings(max_examples=8, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.5, 8), st.floats(-2, 2))
def test_determinant_conjugation_symmetry(a1, a2, re, im):
    # for real a, C(conj lam) = conj C(lam) up to a fixed phase, so
    # |C| agrees at conjugate points
    spec = PotentialSpec(3, (a1, a2, 0.0))
    lam = complex(re, im)
    x = spectral_det(spec, lam).log_abs()
    y = spectral_det(spec, lam.conjugate()).log_abs()
    assert x == pytest.approx(y, abs=1e-7)
