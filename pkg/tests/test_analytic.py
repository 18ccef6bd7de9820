import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quench_qgt import analytic, numeric
from quench_qgt.errors import AtCriticalPoint, GapClosed
from quench_qgt.model import group_velocity, r_tilde
from quench_qgt.quench import QuenchProtocol, energy_variance, overlap_coeffs

from conftest import random_points


def _mp_c(mi, mf, k):
    mi, mf, k = mp.mpf(mi), mp.mpf(mf), mp.mpf(k)
    ri = mp.sqrt(mi**2 + 1 + 2 * mi * mp.cos(k))
    rf = mp.sqrt(mf**2 + 1 + 2 * mf * mp.cos(k))
    return mf * (mi - mf) * mp.sin(k) ** 2 / (ri * rf**2)


def test_no_quench_coefficients():
    co = analytic.coefficients(QuenchProtocol(0.5, 0.5), np.pi / 3)
    assert co.c == 0 and co.d == 0
    assert co.a_i == co.a_f
    assert co.b == pytest.approx(-co.a_f, abs=1e-15)


def test_velocity_coefficient_example():
    co = analytic.coefficients(QuenchProtocol(0.5, 0.1), np.pi / 2)
    expected = float(mp.mpf("0.04") / (mp.sqrt(mp.mpf("1.25")) * mp.mpf("1.01")))
    assert co.c == pytest.approx(expected, abs=1e-15)
    assert co.c == pytest.approx(float(_mp_c(0.5, 0.1, mp.pi / 2)), abs=1e-15)
    assert co.c == pytest.approx(0.0354228, abs=1e-7)


def test_initial_metric_example():
    co = analytic.coefficients(QuenchProtocol(0.5, 0.1), 0.0)
    assert co.g_kk_i == pytest.approx(1 / 9, abs=1e-15)


def test_coefficients_gap_closed():
    with pytest.raises(GapClosed):
        analytic.coefficients(QuenchProtocol(1.0, 0.3), np.pi)


def test_g_kk_at_zero_time(rng):
    for proto, k in random_points(rng, 100):
        total, g0, g1, g2 = analytic.g_kk(proto, k, 0.0)
        assert total == pytest.approx(analytic.coefficients(proto, k).g_kk_i, abs=1e-14)


@given(st.floats(0.05, 2.5), st.floats(-np.pi, np.pi), st.floats(0, 100))
def test_no_quench_metric_constant(m, k, t):
    proto = QuenchProtocol(m, m)
    if r_tilde(proto.initial, k) < 1e-3:
        return
    total, g0, g1, g2 = analytic.g_kk(proto, k, t)
    gi = analytic.coefficients(proto, k).g_kk_i
    assert total == pytest.approx(gi, rel=1e-12, abs=1e-14)
    assert g1 == 0 and g2 == 0
    assert analytic.q_kt(proto, k, t) == 0
    assert analytic.g_tt(proto, k) == 0


def test_secular_growth():
    proto, k = QuenchProtocol(0.5, 0.1), np.pi / 2
    c2 = float(_mp_c(0.5, 0.1, mp.pi / 2) ** 2)
    assert c2 == pytest.approx(1.2548e-3, abs=1e-7)
    for t in (1e3, 1e4, 1e5):
        total, *_ = analytic.g_kk(proto, k, t)
        # linear term contributes at relative order 2 abs(B) / (abs(C) t) ~ 26 / t
        assert total / t**2 == pytest.approx(c2, rel=50.0 / t)


def test_g_tt_examples():
    assert analytic.g_tt(QuenchProtocol(0.9, 2.0), np.pi / 2) == pytest.approx(0.66850, abs=1e-5)
    for mi, mf in [(0.5, 0.1), (0.9, 2.0)]:
        assert analytic.g_tt(QuenchProtocol(mi, mf), np.pi) == 0
    assert analytic.g_tt(QuenchProtocol(0.7, 0.7), 1.0) == 0


def test_q_kt_zone_center():
    for t in (0.0, 1.3, 17.0):
        assert analytic.q_kt(QuenchProtocol(1.5, 0.1), 0.0, t) == 0


def test_q_kt_boundary_signs():
    k = -np.pi + 0.01
    assert analytic.q_kt(QuenchProtocol(1.1, 2.0), k, 0.0).imag > 0
    assert analytic.q_kt(QuenchProtocol(0.9, 2.0), k, 0.0).imag < 0


def test_q_kt_initial_imaginary_part(rng):
    for proto, k in random_points(rng, 50):
        co = analytic.coefficients(proto, k)
        assert analytic.q_kt(proto, k, 0.0).imag == pytest.approx(co.d * co.a_i, abs=1e-15)


def test_time_average_trivial():
    assert analytic.time_averaged_im_qkt(QuenchProtocol(0.8, 0.8), 1.0) == 0
    assert analytic.time_averaged_im_qkt(QuenchProtocol(0.8, 1.6), 0.0) == 0


def test_time_average_matches_long_run():
    proto, k = QuenchProtocol(0.5, 0.1), np.pi / 2
    rf = r_tilde(proto.final, k)
    horizon = 200 * np.pi / rf
    ts = np.linspace(0.0, horizon, 400_001)
    numeric_mean = np.trapezoid(np.imag(analytic.q_kt(proto, k, ts)), ts) / horizon
    assert analytic.time_averaged_im_qkt(proto, k) == pytest.approx(numeric_mean, abs=1e-4)


def test_curvature():
    proto = QuenchProtocol(0.9, 2.0)
    assert analytic.berry_curvature_kt(proto, 0.0, 3.0) == 0
    assert analytic.berry_curvature_kt(QuenchProtocol(1.2, 1.2), 0.4, 3.0) == 0
    for k in (0.3, 1.7, 3.0):
        a = analytic.berry_curvature_kt(proto, k, 4.2)
        assert a + analytic.berry_curvature_kt(proto, -k, 4.2) == 0
        assert a == -2 * analytic.q_kt(proto, k, 4.2).imag


def test_coefficient_identities(rng):
    for proto, k in random_points(rng, 500):
        co = analytic.coefficients(proto, k)
        c = overlap_coeffs(proto, k)
        assert co.b == pytest.approx(analytic.overlap_b(proto, k), abs=1e-12)
        # magnitude identity; the closed form is even in k while the velocity is odd
        vp = group_velocity(proto.final, k)
        assert abs(co.c) == pytest.approx(2 * abs(vp) * abs(c.alpha * c.beta), abs=1e-12)
        assert np.sign(co.c) == np.sign(proto.m_i - proto.m_f) or co.c == 0
        assert co.c**2 == pytest.approx(numeric.variance_velocity(proto, k), abs=1e-12)
        assert co.d**2 == pytest.approx(energy_variance(proto, k), abs=1e-12)
        assert co.g_kk_i == pytest.approx(co.a_i**2, abs=1e-12)


@settings(max_examples=200)
@given(st.floats(0.05, 2.5), st.floats(0.05, 2.5), st.floats(0.0, np.pi), st.floats(0.0, 50.0))
def test_parity(mi, mf, k, t):
    proto = QuenchProtocol(mi, mf)
    if min(r_tilde(proto.initial, k), r_tilde(proto.final, k)) < 1e-6:
        return
    assert analytic.q_kt(proto, k, t) + analytic.q_kt(proto, -k, t) == 0
    assert analytic.g_kk(proto, k, t)[0] == analytic.g_kk(proto, -k, t)[0]
    assert analytic.g_tt(proto, k) == analytic.g_tt(proto, -k)


def test_oscillation_period(rng):
    for proto, k in random_points(rng, 100):
        period = np.pi / (proto.j2 * r_tilde(proto.final, k))
        t = rng.uniform(0, 10)
        _, g0a, g1a, _ = analytic.g_kk(proto, k, t)
        _, g0b, g1b, _ = analytic.g_kk(proto, k, t + period)
        scale = max(1.0, abs(g0a))
        assert abs(g0a - g0b) < 1e-10 * scale
        assert abs(g1a - g1b) < 1e-10 * max(1.0, abs(g1a))
        ia, ib = analytic.q_kt(proto, k, t).imag, analytic.q_kt(proto, k, t + period).imag
        assert abs(ia - ib) < 1e-10 * max(1.0, abs(ia))


def test_cauchy_schwarz_is_saturated(rng):
    # a two-level state has a rank-one tensor, so the bound holds with equality
    for proto, k, t in random_points(rng, 500, t_range=(0.0, 20.0)):
        val = analytic.evaluate(proto, k, t)
        lhs = val.g_kk * val.g_tt
        rhs = val.re_qkt**2 + val.im_qkt**2
        assert lhs - rhs >= -1e-10
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, lhs)


def test_breakdown_and_tensor_assembly(rng):
    for proto, k, t in random_points(rng, 50, t_range=(0.0, 20.0)):
        total, g0, g1, g2 = analytic.g_kk(proto, k, t)
        assert total == g0 + g1 * t + g2 * t**2
        assert g2 >= 0
        q = analytic.qgt_tensor(proto, k, t)
        assert q[0, 1] == np.conj(q[1, 0])
        assert q[1, 0] == analytic.q_kt(proto, k, t)


def test_closed_forms_match_finite_differences(rng):
    cfg = numeric.FdConfig(dk=1e-5, dt=1e-5)
    for proto, k, t in random_points(rng, 200, t_range=(0.1, 20.0)):
        ref = analytic.qgt_tensor(proto, k, t)
        num = numeric.numeric_qgt(proto, k, t, cfg).as_array()
        assert np.max(np.abs(ref - num) / np.maximum(1.0, np.abs(ref))) < 1e-6


def test_breakdown_matches_heisenberg_moments(rng):
    cfg = numeric.FdConfig(dk=1e-5)
    for proto, k, t in random_points(rng, 30, t_range=(0.1, 10.0)):
        _, g0, g1, g2 = analytic.g_kk(proto, k, t)
        hm = numeric.heisenberg_metric(proto, k, t, cfg)
        assert hm.var_x == pytest.approx(g0, abs=1e-6)
        assert 2 * hm.cov_xv == pytest.approx(g1, abs=1e-6)
        assert hm.var_v == pytest.approx(g2, abs=1e-8)


@pytest.mark.parametrize(
    "mi, mf, signs",
    [
        (1.1, 2.0, (-1, -1, +1)),
        (0.9, 2.0, (+1, -1, -1)),
        (1.5, 0.1, (-1, +1, -1)),
    ],
)
def test_boundary_sign_diagnostic(mi, mf, signs):
    rep = analytic.boundary_sign_diagnostic(QuenchProtocol(mi, mf))
    assert (rep.a_i_sign_near_pi, rep.d_sign_negative_k, rep.initial_im_qkt_sign_negative_k) == signs
    assert rep.consistent
    assert rep.ket_order_im_sign_negative_k == -signs[2]


def test_peaks_seen_in_ket_ordering_are_positive_for_downward_crossing():
    # bra-k/ket-t Im Q near k=-pi stays positive at all times for 1.5 -> 0.1
    proto = QuenchProtocol(1.5, 0.1)
    k = -np.pi + 0.05
    for t in np.linspace(0.1, 20, 60):
        assert numeric.numeric_qgt(proto, k, t).q_kt.imag > 0


def test_boundary_diagnostic_critical():
    with pytest.raises(AtCriticalPoint):
        analytic.boundary_sign_diagnostic(QuenchProtocol(1.0, 2.0))
