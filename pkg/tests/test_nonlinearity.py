import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from planar_sps.grid import build_grid, gaussian_field, normalize_mass
from planar_sps.nonlinearity import (
    ALPHA0,
    NonlinearityRangeError,
    NonlinearitySpec,
    F_eval,
    check_f1,
    check_f2,
    check_f5,
    check_f6,
    check_f7,
    check_F_ratio_monotone,
    check_g_nonneg,
    check_h_nonneg,
    f_complex,
    f_eval,
    g_eval,
    gn_check,
    h_eval,
    moser_trudinger_integral,
    q_eval,
)

SPECS = [
    NonlinearitySpec("exp_b", 5.0),
    NonlinearitySpec("exp_b", 6.0, theta=0.5),
    NonlinearitySpec("exp_a", 5.0),
    NonlinearitySpec("exp_a", 3.0),
    NonlinearitySpec("power", 6.0, a=2.0),
]


@pytest.mark.parametrize("kind,p", [("exp_a", 2.0), ("exp_b", 4.0), ("power", 1.5), ("cubic", 5.0)])
def test_spec_validation(kind, p):
    with pytest.raises(ValueError):
        NonlinearitySpec(kind, p)


def test_spec_json_roundtrip():
    spec = NonlinearitySpec("exp_b", 5.5, theta=0.25)
    assert NonlinearitySpec.from_json(spec.to_json()) == spec
    assert "alpha0" not in spec.to_dict()


def test_zero_spec_flag():
    assert NonlinearitySpec("power", 4.0, a=0.0).is_zero
    assert NonlinearitySpec("exp_b", 5.0, theta=0.0).is_zero
    assert not NonlinearitySpec("exp_a", 5.0).is_zero


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.kind}-{s.p}")
def test_primitive_matches_quadrature_of_f(spec):
    for t in (0.05, 0.3, 0.8, 1.2):
        val, _ = integrate.quad(lambda s: f_eval(spec, s), 0.0, t, epsabs=0, epsrel=1e-12)
        assert F_eval(spec, t) == pytest.approx(val, rel=1e-9)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.kind}-{s.p}")
def test_parity(spec):
    t = np.linspace(0.01, 1.5, 40)
    np.testing.assert_allclose(f_eval(spec, -t), -f_eval(spec, t), rtol=1e-15)
    np.testing.assert_allclose(F_eval(spec, -t), F_eval(spec, t), rtol=1e-15)
    assert f_eval(spec, 0.0) == 0.0
    assert F_eval(spec, 0.0) == 0.0


def test_exp_a_series_against_mpmath():
    import mpmath

    spec = NonlinearitySpec("exp_a", 4.0)
    for t in (0.2, 0.9):
        ref = mpmath.quad(lambda s: s**3 * mpmath.exp(ALPHA0 * s * s), [0, t])
        assert F_eval(spec, t) == pytest.approx(float(ref), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0.0, 1.5), phase=st.floats(-math.pi, math.pi))
def test_complex_extension_is_gauge_covariant(r, phase):
    spec = NonlinearitySpec("exp_b", 5.0)
    z = r * complex(math.cos(phase), math.sin(phase))
    assert complex(f_complex(spec, z)) == pytest.approx(
        f_eval(spec, r) * complex(math.cos(phase), math.sin(phase)), rel=1e-12, abs=1e-300)


def test_q_is_f_over_t():
    spec = NonlinearitySpec("exp_a", 5.0)
    s = np.linspace(0.1, 1.0, 10)
    np.testing.assert_allclose(q_eval(spec, s) * s, f_eval(spec, s), rtol=1e-14)


def test_range_cap_raises():
    spec = NonlinearitySpec("exp_b", 5.0)
    with pytest.raises(NonlinearityRangeError):
        f_eval(spec, np.array([0.1, 8.0]))
    # power is never capped
    assert np.isfinite(f_eval(NonlinearitySpec("power", 5.0), 50.0))


@pytest.mark.parametrize("spec", [s for s in SPECS if s.kind != "power"],
                         ids=lambda s: f"{s.kind}-{s.p}")
def test_critical_growth(spec):
    assert check_f1(spec).passed


def test_power_is_not_critical():
    rep = check_f1(NonlinearitySpec("power", 6.0))
    assert not rep.details["below_grows"]


@pytest.mark.parametrize("spec", [SPECS[0], SPECS[2], SPECS[4]], ids=["exp_b", "exp_a", "power"])
def test_small_amplitude_conditions(spec):
    assert check_f2(spec).passed
    assert check_f5(spec).passed


def test_f2_fails_for_low_power():
    assert not check_f2(NonlinearitySpec("exp_a", 3.0)).passed


def test_f6_for_exp_b_with_beta_p():
    assert check_f6(NonlinearitySpec("exp_b", 5.0), beta=5.0).passed
    assert check_f6(NonlinearitySpec("exp_b", 7.0), beta=7.0).passed


def test_f6_fails_when_beta_too_large():
    assert not check_f6(NonlinearitySpec("power", 6.0), beta=8.0).passed


def test_f7_ratio_finite():
    rep = check_f7(NonlinearitySpec("exp_b", 5.0))
    assert rep.passed and rep.worst > 0


@pytest.mark.parametrize("p", [4.5, 5.0, 6.0, 9.0])
def test_h_nonnegative_with_zero_at_one(p):
    rep = check_h_nonneg(p)
    assert rep.passed
    assert h_eval(1.0, p) == 0.0
    assert h_eval(0.0, p) == pytest.approx(p - 4)


def test_h_rejects_bad_input():
    with pytest.raises(ValueError):
        h_eval(1.0, 4.0)
    with pytest.raises(ValueError):
        h_eval(-0.5, 5.0)


@pytest.mark.parametrize("spec", [SPECS[0], SPECS[1]], ids=["p5", "p6"])
def test_g_nonnegative(spec):
    rep = check_g_nonneg(spec)
    assert rep.passed
    assert rep.details["max_abs_g_at_t1"] == 0.0


def test_g_rejects_nonpositive_t():
    with pytest.raises(ValueError):
        g_eval(NonlinearitySpec("exp_b", 5.0), 0.0, 1.0)


def test_F_ratio_monotone_exp_b():
    assert check_F_ratio_monotone(NonlinearitySpec("exp_b", 5.0)).passed


def test_moser_trudinger_integral_of_gaussian():
    g = build_grid(12.0, 128)
    u = normalize_mass(gaussian_field(g), 0.1)
    a = 2.0
    amp2 = 0.1 / math.pi
    # int (exp(a amp2 e^{-r^2}) - 1) = pi * sum_k (a amp2)^k / (k! k)
    ref = math.pi * sum((a * amp2) ** k / (math.factorial(k) * k) for k in range(1, 30))
    assert moser_trudinger_integral(u, a) == pytest.approx(ref, rel=1e-10)
    with pytest.raises(ValueError):
        moser_trudinger_integral(u, 0.0)


def test_gn_ratio_scale_invariant():
    from planar_sps.grid import dilate

    g = build_grid(12.0, 256)
    u = gaussian_field(g, width=1.0)
    r0 = gn_check(u, 4.0)
    assert gn_check(dilate(u, 1.3), 4.0) == pytest.approx(r0, rel=1e-8)
    assert gn_check(3.0 * u, 4.0) == pytest.approx(r0, rel=1e-12)
