import numpy as np
import pytest
from scipy import integrate

from liesegang import degenerate as dg
from liesegang import rings
from liesegang.errors import BridgeInfeasible, InvalidParameter, TangentialTemplate

X1_EXACT = np.sqrt(70.0) / 4.0


@pytest.fixture(scope="module")
def template():
    return dg.default_template()


@pytest.fixture(scope="module")
def zeros12(template):
    return dg.template_zeros(template)


@pytest.fixture(scope="module")
def bridge(template, zeros12):
    x1, x2 = zeros12
    eps = dg.choose_epsilon(template, x1, x2)
    return dg.build_gap_bridge(template, x1, x2, eps)


@pytest.fixture(scope="module")
def partial(template, bridge):
    return dg.kernel_from_bridge(template, bridge, bridge.x1)


def test_template_zeros(template, zeros12):
    x1, x2 = zeros12
    assert x1 == pytest.approx(X1_EXACT, abs=1e-13)
    gamma = template.gamma_const
    assert gamma - x2 * x2 * template.cum(0.0, x1 / x2) == pytest.approx(0.0, abs=1e-12)
    assert x2 > x1


def test_template_generic(template, zeros12):
    x1, x2 = zeros12
    _, slope = dg._omega_star(template, x1)
    assert slope(x2) > 0


def test_choose_epsilon_inequality(template, zeros12, bridge, partial):
    x1, x2 = zeros12
    eps = bridge.epsilon
    assert eps < x2 / 2.0
    r = partial.r
    num = template.cum(0.0, 1.0) - partial.int_k
    den = template.gamma_const - partial.int_g
    assert num > 0 and den > 0
    assert num / den < 0.9 * r * r
    # eps -> 0 limit of the same ratio is the pure template head ratio
    head_k = template.cum(0.0, x1 / x2)
    head_g, _ = integrate.quad(
        lambda t: float(template.eval(t)) / (t * t), 1e-12, x1 / x2, limit=200
    )
    assert head_k / head_g < (x1 / x2) ** 2


def test_bridge_boundary_data(bridge):
    x_break = bridge.x2 + bridge.epsilon
    assert bridge.value(x_break) == pytest.approx(0.0, abs=1e-14)
    assert bridge.slope(x_break) == pytest.approx(0.0, abs=1e-14)


def test_bridge_monotone_and_below_gamma(template, bridge):
    xs = np.linspace(bridge.x2 - bridge.epsilon, bridge.x2 + 2 * bridge.epsilon, 64)
    vals = np.array([bridge.value(x) for x in xs])
    assert np.all(np.diff(vals) > 0)
    assert np.all(vals < template.gamma_const)


def test_bridge_c1_at_left_junction(template, bridge):
    x = bridge.x2 - bridge.epsilon
    _, slope_star = dg._omega_star(template, bridge.x1)
    assert bridge.slope(x + 1e-12) == pytest.approx(slope_star(x), rel=1e-6)


def test_bridge_rejects_bad_epsilon(template, zeros12):
    x1, x2 = zeros12
    with pytest.raises(InvalidParameter):
        dg.build_gap_bridge(template, x1, x2, x2)


def test_tangential_guard(template, zeros12):
    x1, _ = zeros12
    # omega*' is negative at 2.2, inside the first gap, so a doctored
    # second-zero location must be rejected
    with pytest.raises((TangentialTemplate, BridgeInfeasible)):
        dg.build_gap_bridge(template, x1, 2.2, 0.05)


def test_kernel_from_bridge_matches_template(template, bridge, partial):
    x1, x2, eps = bridge.x1, bridge.x2, bridge.epsilon
    for th in np.linspace(x1 / (x2 - eps) + 1e-9, 1.0 - 1e-9, 9):
        assert partial.eval(th) == pytest.approx(float(template.eval(th)), abs=1e-10)


def test_kernel_from_bridge_edge_value(template, bridge, partial):
    th = bridge.x1 / (bridge.x2 + bridge.epsilon)
    expect = 2.0 * th * template.gamma_const / bridge.x1**2
    assert partial.eval(th) == pytest.approx(expect, rel=1e-12)


def test_kernel_from_bridge_positive(partial):
    thetas = np.linspace(partial.r, 1.0 - 1e-9, 1000)
    assert np.all(partial.eval(thetas) > 0)


def test_k_def_consistency(template, bridge, partial):
    # (x^2/x1) d/dx [(omega_eps - Gamma)/x^2] reproduces K_eps(x1/x)
    gamma = template.gamma_const
    x1 = bridge.x1
    h = 1e-6
    for x in np.linspace(x1 * 1.05, (bridge.x2 + 2 * bridge.epsilon) * 0.95, 5):
        num = (bridge.value(x + h) - gamma) / (x + h) ** 2 - (
            bridge.value(x - h) - gamma
        ) / (x - h) ** 2
        lhs = (x * x / x1) * num / (2.0 * h)
        assert lhs == pytest.approx(partial.eval(x1 / x), abs=1e-9)


def test_int_k_eps_telescoped(template, bridge, partial):
    # telescoped closed form against direct quadrature
    val, _ = integrate.quad(
        partial.eval, partial.r, 1.0,
        points=[bridge.x1 / (bridge.x2 + bridge.epsilon), bridge.x1 / bridge.x2,
                bridge.x1 / (bridge.x2 - bridge.epsilon)],
        epsabs=0.0, epsrel=1e-11, limit=400,
    )
    assert partial.int_k == pytest.approx(val, abs=1e-10)


def test_construction_summary(construction):
    assert construction.r_star < construction.r
    assert 0.0 < construction.lambda_star < 1.0
    assert construction.n_power >= 1
    assert construction.z_eps <= construction.x2 + 2 * construction.epsilon


def test_mass_identities(construction):
    kern = construction.result
    template = construction.template
    assert abs(kern.cum(0.0, 1.0) - template.cum(0.0, 1.0)) < 1e-8
    g_int, _ = integrate.quad(
        lambda t: kern.eval(t) / (t * t), 1e-12, 1.0,
        points=[construction.r_star / 2.0, construction.r_star, construction.r],
        epsabs=0.0, epsrel=1e-10, limit=500,
    )
    assert abs(g_int - template.gamma_const) < 1e-8


def test_lambda_bracketing(construction):
    # bump second-moment averages must straddle r*^2
    r, rs = construction.r, construction.r_star

    def b1(t):
        return np.where((t >= 0) & (t <= rs / 2.0), t**4 * (rs / 2.0 - t) ** 4, 0.0)

    def b2(t):
        return np.where((t >= rs) & (t <= r), (t - rs) ** 4 * (r - t) ** 4, 0.0)

    i0b1, i2b1 = dg._bump_moments(b1, 0.0, rs / 2.0)
    i0b2, i2b2 = dg._bump_moments(b2, rs, r)
    assert i2b1 / i0b1 < rs * rs < i2b2 / i0b2


def test_head_continuity_and_flat_start(construction):
    kern = construction.result
    r = construction.r
    assert float(kern.eval(r - 1e-12)) == pytest.approx(float(kern.eval(r + 1e-12)), abs=1e-8)
    assert float(kern.eval(0.0)) == 0.0
    assert float(kern.eval(1e-8)) / 1e-8 < 1e-12  # K'(0) = 0


def test_tail_inherited(construction):
    kern = construction.result
    for d in (1e-3, 1e-4):
        ratio = float(kern.eval(1.0 - d)) / np.sqrt(d)
        assert ratio == pytest.approx(kern.k_coeff, rel=3 * d + 1e-6)


def test_kernel_cum_additive(construction):
    kern = construction.result
    a, b, c = 0.05, construction.r, 0.9
    assert kern.cum(a, b) + kern.cum(b, c) == pytest.approx(kern.cum(a, c), abs=1e-14)


def test_verify_degeneracy(construction):
    assert dg.verify_degeneracy(construction) is True


def test_pattern_is_degenerate(construction):
    pat = rings.solve_pattern(
        construction.result, max_zeros=4, root_tol=1e-12 * construction.x1
    )
    assert pat.classification is rings.Classification.DEGENERATE
    assert pat.x_star == pat.zeros[-1]
    assert pat.zeros[1] == pytest.approx(construction.x1, abs=1e-10)
    assert pat.zeros[2] == pytest.approx(
        construction.x2 + construction.epsilon, rel=1e-6
    )


def test_candidate_identities_past_breakdown(construction):
    kern = construction.result
    template = construction.template
    x_break = construction.x2 + construction.epsilon
    for delta in (1e-4, 1e-5):
        x = x_break + delta
        cand_pos = rings.omega_eval(kern, [0.0, construction.x1, x_break], x)
        expect = -0.5 * x * x * template.cum(x_break / x, 1.0)
        assert cand_pos == pytest.approx(expect, abs=1e-9)
        assert cand_pos < 0
        cand_neg = rings.omega_eval(kern, [0.0, construction.x1], x)
        assert cand_neg > 0


def test_both_hypotheses_inconsistent(construction):
    x_break = construction.x2 + construction.epsilon
    verdict = rings.classify_continuation(
        construction.result, [0.0, construction.x1, x_break], 0.05,
        root_tol=1e-12 * construction.x1,
    )
    assert verdict.degenerate
