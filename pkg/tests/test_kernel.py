import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from liesegang import kernel as kn
from liesegang.errors import InvalidParameter, SingularAtZero
from liesegang.profile import phi_eval, psi_at_source


def raw_gauss_jacobi_g(profile, theta, tol=1e-10):
    """Oracle: the unsubstituted density integral with the endpoint
    singularity handled by a Gauss-Jacobi weight."""
    al = profile.params.alpha
    t = abs(theta)

    def f(z):
        d = z * z - al * al * t * t
        if d <= 0.0:
            return 0.0
        return (
            al / np.sqrt(np.pi)
            * np.exp(-z * z * al * al * (1 - theta) ** 2 / (4.0 * d))
            * phi_eval(profile, z) / z**2 / np.sqrt(z + al * t)
        )

    val, _ = integrate.quad(
        f, al * t, al, weight="alg", wvar=(-0.5, 0.0),
        epsabs=0.0, epsrel=tol, limit=400,
    )
    return val


# ---------------------------------------------------------------------------
# synthetic template (closed-form Beta integrals)


def test_synthetic_total_mass(synthetic):
    assert synthetic.cum(0.0, 1.0) == pytest.approx(16.0 / 105.0, abs=1e-15)


def test_synthetic_gamma(synthetic):
    assert synthetic.gamma_const == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_synthetic_empty_interval(synthetic):
    assert synthetic.cum(0.0, 0.0) == 0.0


def test_synthetic_sigma_range():
    with pytest.raises(InvalidParameter):
        kn.synthetic_kernel(0.7, 1.0)
    with pytest.raises(InvalidParameter):
        kn.synthetic_kernel(0.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_synthetic_cum_additive(a, b, c):
    kern = kn.synthetic_kernel(0.5, 1.0)
    lo, mid, hi = sorted((a, b, c))
    assert kern.cum(lo, mid) + kern.cum(mid, hi) == pytest.approx(
        kern.cum(lo, hi), abs=1e-12
    )


# ---------------------------------------------------------------------------
# derived-kernel density and its three asymptotic laws


def test_g_tail_law_toward_one(profile015):
    expect = np.sqrt(2.0 / np.pi) * 0.15
    ratio = kn.g_eval(profile015, 1.0 - 1e-4, 1e-11) / np.sqrt(1e-4)
    assert ratio == pytest.approx(expect, rel=0.01)
    devs = [
        abs(kn.g_eval(profile015, 1.0 - d, 1e-11) / np.sqrt(d) / expect - 1.0)
        for d in (1e-2, 1e-3, 1e-4, 1e-5)
    ]
    assert all(d2 < d1 for d1, d2 in zip(devs, devs[1:]))


def test_g_tail_law_toward_minus_one(profile015):
    expect = np.sqrt(2.0 / np.pi) * 0.15 * np.exp(0.25)
    devs = []
    for th in (-0.8, -0.9, -0.95, -0.98):
        g = kn.g_eval(profile015, th, 1e-11)
        scaled = g * np.exp(1.0 / (2.0 * (1.0 + th))) / (1.0 + th) ** 1.5
        devs.append(abs(scaled / expect - 1.0))
    assert all(d2 < d1 for d1, d2 in zip(devs, devs[1:]))
    assert devs[-1] < 0.02


def test_g_at_zero_continuous_branch(profile01):
    # kappa > 2: continuous extension equals the direct integral
    g0 = kn.g_eval(profile01, 0.0, 1e-11)
    val, _ = integrate.quad(
        lambda z: phi_eval(profile01, z) / z**3, 1e-12, 1.0, limit=400
    )
    expected = np.exp(-0.25) / np.sqrt(np.pi) * val
    assert g0 == pytest.approx(expected, rel=1e-8)


def test_g_at_zero_singular_branch(profile02):
    with pytest.raises(SingularAtZero):
        kn.g_eval(profile02, 0.0)


def test_g_small_theta_power_law(profile02):
    # kappa in (1, 2): G = A |theta|^(kappa-2) + O(1), so the scaled values
    # converge like theta^(2-kappa); two-point extrapolation in that power
    # recovers the closed-form coefficient
    a_coeff = kn.small_theta_coefficient(profile02)
    k = profile02.kappa
    t1, t2 = 1e-7, 1e-8
    s1 = kn.g_eval(profile02, t1, 1e-11) / t1 ** (k - 2.0)
    s2 = kn.g_eval(profile02, t2, 1e-11) / t2 ** (k - 2.0)
    w1, w2 = t1 ** (2.0 - k), t2 ** (2.0 - k)
    extrap = (s2 * w1 - s1 * w2) / (w1 - w2)
    assert extrap == pytest.approx(a_coeff, rel=2e-3)
    # the scaled values must approach the coefficient monotonically
    assert abs(s2 - a_coeff) < abs(s1 - a_coeff)


def test_k_endpoint_values(profile015):
    assert kn.k_eval(profile015, 0.0) == 0.0
    assert kn.k_eval(profile015, 1.0) == 0.0


def test_k_dual_route(profile015):
    # substituted smooth form against the raw Gauss-Jacobi quadrature
    th = 0.5
    raw = th * th * (
        raw_gauss_jacobi_g(profile015, th) + raw_gauss_jacobi_g(profile015, -th)
    )
    sub = kn.k_eval(profile015, th, 1e-11)
    assert abs(raw - sub) < 1e-7


def test_grid_matches_scalar(profile02):
    thetas = np.array([-0.9, -0.3, -1e-4, 1e-4, 0.4, 0.9, 0.9999])
    grid = kn._g_grid(profile02, thetas)
    for th, g in zip(thetas, grid):
        assert g == pytest.approx(kn.g_eval(profile02, float(th), 1e-11), rel=1e-10)


# ---------------------------------------------------------------------------
# Gamma constant


def test_gamma_const_graded_vs_cutoff_extrapolation(profile02):
    gam = kn.gamma_const(profile02, 1e-9)
    # plain adaptive quadrature with interior cutoffs 10^-k, extrapolated
    # through the leading |theta|^(kappa - 2) tail (the next, constant-order
    # density term leaves a residual of order cut itself, hence small cuts)
    k = profile02.kappa

    def plain(lo, hi):
        pieces = 0.0
        for sign in (1.0, -1.0):
            val, _ = integrate.quad(
                lambda t: kn.g_eval(profile02, sign * t, 1e-7),
                lo, hi, epsabs=1e-9, epsrel=1e-7, limit=200,
            )
            pieces += val
        return profile02.gamma * pieces

    cuts = [1e-6, 1e-7]
    base = plain(cuts[0], 1.0)
    vals = [base, base + plain(cuts[1], cuts[0])]
    w1, w2 = cuts[0] ** (k - 1.0), cuts[1] ** (k - 1.0)
    extrap = (vals[1] * w1 - vals[0] * w2) / (w1 - w2)
    assert gam == pytest.approx(extrap, abs=1e-6)


def test_gamma_const_positive_and_matches_source_identity(profile02, profile015):
    # the precipitation-free self-similar solution gives the exact identity
    # Gamma = Psi(alpha) - u*
    for prof in (profile02, profile015):
        gam = kn.gamma_const(prof, 1e-9)
        assert gam > 0
        ident = psi_at_source(prof.params) - prof.params.u_star
        assert gam == pytest.approx(ident, abs=1e-8)


# ---------------------------------------------------------------------------
# table and Kernel wrapper


def test_table_invariants(model_kernel02):
    table, kern = model_kernel02
    assert table.k_vals[0] == 0.0
    assert table.k_vals[-1] == 0.0
    recon = table.thetas**2 * (table.g_plus + table.g_minus)
    interior = slice(1, -1)
    assert np.max(np.abs(recon[interior] - table.k_vals[interior])) < 1e-12
    assert np.all(np.diff(table.cum_prefix) >= -1e-15)


def test_table_offgrid_probes(profile02, model_kernel02):
    _, kern = model_kernel02
    for th in (0.0123456, 0.2468, 0.654321, 0.9753):
        direct = kn.k_eval(profile02, th, 1e-10)
        assert abs(float(kern.eval(th)) - direct) <= 1e-8 * max(1.0, abs(direct))


def test_table_cum_additive_and_consistent(model_kernel02):
    _, kern = model_kernel02
    a, b, c = 0.1, 0.45, 0.83
    assert kern.cum(a, b) + kern.cum(b, c) == pytest.approx(kern.cum(a, c), abs=1e-12)
    quad_val, _ = integrate.quad(lambda t: float(kern.eval(t)), 0.0, c, limit=300)
    assert kern.cum(0.0, c) == pytest.approx(quad_val, abs=1e-9)


def test_table_prefix_matches_independent_quadrature(model_kernel02):
    table, kern = model_kernel02
    i = len(table.thetas) // 2
    th = float(table.thetas[i])
    quad_val, _ = integrate.quad(lambda t: float(kern.eval(t)), 0.0, th, limit=300)
    assert table.cum_prefix[i] == pytest.approx(quad_val, abs=1e-9)


def test_table_tail_ratio(model_kernel02):
    _, kern = model_kernel02
    for j in range(2, 6):
        d = 10.0**-j
        ratio = float(kern.eval(1.0 - d)) / np.sqrt(d)
        assert ratio == pytest.approx(kern.k_coeff, rel=0.2 / j)


def test_property_one_decay(profile015):
    vals = [kn.k_eval(profile015, h, 1e-10) / h for h in (1e-2, 1e-3, 1e-4, 1e-5)]
    assert all(v2 < v1 for v1, v2 in zip(vals, vals[1:]))
    assert vals[-1] < 1e-4


def test_property_three_single_inflection(profile015):
    thetas = np.linspace(1e-3, 1.0 - 1e-3, 2000)
    k_vals = kn.k_grid(profile015, thetas)
    d2 = np.diff(k_vals, 2)
    nz = d2[np.abs(d2) > 0]
    assert int(np.sum(np.diff(np.sign(nz)) != 0)) == 1


def test_kernel_positive_interior(model_kernel02):
    _, kern = model_kernel02
    vals = kern.eval(np.linspace(1e-3, 1.0 - 1e-3, 500))
    assert np.all(vals > 0)


# ---------------------------------------------------------------------------
# unimodality diagnostic F


def f_exact_synthetic(z):
    kp = 2.0 * z * np.sqrt(1.0 - z) - z * z / (2.0 * np.sqrt(1.0 - z))
    kern = kn.synthetic_kernel(0.5, 1.0)
    return z * z * kp - 2.0 * z * (z * z * np.sqrt(1.0 - z)) - 2.0 * kern.cum(z, 1.0)


def test_f_diagnostic_against_closed_form(synthetic):
    for z in (0.2, 0.5, 0.8):
        assert kn.f_diagnostic(synthetic, z) == pytest.approx(f_exact_synthetic(z), abs=1e-5)


def test_f_diagnostic_toward_one(synthetic):
    vals = [kn.f_diagnostic(synthetic, 1.0 - d) for d in (1e-2, 1e-3, 1e-4)]
    assert all(v < 0 for v in vals)


def test_f_prime_single_sign_change(model_kernel015):
    _, kern = model_kernel015
    zs = np.linspace(0.02, 0.98, 200)
    f_vals = np.array([kn.f_diagnostic(kern, z) for z in zs])
    df = np.diff(f_vals)
    changes = int(np.sum(np.diff(np.sign(df[df != 0])) != 0))
    assert changes == 1
    z_star = zs[np.argmax(f_vals)]
    assert f_vals.max() == max(f_vals)
    assert 0.0 < z_star < 1.0


# ---------------------------------------------------------------------------
# sampled-kernel reconstruction


def test_kernel_from_samples_roundtrip(synthetic):
    thetas = np.sin(np.linspace(0.0, np.pi / 2.0, 1025)) ** 2
    rebuilt = kn.kernel_from_samples(
        thetas, synthetic.eval(thetas), 0.5, 1.0, synthetic.gamma_const
    )
    probe = np.linspace(0.01, 0.999, 301)
    assert np.max(np.abs(rebuilt.eval(probe) - synthetic.eval(probe))) < 2e-6
    assert rebuilt.cum(0.0, 1.0) == pytest.approx(16.0 / 105.0, abs=1e-6)


def test_kernel_from_samples_tail_rule():
    thetas = np.linspace(0.0, 0.9, 200)
    kern = kn.synthetic_kernel(0.5, 1.0)
    rebuilt = kn.kernel_from_samples(
        thetas, kern.eval(thetas), 0.5, 1.0, kern.gamma_const
    )
    # beyond the last node: linear in sqrt(1 - theta) through zero at 1
    k_last = float(kern.eval(0.9))
    expect = k_last * np.sqrt(1.0 - 0.95) / np.sqrt(1.0 - 0.9)
    assert float(rebuilt.eval(0.95)) == pytest.approx(expect, rel=1e-12)
    assert float(rebuilt.eval(1.0)) == 0.0


def test_generalizes_beyond_unit_parameters():
    # a steep case (kappa ~ 18): Gamma identity and tail law still hold
    from liesegang.profile import ModelParams, psi_at_source, solve_kappa

    params = ModelParams(2.0, 0.5, 0.05)
    prof = solve_kappa(params)
    assert prof.kappa > 10
    gam = kn.gamma_const(prof, 1e-8)
    assert gam == pytest.approx(psi_at_source(params) - 0.05, abs=1e-8)
    ratio = kn.k_eval(prof, 1.0 - 1e-4, 1e-9) / np.sqrt(1e-4)
    assert ratio == pytest.approx(kn.k_coefficient(prof), rel=0.05)
