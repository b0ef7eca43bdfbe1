"""Memory kernel of the relay integral equation.

The scalar equation carries a kernel K(theta) = theta^2 (G(theta) + G(-theta))
on [0, 1], where G is a one-dimensional integral of the self-similar profile
against a heat-kernel weight.  The raw integrand has an inverse-square-root
endpoint singularity; all evaluations here use the substitution

    v = 1 / sigma^2,
    G(theta) = pref(theta) * (1/2) * int_{v_min}^inf e^-v v^-3/2 psi(zeta(v)) dv,

    pref(theta)  = (alpha^3 / (2 sqrt pi)) |theta| (1-theta) e^{-alpha^2 (1-theta)^2 / 4}
    zeta(v)      = alpha |theta| sqrt(1 + cc / v),   cc = (alpha (1-theta) / 2)^2
    v_min        = alpha^2 theta^2 (1-theta) / (4 (1+theta))
    psi(zeta)    = Phi(zeta) / zeta^3,

which is smooth on the whole integration range.  Asymptotics:

    G(theta) ~ sqrt(2/pi) (u*/alpha) sqrt(1-theta)                 theta -> 1
    G(theta) ~ sqrt(2/pi) (u*/alpha^3) e^{alpha^2/4}
               (1+theta)^{3/2} e^{-alpha^2/(2(1+theta))}           theta -> -1
    G(theta) ~ A |theta|^{kappa-2}  (1 < kappa < 2),
               A_log * (-ln|theta|) (kappa = 2),  continuous (kappa > 2)

near theta = 0.  K inherits K(0) = K'(0) = 0 and K ~ k sqrt(1-theta) with
k = sqrt(2/pi) u*/alpha.

The module also hosts the generic Kernel container used by the ring-pattern,
degenerate-construction and extended-solution solvers: a synthetic power-law
family with closed-form integrals, cached tables of the derived kernel, and
kernels rebuilt from sampled values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import InvalidParameter, QuadratureFailure, SingularAtZero
from .profile import Profile
from .specfun import SQRT_PI, kummer_m

SIGMA_MAX = float(np.log2(3.0) - 1.0)  # admissible degeneracy exponents (0, log2 3 - 1)
_V_CUT = 46.0  # e^-46 ~ 1e-20: exponential tail truncation
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _quad(f, a, b, quad_tol, **kw):
    """QUADPACK wrapper; the caller applies its own error policy."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, epsabs=0.0, epsrel=quad_tol, limit=400, **kw)


@dataclass(frozen=True)
class Kernel:
    """Evaluator bundle for one memory kernel.

    eval maps theta in [0,1] (scalar or array) to K(theta) >= 0; cum(a, b)
    returns int_a^b K, additively (cum(a,b) + cum(b,c) == cum(a,c) to
    round-off); gamma_const is the constant term Gamma of the integral
    equation driven by this kernel; K ~ k_coeff (1-theta)^sigma near 1.
    """

    eval: Callable
    cum: Callable
    gamma_const: float
    sigma: float
    k_coeff: float
    label: str = "kernel"


@dataclass(frozen=True)
class KernelTable:
    """Cached grid of kernel values and prefix integrals."""

    thetas: np.ndarray
    g_plus: np.ndarray
    g_minus: np.ndarray
    k_vals: np.ndarray
    cum_prefix: np.ndarray


# ---------------------------------------------------------------------------
# synthetic template family


def synthetic_kernel(sigma: float, scale: float) -> Kernel:
    """Power-law template K(theta) = scale * theta^2 (1-theta)^sigma.

    All integrals are closed form (Beta-function antiderivatives), which
    makes this family the exact oracle for the pattern solvers.  The
    associated density G = scale (1-theta)^sigma gives
    gamma_const = scale / (1 + sigma).
    """
    if not 0.0 < sigma < SIGMA_MAX:
        raise InvalidParameter(f"sigma must lie in (0, {SIGMA_MAX:.6f}), got {sigma}")
    if scale <= 0:
        raise InvalidParameter("scale must be positive")

    def antideriv(t):
        # int theta^2 (1-theta)^sigma dtheta with theta^2 = 1 - 2(1-t) + (1-t)^2
        s = np.asarray(t, dtype=float)
        one = 1.0 - s
        return (
            -(one ** (sigma + 1.0)) / (sigma + 1.0)
            + 2.0 * one ** (sigma + 2.0) / (sigma + 2.0)
            - one ** (sigma + 3.0) / (sigma + 3.0)
        )

    def k_eval(theta):
        t = np.asarray(theta, dtype=float)
        return scale * t * t * (1.0 - t) ** sigma

    def k_cum(a, b):
        return scale * (antideriv(b) - antideriv(a))

    return Kernel(
        eval=k_eval,
        cum=k_cum,
        gamma_const=scale / (1.0 + sigma),
        sigma=sigma,
        k_coeff=scale,
        label=f"synthetic(sigma={sigma}, scale={scale})",
    )


# ---------------------------------------------------------------------------
# derived-kernel quadrature


def _psi_over_zeta3(profile: Profile, zeta):
    """Phi(zeta)/zeta^3 on (0, alpha], via the Kummer branch."""
    k = profile.kappa
    z = np.asarray(zeta, dtype=float)
    return profile.c1 * z ** (k - 3.0) * kummer_m(k / 2.0, k + 0.5, -z * z / 4.0)


def _v_min(alpha: float, theta) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    return alpha * alpha * t * t * (1.0 - t) / (4.0 * (1.0 + t))


def _prefactor(alpha: float, theta) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    return (
        alpha**3
        / (2.0 * SQRT_PI)
        * np.abs(t)
        * (1.0 - t)
        * np.exp(-alpha * alpha * (1.0 - t) ** 2 / 4.0)
    )


def g_eval(profile: Profile, theta: float, quad_tol: float = 1e-10) -> float:
    """Density G(theta) for theta in [-1, 1], adaptive quadrature.

    theta = 0 is only defined for kappa > 2 (continuous extension); for
    kappa <= 2 it diverges and SingularAtZero is raised.
    """
    if not 0.0 < quad_tol <= 1e-6:
        raise InvalidParameter(f"quad_tol must lie in (0, 1e-6], got {quad_tol}")
    if not -1.0 <= theta <= 1.0:
        raise InvalidParameter(f"theta must lie in [-1, 1], got {theta}")
    alpha = profile.params.alpha
    if theta == 0.0:
        if profile.kappa <= 2.0:
            raise SingularAtZero("G(0) diverges for kappa <= 2")
        c = alpha / SQRT_PI * np.exp(-alpha * alpha / 4.0)

        def f0(zeta):
            # Phi(zeta)/zeta^3 = [Phi/zeta^kappa] zeta^(kappa-3); the bracket is smooth
            return profile.c1 * kummer_m(
                profile.kappa / 2.0, profile.kappa + 0.5, -zeta * zeta / 4.0
            )

        val, err = _quad(f0, 0.0, alpha, quad_tol,
                         weight="alg", wvar=(profile.kappa - 3.0, 0.0))
        if err > 10.0 * quad_tol * abs(val):
            raise QuadratureFailure(f"G(0) quadrature error {err:.2e} above tolerance")
        return float(c * val)
    if abs(theta) == 1.0:
        return 0.0

    vmin = float(_v_min(alpha, theta))
    pref = float(_prefactor(alpha, theta))
    if vmin > 700.0:
        return 0.0
    cc = (alpha * (1.0 - theta) / 2.0) ** 2
    athe = alpha * abs(theta)

    if theta >= 0.995:
        # near theta = 1 the mass of the v-form piles onto the lower endpoint;
        # the original sigma variable is uniformly smooth there
        z_up = 1.0 / np.sqrt(vmin)

        def f_sigma(s):
            if s < 1e-8:
                return 0.0
            zeta = athe * np.sqrt(1.0 + cc * s * s)
            return np.exp(-1.0 / (s * s)) * _psi_over_zeta3(profile, zeta)

        val, err = _quad(f_sigma, 0.0, z_up, quad_tol)
        if err > 10.0 * quad_tol * abs(val):
            raise QuadratureFailure(
                f"G({theta}) quadrature error {err:.2e} above tolerance {quad_tol:.2e}"
            )
        return float(pref * val)

    def f(v):
        zeta = athe * np.sqrt(1.0 + cc / v)
        return np.exp(-v) * v**-1.5 * _psi_over_zeta3(profile, zeta)

    if vmin < 0.5:
        # small |theta| spreads algebraic decay over many decades; integrate
        # the low range in log space where it is a plain exponential
        def f_log(w):
            v = np.exp(w)
            return f(v) * v

        v1, e1 = _quad(f_log, np.log(vmin), 0.0, quad_tol)
        v2, e2 = _quad(f, 1.0, 1.0 + _V_CUT, quad_tol)
        val, err = v1 + v2, e1 + e2
    else:
        val, err = _quad(f, vmin, vmin + _V_CUT, quad_tol)
    if err > 10.0 * quad_tol * abs(val):
        raise QuadratureFailure(
            f"G({theta}) quadrature error {err:.2e} above tolerance {quad_tol:.2e}"
        )
    return float(pref * 0.5 * val)


def _g_grid(profile: Profile, thetas) -> np.ndarray:
    """Vectorized G on an array of thetas via fixed composite Gauss panels.

    Geometric panels (ratio <= 4) bridge v_min up to v = 1, linear panels of
    width 2 cover the exponential range up to the e^-46 truncation; 16-point
    Gauss-Legendre per panel.  Relative accuracy ~1e-12, uniform in theta.
    """
    t = np.asarray(thetas, dtype=float)
    out = np.zeros_like(t)
    alpha = profile.params.alpha
    interior = (np.abs(t) < 1.0) & (t != 0.0)
    if not np.any(interior):
        return out
    tt = t[interior]
    vmin = _v_min(alpha, tt)
    pref = _prefactor(alpha, tt)
    cc = (alpha * (1.0 - tt) / 2.0) ** 2
    athe = alpha * np.abs(tt)
    res = np.zeros_like(tt)
    live = vmin <= 700.0

    # number of geometric panels needed per point; grouping by it keeps the
    # inner loops fully vectorized
    m = np.zeros(tt.shape, dtype=int)
    small = vmin < 1.0
    if np.any(small):
        m[small] = np.maximum(
            1, np.ceil(np.log(1.0 / vmin[small]) / np.log(4.0)).astype(int)
        )
    m[~live] = -1

    lin_edges = np.arange(0.0, _V_CUT + 1.0, 2.0)
    for mg in np.unique(m):
        if mg < 0:
            continue
        sel = m == mg
        n_g = int(np.sum(sel))
        vm = vmin[sel]
        if mg > 0:
            ratio = (1.0 / vm) ** (1.0 / mg)
            geo = vm[:, None] * ratio[:, None] ** np.arange(mg + 1)[None, :]
            edges = np.concatenate([geo, 1.0 + lin_edges[None, 1:].repeat(n_g, axis=0)], axis=1)
        else:
            edges = vm[:, None] + lin_edges[None, :]
        acc = np.zeros(n_g)
        a2 = athe[sel]
        c2 = cc[sel]
        for p in range(edges.shape[1] - 1):
            a_e = edges[:, p]
            b_e = edges[:, p + 1]
            half = 0.5 * (b_e - a_e)
            mid = 0.5 * (b_e + a_e)
            v = mid[:, None] + half[:, None] * _GL_X[None, :]
            zeta = a2[:, None] * np.sqrt(1.0 + c2[:, None] / v)
            fv = np.exp(-v) * v**-1.5 * _psi_over_zeta3(profile, zeta)
            acc += half * (fv @ _GL_W)
        res[sel] = acc
    res[~live] = 0.0
    out[interior] = pref * 0.5 * res
    return out


def k_eval(profile: Profile, theta: float, quad_tol: float = 1e-10) -> float:
    """K(theta) = theta^2 (G(theta) + G(-theta)); K(0) = 0 for every kappa."""
    if not 0.0 <= theta <= 1.0:
        raise InvalidParameter(f"theta must lie in [0, 1], got {theta}")
    if theta == 0.0:
        return 0.0
    if theta == 1.0:
        return 0.0
    return theta * theta * (
        g_eval(profile, theta, quad_tol) + g_eval(profile, -theta, quad_tol)
    )


def k_grid(profile: Profile, thetas) -> np.ndarray:
    """Vectorized K on an array of thetas (fixed-rule evaluation)."""
    t = np.asarray(thetas, dtype=float)
    return t * t * (_g_grid(profile, t) + _g_grid(profile, -t))


def small_theta_coefficient(profile: Profile) -> float:
    """Coefficient A of the near-zero law G ~ A |theta|^(kappa-2), 1 < kappa < 2.

    Closed form: A = C1 alpha^(kappa-1)/sqrt(pi) *
    int_0^1 exp(-alpha^2/(4 s^2)) (1-s^2)^(-kappa/2) ds.
    """
    k = profile.kappa
    if not 1.0 < k < 2.0:
        raise InvalidParameter("closed-form small-theta coefficient needs 1 < kappa < 2")
    alpha = profile.params.alpha

    def f(s):
        return np.exp(-alpha * alpha / (4.0 * s * s)) * (1.0 + s) ** (-k / 2.0)

    val, _ = _quad(f, 0.0, 1.0, 1e-11, weight="alg", wvar=(0.0, -k / 2.0))
    return float(profile.c1 * alpha ** (k - 1.0) / SQRT_PI * val)


def gamma_const(profile: Profile, quad_tol: float = 1e-9) -> float:
    """Gamma = gamma * int_{-1}^{1} G(theta) dtheta.

    Graded geometric mesh toward theta = 0 down to 1e-10, then the
    integrable small-theta asymptote (power law, or log at kappa = 2)
    integrated in closed form with its coefficient measured at the
    matching point.  Refinement with doubled panel density provides the
    error estimate.
    """
    if not 0.0 < quad_tol <= 1e-6:
        raise InvalidParameter(f"quad_tol must lie in (0, 1e-6], got {quad_tol}")
    t0 = 1e-10
    kappa = profile.kappa

    def panel_sum(edges: np.ndarray, f) -> float:
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        fv = f(nodes).reshape(len(half), -1)
        return float(np.sum(half * (fv @ _GL_W)))

    def side(sign: float, level: int) -> float:
        # graded geometric mesh on [t0, 1/2] resolves the theta -> 0 power law
        geo = np.geomspace(t0, 0.5, 10 * 3 * level + 1)
        body = panel_sum(geo, lambda t: _g_grid(profile, sign * t))
        # theta = 1 - s^2 renders the upper half smooth (sqrt tail for +,
        # exponentially flat for -)
        s_edges = np.linspace(0.0, np.sqrt(0.5), 8 * level + 1)
        upper = panel_sum(
            s_edges, lambda s: 2.0 * s * _g_grid(profile, sign * (1.0 - s * s))
        )
        # asymptotic tail on [0, t0]
        g0 = _g_grid(profile, np.array([sign * t0]))[0]
        if abs(kappa - 2.0) <= 1e-9:
            tail = g0 / (-np.log(t0)) * (t0 - t0 * np.log(t0))
        elif kappa < 2.0:
            tail = g0 / t0 ** (kappa - 2.0) * t0 ** (kappa - 1.0) / (kappa - 1.0)
        else:
            tail = g0 * t0
        return body + upper + float(tail)

    coarse = side(1.0, 1) + side(-1.0, 1)
    fine = side(1.0, 2) + side(-1.0, 2)
    if abs(fine - coarse) > max(quad_tol, 1e-12) * abs(fine):
        raise QuadratureFailure(
            f"Gamma refinement gap {abs(fine - coarse):.2e} above tolerance"
        )
    return float(profile.gamma * fine)


# ---------------------------------------------------------------------------
# cached table and Kernel assembly

_BLEND = 1e-3  # width of the near-1 asymptotic blending zone


def k_coefficient(profile: Profile) -> float:
    """Tail coefficient k in K ~ k sqrt(1-theta): sqrt(2/pi) u*/alpha."""
    p = profile.params
    return float(np.sqrt(2.0 / np.pi) * p.u_star / p.alpha)


def _u_of_theta(theta):
    return np.arcsin(np.sqrt(np.clip(theta, 0.0, 1.0)))


def build_kernel_table(
    profile: Profile, n_points: int = 2048, quad_tol: float = 1e-9
) -> tuple[KernelTable, Kernel]:
    """Tabulate the derived kernel and wrap it as a fast Kernel.

    The grid theta = sin^2(u) with uniform u is Chebyshev-spaced, dense at
    both endpoints.  Interpolation runs on V(u) = K/sqrt(1-theta), which is
    smooth up to theta = 1; on [1 - 1e-3, 1] the evaluation blends the
    table into the exact tail asymptote k sqrt(1-theta).  The cumulative
    integral is the antiderivative of a spline of K dtheta/du on a 4x finer
    grid, so cum is exactly additive.  Off-grid probes against the adaptive
    scalar evaluator guard the interpolation error.
    """
    if n_points < 256:
        raise InvalidParameter(f"n_points must be >= 256, got {n_points}")
    kc = k_coefficient(profile)
    u = np.linspace(0.0, np.pi / 2.0, n_points + 1)
    thetas = np.sin(u) ** 2
    g_plus = _g_grid(profile, thetas)
    g_minus = _g_grid(profile, -thetas)
    if profile.kappa > 2.0:
        g0 = g_eval(profile, 0.0, min(quad_tol, 1e-9))
        g_plus[0] = g_minus[0] = g0
    k_vals = thetas * thetas * (g_plus + g_minus)
    k_vals[0] = 0.0
    k_vals[-1] = 0.0

    with np.errstate(invalid="ignore", divide="ignore"):
        v_vals = np.where(thetas < 1.0, k_vals / np.sqrt(1.0 - thetas), 0.0)
    v_vals[-1] = kc
    v_spline = CubicSpline(u, v_vals)

    def eval_fn(theta):
        t = np.asarray(theta, dtype=float)
        tt = np.clip(t, 0.0, 1.0)
        uu = _u_of_theta(tt)
        root = np.sqrt(np.maximum(1.0 - tt, 0.0))
        base = v_spline(uu) * root
        w = np.clip((tt - (1.0 - _BLEND)) / _BLEND, 0.0, 1.0)
        out = (1.0 - w) * base + w * kc * root
        if t.ndim == 0:
            return float(out)
        return out

    u_fine = np.linspace(0.0, np.pi / 2.0, 4 * n_points + 1)
    w_fine = eval_fn(np.sin(u_fine) ** 2) * np.sin(2.0 * u_fine)
    anti = CubicSpline(u_fine, w_fine).antiderivative()
    a0 = float(anti(0.0))

    def cum_fn(a, b):
        ua = _u_of_theta(np.asarray(a, dtype=float))
        ub = _u_of_theta(np.asarray(b, dtype=float))
        out = anti(ub) - anti(ua)
        if np.ndim(out) == 0:
            return float(out)
        return out

    gamma_c = gamma_const(profile, quad_tol)
    table = KernelTable(
        thetas=thetas,
        g_plus=g_plus,
        g_minus=g_minus,
        k_vals=k_vals,
        cum_prefix=np.asarray(anti(u)) - a0,
    )
    kern = Kernel(
        eval=eval_fn,
        cum=cum_fn,
        gamma_const=gamma_c,
        sigma=0.5,
        k_coeff=kc,
        label=(
            f"derived(alpha={profile.params.alpha}, beta={profile.params.beta}, "
            f"u_star={profile.params.u_star})"
        ),
    )
    for probe in (0.1234567, 1.0 / 3.0, 0.5555555, 0.87654321):
        direct = k_eval(profile, probe, quad_tol)
        if abs(float(eval_fn(probe)) - direct) > 10.0 * quad_tol * max(1.0, abs(direct)):
            raise QuadratureFailure(
                f"table interpolation error at theta={probe} above 10*quad_tol"
            )
    return table, kern


def kernel_from_samples(
    thetas, k_values, sigma: float, k_coeff: float, gamma_const_value: float,
    label: str = "tabulated",
) -> Kernel:
    """Rebuild a Kernel from sampled (theta, K) pairs.

    Values interpolate linearly in V = K/(1-theta)^sigma; beyond the last
    node the tail is linear in sqrt(1-theta) through zero at theta = 1.
    """
    if not 0.0 < sigma < SIGMA_MAX:
        raise InvalidParameter(f"sigma must lie in (0, {SIGMA_MAX:.6f}), got {sigma}")
    t = np.asarray(thetas, dtype=float)
    k = np.asarray(k_values, dtype=float)
    if t.ndim != 1 or t.shape != k.shape or len(t) < 8:
        raise InvalidParameter("need matching 1-d theta/K arrays with >= 8 samples")
    if np.any(np.diff(t) <= 0) or t[0] < 0 or t[-1] > 1.0:
        raise InvalidParameter("theta samples must be strictly increasing in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(t < 1.0, k / (1.0 - t) ** sigma, k_coeff)
    t_last = t[-1]
    k_last = k[-1]

    def eval_fn(theta):
        x = np.asarray(theta, dtype=float)
        xx = np.clip(x, 0.0, 1.0)
        inside = np.interp(xx, t, v) * (1.0 - xx) ** sigma
        if t_last < 1.0:
            tail = k_last * np.sqrt(np.maximum(1.0 - xx, 0.0)) / np.sqrt(1.0 - t_last)
            out = np.where(xx <= t_last, inside, tail)
        else:
            out = inside
        if x.ndim == 0:
            return float(out)
        return out

    n_fine = 8192
    u_fine = np.linspace(0.0, np.pi / 2.0, n_fine + 1)
    w_fine = eval_fn(np.sin(u_fine) ** 2) * np.sin(2.0 * u_fine)
    anti = CubicSpline(u_fine, w_fine).antiderivative()

    def cum_fn(a, b):
        ua = _u_of_theta(np.asarray(a, dtype=float))
        ub = _u_of_theta(np.asarray(b, dtype=float))
        out = anti(ub) - anti(ua)
        if np.ndim(out) == 0:
            return float(out)
        return out

    return Kernel(
        eval=eval_fn,
        cum=cum_fn,
        gamma_const=float(gamma_const_value),
        sigma=float(sigma),
        k_coeff=float(k_coeff),
        label=label,
    )


def f_diagnostic(kern: Kernel, z: float) -> float:
    """F(z) = z^2 K'(z) - 2 z K(z) - 2 int_z^1 K(theta) dtheta.

    K' by central finite difference with the step kept away from the
    degenerate endpoint; diagnostic accuracy only.
    """
    if not 0.0 < z < 1.0:
        raise InvalidParameter(f"z must lie in (0, 1), got {z}")
    step = min(1e-4, (1.0 - z) / 8.0, z / 8.0)
    kprime = (float(kern.eval(z + step)) - float(kern.eval(z - step))) / (2.0 * step)
    return z * z * kprime - 2.0 * z * float(kern.eval(z)) - 2.0 * float(kern.cum(z, 1.0))
