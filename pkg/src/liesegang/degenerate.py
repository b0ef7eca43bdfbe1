"""Constructive example of a kernel whose ring pattern cannot be continued.

Starting from a power-law template K* (default theta^2 sqrt(1-theta)), the
template's band solution omega* has zeros x1 < x2 with omega*'(x2) > 0.
The construction shifts the end of the first gap to x2 + eps, inserts a
monotone C^1 bridge omega_eps on [x2 - eps, x2 + 2 eps] whose value and
slope vanish at x2 + eps, and reads a new kernel off the bridge through

    K_eps(theta) = omega_eps'(x1/theta)/x1 - 2 theta (omega_eps(x1/theta) - Gamma)/x1^2

on [r, 1], r = x1/(x2 + 2 eps).  A spline head on [0, r) restores the two
mass identities  int K_hat = int K*  and  int G_hat = Gamma  (G = K/theta^2),
after which the assembled kernel K_hat reproduces x1 and x2 + eps as its
first two zeros while neither sign hypothesis continues the solution past
x2 + eps: the positive candidate equals -(1/2) x^2 int_{(x2+eps)/x}^1 K*,
which is negative, and the negative candidate equals omega_eps itself,
which is positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

from . import rings
from .errors import (
    BridgeInfeasible,
    EpsilonNotFound,
    InvalidParameter,
    LambdaOutOfRange,
    PositivityViolation,
    TailPowerNotFound,
    TangentialTemplate,
    VerificationFailed,
)
from .kernel import Kernel, synthetic_kernel

_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


def default_template() -> Kernel:
    return synthetic_kernel(0.5, 1.0)


def template_zeros(template: Kernel) -> tuple[float, float]:
    """First two zeros x1 < x2 of the template band solution."""
    gamma = template.gamma_const
    x1 = float(np.sqrt(gamma / template.cum(0.0, 1.0)))

    def omega(x):
        return gamma - x * x * template.cum(0.0, min(x1 / x, 1.0))

    lo = x1 * 1.0001
    hi = x1 * 1.5
    while omega(hi) < 0:
        hi *= 1.5
        if hi > 1e6 * x1:
            raise InvalidParameter("no second zero found for template")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if omega(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14 * x1:
            break
    return x1, 0.5 * (lo + hi)


def _omega_star(template: Kernel, x1: float):
    gamma = template.gamma_const

    def value(x):
        xs = np.asarray(x, dtype=float)
        ratio = np.minimum(np.where(xs > 0, x1 / np.maximum(xs, 1e-300), 1.0), 1.0)
        out = gamma - xs * xs * template.cum(0.0, ratio)
        return float(out) if xs.ndim == 0 else out

    def slope(x):
        xs = np.asarray(x, dtype=float)
        ratio = np.minimum(np.where(xs > 0, x1 / np.maximum(xs, 1e-300), 1.0), 1.0)
        out = -2.0 * xs * template.cum(0.0, ratio) + np.where(
            xs > x1, x1 * template.eval(ratio), 0.0
        )
        return float(out) if xs.ndim == 0 else out

    return value, slope


@dataclass(frozen=True)
class GapBridge:
    """Piecewise omega_eps on [0, x2 + 2 eps]: template, Hermite middle, tail."""

    template: Kernel
    x1: float
    x2: float
    epsilon: float
    z_eps: float
    middle: CubicHermiteSpline
    middle_slope: Callable

    def value(self, x):
        t = self.template
        x1, x2, eps = self.x1, self.x2, self.epsilon
        xs = np.asarray(x, dtype=float)
        flat = np.atleast_1d(xs).astype(float)
        out = np.empty_like(flat)
        left = flat <= x2 - eps
        mid = (flat > x2 - eps) & (flat < x2 + eps)
        right = flat >= x2 + eps
        if np.any(left):
            v, _ = _omega_star(t, x1)
            out[left] = v(flat[left])
        if np.any(mid):
            out[mid] = self.middle(flat[mid])
        if np.any(right):
            xr = flat[right]
            out[right] = 0.5 * xr * xr * t.cum((x2 + eps) / xr, 1.0)
        return float(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)

    def slope(self, x):
        t = self.template
        x1, x2, eps = self.x1, self.x2, self.epsilon
        xs = np.asarray(x, dtype=float)
        flat = np.atleast_1d(xs).astype(float)
        out = np.empty_like(flat)
        left = flat <= x2 - eps
        mid = (flat > x2 - eps) & (flat < x2 + eps)
        right = flat >= x2 + eps
        if np.any(left):
            _, s = _omega_star(t, x1)
            out[left] = s(flat[left])
        if np.any(mid):
            out[mid] = self.middle_slope(flat[mid])
        if np.any(right):
            xr = flat[right]
            ratio = (x2 + eps) / xr
            out[right] = xr * t.cum(ratio, 1.0) + 0.5 * (x2 + eps) * t.eval(ratio)
        return float(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)


def build_gap_bridge(template: Kernel, x1: float, x2: float, epsilon: float) -> GapBridge:
    """Monotone C^1 filler of the shifted first gap.

    Five-node cubic Hermite on [x2 - eps, x2 + eps] with end data matched to
    the template on the left and to the zero-value, zero-slope state on the
    right; node values and slopes are sampled from a monotone quintic ramp
    and Fritsch-Carlson limited, so the filler is increasing and below
    Gamma by construction.
    """
    if epsilon <= 0 or epsilon >= x2 / 2.0:
        raise InvalidParameter("epsilon must lie in (0, x2/2)")
    gamma = template.gamma_const
    value_star, slope_star = _omega_star(template, x1)
    if slope_star(x2) <= 0:
        raise TangentialTemplate("template solution is tangential at its second zero")
    xs_check = np.linspace(x2 - epsilon, x2, 65)
    if any(slope_star(x) <= 0 for x in xs_check):
        raise BridgeInfeasible("omega*' is not positive on [x2 - eps, x2]")

    x_l = x2 - epsilon
    v0 = value_star(x_l)
    s0 = slope_star(x_l)
    if v0 >= 0:
        raise BridgeInfeasible("left bridge value is not negative")
    # monotone quintic ramp: slope phi(t) = s0 (1-t)^2 + c t^2 (1-t)^2 on
    # t in [0,1] integrates to |v0| over the bridge, fixing c
    c = 30.0 * (-v0 / (2.0 * epsilon) - s0 / 3.0)
    if c < 0:
        raise BridgeInfeasible("bridge slope budget is negative at this epsilon")

    def phi(t):
        return s0 * (1.0 - t) ** 2 + c * t * t * (1.0 - t) ** 2

    def ramp(t):
        # int_0^t phi, closed form
        poly_s0 = s0 * (t - t * t + t**3 / 3.0)
        poly_c = c * (t**3 / 3.0 - t**4 / 2.0 + t**5 / 5.0)
        return poly_s0 + poly_c

    t_nodes = np.linspace(0.0, 1.0, 5)
    x_nodes = x_l + 2.0 * epsilon * t_nodes
    values = v0 + 2.0 * epsilon * ramp(t_nodes)
    slopes = phi(t_nodes)
    slopes[0] = s0
    slopes[-1] = 0.0
    deltas = np.diff(values) / np.diff(x_nodes)
    if np.any(deltas <= 0):
        raise BridgeInfeasible("bridge node values are not increasing")
    for i in range(1, 4):
        slopes[i] = min(slopes[i], 3.0 * min(deltas[i - 1], deltas[i]))
    if slopes[0] > 3.0 * deltas[0] or slopes[-1] > 3.0 * deltas[-1]:
        raise BridgeInfeasible("end slopes violate the monotonicity criterion")
    middle = CubicHermiteSpline(x_nodes, values, slopes)
    middle_slope = middle.derivative()

    # z_eps: level Gamma/2 on the right branch if reached, else x2 + 2 eps
    def right(x):
        return 0.5 * x * x * template.cum((x2 + epsilon) / x, 1.0)

    z_hi = x2 + 2.0 * epsilon
    if right(z_hi) > gamma / 2.0:
        lo, hi = x2 + epsilon, z_hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if right(mid) < gamma / 2.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-14 * x2:
                break
        z_eps = 0.5 * (lo + hi)
    else:
        z_eps = z_hi

    bridge = GapBridge(template, x1, x2, epsilon, float(z_eps), middle, middle_slope)
    # conditions: increasing and below Gamma across the modified interval
    probes = np.linspace(x_l, x2 + 2.0 * epsilon, 65)
    vals = np.array([bridge.value(x) for x in probes])
    if np.any(np.diff(vals) <= 0):
        raise BridgeInfeasible("bridge is not increasing on the modified interval")
    if np.any(vals >= gamma):
        raise BridgeInfeasible("bridge exceeds Gamma on the modified interval")
    return bridge


@dataclass(frozen=True)
class PartialKernel:
    """K_eps on [r, 1] with its integrals and edge density."""

    bridge: GapBridge
    r: float
    eval: Callable
    g_eval: Callable
    int_k: float  # int_r^1 K_eps
    int_g: float  # int_r^1 G_eps
    g_at_r: float


def kernel_from_bridge(template: Kernel, bridge: GapBridge, x1: float) -> PartialKernel:
    """Read K_eps off the bridge on [x1/(x2 + 2 eps), 1] and integrate it."""
    gamma = template.gamma_const
    x2, eps = bridge.x2, bridge.epsilon
    r = x1 / (x2 + 2.0 * eps)

    def k_eps(theta):
        th = np.asarray(theta, dtype=float)
        x = x1 / th
        out = bridge.slope(x) / x1 - 2.0 * th * (bridge.value(x) - gamma) / x1**2
        return float(out) if th.ndim == 0 else out

    def g_eps(theta):
        th = np.asarray(theta, dtype=float)
        return k_eps(th) / (th * th)

    vals = k_eps(np.linspace(r, 1.0, 1001)[:-1])
    if np.any(vals <= 0):
        raise PositivityViolation("K_eps non-positive on its domain")

    # int_r^1 K_eps telescopes through the antiderivative
    # -(omega_eps(x1/theta) - Gamma) theta^2 / x1^2
    int_k = gamma / x1**2 + (bridge.value(x2 + 2.0 * eps) - gamma) / (x2 + 2.0 * eps) ** 2
    breaks = sorted(
        {r, x1 / (x2 + eps), x1 / x2, x1 / (x2 - eps), x1 / (x2 - eps / 2.0)}
    )
    int_g, err = integrate.quad(
        g_eps, r, 1.0, points=[b for b in breaks if r < b < 1.0],
        epsabs=0.0, epsrel=1e-11, limit=400,
    )
    return PartialKernel(
        bridge=bridge, r=float(r), eval=k_eps, g_eval=g_eps,
        int_k=float(int_k), int_g=float(int_g), g_at_r=float(g_eps(r)),
    )


def choose_epsilon(template: Kernel, x1: float, x2: float,
                   margin: float = 0.1) -> float:
    """Scan eps = x2 * 2^-k until the head-mass inequality holds with margin.

    The inequality (int K* - int_r^1 K_eps) / (int G* - int_r^1 G_eps) < r^2
    makes room for the head construction; it holds for all small eps because
    K* = theta^2 G* pushes the masses below r^2 on [0, r].
    """
    _, slope_star = _omega_star(template, x1)
    if slope_star(x2) <= 0:
        raise TangentialTemplate("template solution is tangential at its second zero")
    gamma = template.gamma_const
    total_k = template.cum(0.0, 1.0)
    for k in range(2, 41):
        eps = x2 * 2.0**-k
        try:
            bridge = build_gap_bridge(template, x1, x2, eps)
            partial = kernel_from_bridge(template, bridge, x1)
        except (BridgeInfeasible, PositivityViolation):
            continue
        r = partial.r
        num = total_k - partial.int_k
        den = gamma - partial.int_g
        if num > 0 and den > 0 and num / den < (1.0 - margin) * r * r:
            return float(eps)
    raise EpsilonNotFound("no admissible epsilon within 40 halvings")


def _bump_moments(poly_factors, lo: float, hi: float) -> tuple[float, float]:
    """(int b, int theta^2 b) over [lo, hi] for b of polynomial degree <= 8."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    th = mid + half * _GL8_X
    b = poly_factors(th)
    return float(half * np.sum(_GL8_W * b)), float(half * np.sum(_GL8_W * th * th * b))


@dataclass(frozen=True)
class DegenerateConstruction:
    template: Kernel
    x1: float
    x2: float
    epsilon: float
    z_eps: float
    r: float
    r_star: float
    n_power: int
    lambda_star: float
    k_star: float
    result: Kernel
    theta_breaks: tuple = ()  # kink/cusp locations of K_hat, for samplers


def fill_head(template: Kernel, partial: PartialKernel, r: float) -> DegenerateConstruction:
    """Head construction on [0, r) and assembly of the full kernel K_hat.

    选 smallest tail power n with
        r*^2 = (int K* - int_r^1 K_eps - G_eps(r) r^3/(n+3))
             / (int G* - int_r^1 G_eps - G_eps(r) r/(n+1))  in (0, r^2),
    then mixes two quartic bumps b1 on [0, r*/2] and b2 on [r*, r] with the
    weight lambda* solving B1(lambda)/B2(lambda) = r*^2, and adds the tail
    G_eps(r) theta^(n+2)/r^n.  The construction forces int K_hat = int K*
    and int G_hat = Gamma exactly.
    """
    gamma = template.gamma_const
    bridge = partial.bridge
    total_k = template.cum(0.0, 1.0)
    mass_k = total_k - partial.int_k
    mass_g = gamma - partial.int_g
    g_r = partial.g_at_r

    n_power = None
    for n in range(1, 201):
        num = mass_k - g_r * r**3 / (n + 3.0)
        den = mass_g - g_r * r / (n + 1.0)
        if num > 0 and den > 0 and num / den < r * r:
            n_power = n
            r_star2 = num / den
            k_star = num
            break
    if n_power is None:
        raise TailPowerNotFound("no tail power n <= 200 satisfies the ratio bound")
    r_star = float(np.sqrt(r_star2))

    def b1(theta):
        th = np.asarray(theta, dtype=float)
        inside = (th >= 0.0) & (th <= r_star / 2.0)
        return np.where(inside, th**4 * (r_star / 2.0 - th) ** 4, 0.0)

    def b2(theta):
        th = np.asarray(theta, dtype=float)
        inside = (th >= r_star) & (th <= r)
        return np.where(inside, (th - r_star) ** 4 * (r - th) ** 4, 0.0)

    i0_b1, i2_b1 = _bump_moments(b1, 0.0, r_star / 2.0)
    i0_b2, i2_b2 = _bump_moments(b2, r_star, r)
    if not (i2_b1 / i0_b1 < r_star2 < i2_b2 / i0_b2):
        raise LambdaOutOfRange("bump second moments do not bracket r*^2")
    # B1(lambda)/B2(lambda) = r*^2 is linear in lambda; the complement
    # mu = 1 - lambda is carried explicitly because lambda* can sit within
    # round-off of 1 when the bump masses are lopsided
    a1 = i2_b1 - r_star2 * i0_b1
    a2 = i2_b2 - r_star2 * i0_b2
    lambda_star = a2 / (a2 - a1)
    mu_star = -a1 / (a2 - a1)
    if not (lambda_star > 0.0 and mu_star > 0.0):
        raise LambdaOutOfRange(f"lambda* = {lambda_star} outside (0, 1)")
    b_norm = lambda_star * i2_b1 + mu_star * i2_b2

    def head(theta):
        th = np.asarray(theta, dtype=float)
        spline = (
            k_star
            / b_norm
            * (lambda_star * th * th * b1(th) + mu_star * th * th * b2(th))
        )
        return spline + g_r * th ** (n_power + 2) / r**n_power

    # closed-form antiderivative of the head: polynomial pieces plus tail
    def poly1():
        th = np.polynomial.Polynomial([0.0, 1.0])
        return th**6 * (r_star / 2.0 - th) ** 4

    def poly2():
        th = np.polynomial.Polynomial([0.0, 1.0])
        return th**2 * (th - r_star) ** 4 * (r - th) ** 4

    p1_int = poly1().integ()
    p2_int = poly2().integ()

    def head_prefix(theta):
        th = np.asarray(theta, dtype=float)
        thc = np.clip(th, 0.0, r)
        part1 = p1_int(np.minimum(thc, r_star / 2.0)) - p1_int(0.0)
        part2 = np.where(
            thc > r_star, p2_int(np.maximum(thc, r_star)) - p2_int(r_star), 0.0
        )
        spline = k_star / b_norm * (lambda_star * part1 + mu_star * part2)
        tail = g_r * thc ** (n_power + 3) / ((n_power + 3.0) * r**n_power)
        return spline + tail

    x1, x2, eps = bridge.x1, bridge.x2, bridge.epsilon
    head_mass = float(head_prefix(r))

    def _keps_anti(t):
        # antiderivative of -K_eps: (omega_eps(x1/t) - Gamma) t^2 / x1^2
        x = x1 / t
        return -(bridge.value(x) - gamma) * t * t / x1**2

    def eval_fn(theta):
        th = np.asarray(theta, dtype=float)
        flat = np.atleast_1d(th).astype(float)
        out = np.empty_like(flat)
        low = flat < r
        if np.any(low):
            out[low] = head(flat[low])
        if np.any(~low):
            out[~low] = partial.eval(np.minimum(flat[~low], 1.0))
        if th.ndim == 0:
            return float(out[0])
        return out.reshape(th.shape)

    def prefix(theta):
        th = np.asarray(theta, dtype=float)
        flat = np.clip(np.atleast_1d(th).astype(float), 0.0, 1.0)
        out = np.empty_like(flat)
        low = flat <= r
        if np.any(low):
            out[low] = head_prefix(flat[low])
        if np.any(~low):
            out[~low] = head_mass + _keps_anti(flat[~low]) - _keps_anti(r)
        if th.ndim == 0:
            return float(out[0])
        return out.reshape(th.shape)

    def cum_fn(a, b):
        return prefix(b) - prefix(a)

    kern = Kernel(
        eval=eval_fn,
        cum=cum_fn,
        gamma_const=gamma,
        sigma=template.sigma,
        k_coeff=template.k_coeff,
        label=f"degenerate(eps={eps:.6g})",
    )
    # non-smooth points: spline-head seams, the gluing point r, the images of
    # the bridge nodes, and the sqrt cusp at x1/(x2 + eps)
    breaks = {r_star / 2.0, r_star, float(r)}
    for k in range(5):
        breaks.add(x1 / (x2 - eps + k * eps / 2.0))
    breaks.add(x1 / (x2 + 2.0 * eps))
    return DegenerateConstruction(
        template=template,
        x1=x1,
        x2=x2,
        epsilon=eps,
        z_eps=bridge.z_eps,
        r=float(r),
        r_star=r_star,
        n_power=n_power,
        lambda_star=float(lambda_star),
        k_star=float(k_star),
        result=kern,
        theta_breaks=tuple(sorted(b for b in breaks if 0.0 < b < 1.0)),
    )


def construct_degenerate(template: Kernel | None = None) -> DegenerateConstruction:
    """Full pipeline: zeros, epsilon scan, bridge, head fill."""
    template = template or default_template()
    x1, x2 = template_zeros(template)
    eps = choose_epsilon(template, x1, x2)
    bridge = build_gap_bridge(template, x1, x2, eps)
    partial = kernel_from_bridge(template, bridge, x1)
    cons = fill_head(template, partial, partial.r)

    # mass identities must hold by construction; verify to 1e-8 with the
    # head contribution in closed form and the K_eps region independently
    # quadratured in kernel_from_bridge
    total_k = template.cum(0.0, 1.0)
    got_k = cons.result.cum(0.0, 1.0)
    if abs(got_k - total_k) > 1e-8:
        raise VerificationFailed(f"kernel mass mismatch {got_k - total_k:.2e}")
    head_g = cons.k_star / cons.r_star**2 + partial.g_at_r * cons.r / (cons.n_power + 1.0)
    g_int = head_g + partial.int_g
    if abs(g_int - template.gamma_const) > 1e-8:
        raise VerificationFailed(
            f"Gamma identity mismatch {g_int - template.gamma_const:.2e}"
        )
    return cons


def verify_degeneracy(cons: DegenerateConstruction) -> bool:
    """Solve the ring pattern for K_hat and certify the breakdown at x2 + eps."""
    kern = cons.result
    x_break = cons.x2 + cons.epsilon
    root_tol = 1e-12 * cons.x1
    pattern = rings.solve_pattern(
        kern, max_zeros=4, root_tol=root_tol, horizon=3.0 * x_break
    )
    if pattern.classification is not rings.Classification.DEGENERATE:
        raise VerificationFailed(
            f"pattern classified {pattern.classification.value}, expected Degenerate"
        )
    if len(pattern.zeros) != 3:
        raise VerificationFailed(f"expected exactly 2 zeros, got {len(pattern.zeros) - 1}")
    if abs(pattern.zeros[1] - cons.x1) > 10.0 * root_tol:
        raise VerificationFailed("first zero does not match the template x1")
    # the second zero is tangential (value and slope vanish), so its
    # location is conditioned only to the width of the round-off plateau
    if abs(pattern.zeros[2] - x_break) > 1e-6 * x_break:
        raise VerificationFailed("second zero does not match x2 + eps")
    # explicit candidate identities just past the breakdown
    for delta in (1e-4, 1e-5):
        x = x_break + delta
        cand_pos = rings.omega_eval(kern, [0.0, cons.x1, x_break], x)
        expected = -0.5 * x * x * cons.template.cum(x_break / x, 1.0)
        if abs(cand_pos - expected) > 1e-8:
            raise VerificationFailed(
                f"positive candidate deviates from -(1/2) x^2 int K*: {cand_pos - expected:.2e}"
            )
        if not cand_pos < 0:
            raise VerificationFailed("positive candidate is not negative")
        cand_neg = rings.omega_eval(kern, [0.0, cons.x1], x)
        if not cand_neg > 0:
            raise VerificationFailed("negative candidate is not positive")
    return True
