"""Completed-relay (extended) solutions past the breakdown point.

An extended solution is a pair (omega, rho) with

    omega(x) = Gamma - x^2 * int_0^1 K(theta) rho(x theta) dtheta,
    rho(y) in {0} / [0,1] / {1}  as  omega(y) < 0 / = 0 / > 0.

The solver replaces the Heaviside selection by a smooth ramp H_eps and
marches the causal fixed point node by node (each omega(x) depends on
[0, x] only); rho is extracted at the last mollification level and the
defect of the unmollified equation is recomputed with an independent
quadrature as the certificate.

The regular extension instead imposes omega = 0 past the breakdown point
x* and solves the resulting first-kind problem for rho panel by panel; the
newest panel's coefficient is the kernel mass of the (1 - h/x)-to-1 window,
which is positive but degenerates like h^(1+sigma).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, PicardStall, SingularPanel
from .kernel import Kernel
from .rings import Classification, RingPattern

_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)
_GL6_X, _GL6_W = np.polynomial.legendre.leggauss(6)


@dataclass(frozen=True)
class Mollifier:
    """Smooth monotone ramp: 0 below -epsilon, 1 above +epsilon, 1/2 at 0."""

    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise InvalidParameter("mollifier epsilon must be positive")

    def __call__(self, z):
        t = np.clip((np.asarray(z, dtype=float) + self.epsilon) / (2.0 * self.epsilon), 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            f = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
            g = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
        out = f / (f + g)
        if np.ndim(z) == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class ExtendedSolution:
    grid: np.ndarray
    omega: np.ndarray
    rho: np.ndarray
    residual: float
    residual_local: np.ndarray
    epsilon_trace: tuple  # rows (epsilon, sup-change to previous level)


def mollified_solve(kern: Kernel, moll: Mollifier, b: float, h: float):
    """March the mollified equation on a uniform grid over [0, b].

    Product integration: rho-factor piecewise linear (trapezoidal weights),
    kernel mass per panel exact through cum, so the degenerate last panel
    carries its true h^(1+sigma) weight.  The implicit last-node value is
    resolved by Picard iteration, which contracts because that weight is
    small.
    """
    if b <= 0 or h <= 0:
        raise InvalidParameter("b and h must be positive")
    if h > moll.epsilon / 4.0:
        raise InvalidParameter("need h <= epsilon/4 to resolve the relay ramp")
    n = int(round(b / h))
    x = h * np.arange(n + 1)
    gamma = kern.gamma_const
    omega = np.empty(n + 1)
    phi = np.empty(n + 1)
    omega[0] = gamma
    phi[0] = moll(gamma)
    for k in range(1, n + 1):
        xk = x[k]
        theta = x[: k + 1] / xk
        masses = xk * xk * kern.cum(theta[:-1], theta[1:])
        known = float(np.dot(0.5 * (phi[: k - 1] + phi[1:k]), masses[: k - 1])) if k > 1 else 0.0
        c_last = float(masses[k - 1])
        phi_k = phi[k - 1]
        om_prev = None
        for it in range(60):
            om = gamma - known - 0.5 * (phi[k - 1] + phi_k) * c_last
            phi_k = float(moll(om))
            if om_prev is not None and abs(om - om_prev) < 1e-12 and it >= 2:
                break
            om_prev = om
        else:
            raise PicardStall(f"node {k} did not contract (h too large for epsilon?)")
        omega[k] = om
        phi[k] = phi_k
    return x, omega


def _apply_kernel(kern: Kernel, grid: np.ndarray, rho: np.ndarray, xk: float) -> float:
    """Independent quadrature of int_0^1 K(theta) rho(xk theta) dtheta.

    Composite 4-point Gauss per grid panel with K evaluated pointwise and
    rho interpolated linearly; the degenerate final panel is mapped by
    theta = 1 - t^2, where the sqrt-type kernel tail is polynomial.
    """
    live = grid <= xk
    y = grid[live]
    if len(y) < 2:
        return 0.0
    theta = y / xk
    a = theta[:-2] if len(theta) > 2 else theta[:0]
    b_ = theta[1:-1] if len(theta) > 2 else theta[:0]
    total = 0.0
    if len(a):
        half = 0.5 * (b_ - a)
        mid = 0.5 * (b_ + a)
        nodes = mid[:, None] + half[:, None] * _GL4_X[None, :]
        kv = kern.eval(nodes.ravel()).reshape(nodes.shape)
        rv = np.interp(nodes.ravel() * xk, y, rho[live]).reshape(nodes.shape)
        total += float(np.sum(half[:, None] * _GL4_W[None, :] * kv * rv))
    # final panel [theta_last, 1] via theta = 1 - t^2
    t_max = np.sqrt(max(1.0 - theta[-2], 0.0))
    half = 0.5 * t_max
    nodes_t = half + half * _GL6_X
    th = 1.0 - nodes_t * nodes_t
    kv = kern.eval(th)
    rv = np.interp(th * xk, y, rho[live])
    total += float(np.sum(_GL6_W * kv * rv * 2.0 * nodes_t) * half)
    return total


def extended_solve(kern: Kernel, b: float, h: float, eps_sequence) -> ExtendedSolution:
    """Run the mollified march along a decreasing epsilon schedule.

    omega is the last iterate, rho its ramp image; the reported residual is
    the sup-norm defect of the relay equation on the grid, recomputed with
    the independent quadrature above.
    """
    eps_sequence = list(eps_sequence)
    if not eps_sequence or any(
        e2 >= e1 for e1, e2 in zip(eps_sequence, eps_sequence[1:])
    ):
        raise InvalidParameter("eps_sequence must be strictly decreasing")
    if eps_sequence[-1] < 4.0 * h:
        raise InvalidParameter("last epsilon must stay >= 4h")
    trace = []
    omega_prev = None
    for eps in eps_sequence:
        grid, omega = mollified_solve(kern, Mollifier(eps), b, h)
        change = float(np.max(np.abs(omega - omega_prev))) if omega_prev is not None else np.nan
        trace.append((float(eps), change))
        omega_prev = omega
    moll = Mollifier(eps_sequence[-1])
    rho = np.asarray(moll(omega_prev))
    local = np.zeros(len(grid))
    for k in range(1, len(grid)):
        local[k] = abs(float(
            omega_prev[k] - kern.gamma_const
            + grid[k] ** 2 * _apply_kernel(kern, grid, rho, grid[k])
        ))
    return ExtendedSolution(
        grid=grid,
        omega=omega_prev,
        rho=rho,
        residual=float(np.max(local)),
        residual_local=local,
        epsilon_trace=tuple(trace),
    )


@dataclass(frozen=True)
class RegularExtension:
    grid: np.ndarray  # panel right edges in (x*, b]
    rho: np.ndarray  # piecewise-constant rho per panel
    residual: float  # worst defect of the first-kind equation, independent quadrature
    residual_local: np.ndarray
    out_of_range: tuple  # panel indices where rho leaves [0, 1] by more than tol


def _history_mass(kern: Kernel, pattern: RingPattern, x: float, x_star: float) -> float:
    """x^2 * sum over precipitated history of the kernel window masses."""
    z = list(pattern.zeros)
    n_bands = len(z) - 1
    total = 0.0
    for i in range(0, n_bands, 2):
        a, b_ = z[i], z[i + 1]
        total += float(kern.cum(a / x, min(b_, x_star) / x))
    # the unresolved sliver between the last zero and x* keeps the parity
    # of the open band
    if n_bands % 2 == 0 and x_star > z[-1]:
        total += float(kern.cum(z[-1] / x, x_star / x))
    return x * x * total


def regular_extension_solve(
    kern: Kernel, pattern: RingPattern, b: float, h: float, tol_rho: float = 1e-6
) -> RegularExtension:
    """Impose omega = 0 on (x*, b] and solve the first-kind equation for rho.

    Piecewise-constant rho per panel, marched by collocation at panel right
    edges: the newest panel coefficient x^2 int_(panel) K(y/x) dy/x is
    positive, so each step is a scalar division.
    """
    if pattern.classification not in (
        Classification.NON_DEGENERATE_ACCUMULATION,
        Classification.DEGENERATE,
    ):
        raise InvalidParameter("pattern must have a known breakdown point")
    x_star = pattern.x_star
    if b <= x_star + h:
        raise InvalidParameter("b must exceed x* by at least one panel")
    gamma = kern.gamma_const
    m = int(np.floor((b - x_star) / h))
    edges = x_star + h * np.arange(m + 1)
    rho = np.empty(m)
    for j in range(1, m + 1):
        x = edges[j]
        hist = _history_mass(kern, pattern, x, x_star)
        prev = float(
            np.dot(rho[: j - 1], x * x * kern.cum(edges[: j - 1] / x, edges[1:j] / x))
        ) if j > 1 else 0.0
        coeff = x * x * float(kern.cum(edges[j - 1] / x, 1.0))
        if coeff < 1e3 * np.finfo(float).eps * max(gamma, 1.0):
            raise SingularPanel(f"panel {j} coefficient {coeff:.2e} too small")
        rho[j - 1] = (gamma - hist - prev) / coeff

    # independent residual: rho is piecewise constant between known
    # discontinuities (ring boundaries, then panel edges), so integrate
    # K(theta) piece by piece with Gauss rules on the exact partition
    z = list(pattern.zeros)
    n_bands = len(z) - 1
    pieces = []  # (y_lo, y_hi, rho value)
    for i in range(n_bands):
        lo, hi = z[i], min(z[i + 1], x_star)
        if hi > lo:
            pieces.append((lo, hi, 1.0 if i % 2 == 0 else 0.0))
    if n_bands % 2 == 0 and x_star > z[-1]:
        pieces.append((z[-1], x_star, 1.0))
    for j in range(m):
        pieces.append((float(edges[j]), float(edges[j + 1]), float(rho[j])))

    # composite Gauss nodes are laid out once in y-space (sub-panels narrow
    # enough for every collocation point); the piece adjoining theta = 1 is
    # re-mapped per point since it is the one that degenerates
    node_y, node_w = [], []
    for lo, hi, val in pieces[:-1]:
        if val == 0.0:
            continue
        n_sub = max(1, int(np.ceil((hi - lo) / (0.04 * x_star))))
        sub = np.linspace(lo, hi, n_sub + 1)
        half = 0.5 * (sub[1:] - sub[:-1])
        mid = 0.5 * (sub[1:] + sub[:-1])
        node_y.append((mid[:, None] + half[:, None] * _GL4_X[None, :]).ravel())
        node_w.append((val * half[:, None] * _GL4_W[None, :]).ravel())
    node_y = np.concatenate(node_y) if node_y else np.empty(0)
    node_w = np.concatenate(node_w) if node_w else np.empty(0)

    local = np.zeros(m)
    for j in range(1, m + 1):
        x = edges[j]
        live = node_y < edges[j - 1]
        total = float(np.dot(node_w[live], kern.eval(node_y[live] / x))) / x
        # newest panel [edges[j-1], x] adjoins theta = 1: map theta = 1 - t^2
        lo_t = edges[j - 1] / x
        t_hi = np.sqrt(max(1.0 - lo_t, 0.0))
        half = 0.5 * t_hi
        nodes_t = half + half * _GL6_X
        kv = kern.eval(1.0 - nodes_t * nodes_t)
        total += rho[j - 1] * half * float(np.dot(_GL6_W, kv * 2.0 * nodes_t))
        local[j - 1] = abs(float(gamma - x * x * total))
    out = tuple(int(i) for i in np.nonzero((rho < -tol_rho) | (rho > 1.0 + tol_rho))[0])
    return RegularExtension(
        grid=edges[1:], rho=rho, residual=float(np.max(local)),
        residual_local=local, out_of_range=out,
    )
