"""Special-function primitives: Kummer's M and the complementary error function.

Both functions accept scalars or numpy arrays and are self-contained, so the
rest of the library does not depend on scipy.special.  Accuracy targets are
modest by special-function-library standards (relative 1e-12 on the domains
actually used) but are met without asymptotic-series machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, NonConvergence

SQRT_PI = float(np.sqrt(np.pi))

_Z_DOMAIN = 50.0  # series argument cap; callers stay well inside


@dataclass(frozen=True)
class SeriesAccuracy:
    """Termination control for the Kummer series.

    rel_tol is a relative tolerance on the summed tail, max_terms caps the
    number of series terms before NonConvergence is raised.
    """

    rel_tol: float = 1e-15
    max_terms: int = 600

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1e-6:
            raise InvalidParameter(f"rel_tol must lie in (0, 1e-6), got {self.rel_tol}")
        if self.max_terms < 100:
            raise InvalidParameter(f"max_terms must be >= 100, got {self.max_terms}")


DEFAULT_ACCURACY = SeriesAccuracy()


def _m_series(a: float, b: float, z: np.ndarray, acc: SeriesAccuracy) -> np.ndarray:
    """Direct power series for M(a, b, z), intended for z >= 0."""
    term = np.ones_like(z)
    total = np.ones_like(z)
    for n in range(acc.max_terms):
        term = term * ((a + n) / ((b + n) * (n + 1.0))) * z
        total = total + term
        # ratio of the next term to the current one; once it is below 0.9 the
        # tail is geometrically dominated and the stopping test is safe
        ratio = np.abs(z) * abs(a + n + 1) / (abs(b + n + 1) * (n + 2.0))
        if np.all(ratio < 0.9) and np.all(np.abs(term) <= acc.rel_tol * np.abs(total)):
            return total
    raise NonConvergence(
        f"Kummer series did not converge within {acc.max_terms} terms "
        f"(a={a}, b={b}, max |z|={np.max(np.abs(z)):.3g})"
    )


def kummer_m(a: float, b: float, z, acc: SeriesAccuracy | None = None):
    """Kummer's confluent hypergeometric function M(a, b, z).

    Negative arguments are routed through the transformation
    M(a, b, z) = exp(z) M(b - a, b, -z) so that the series is summed with
    non-negative terms only, avoiding cancellation.
    """
    acc = acc or DEFAULT_ACCURACY
    if b <= 0 and float(b).is_integer():
        raise InvalidParameter(f"b must not be a non-positive integer, got b={b}")
    z_arr = np.asarray(z, dtype=float)
    if np.any(np.abs(z_arr) > _Z_DOMAIN):
        raise InvalidParameter(f"|z| exceeds supported domain {_Z_DOMAIN}")
    scalar = z_arr.ndim == 0
    z_flat = np.atleast_1d(z_arr)
    out = np.empty_like(z_flat)
    neg = z_flat < 0
    if np.any(~neg):
        out[~neg] = _m_series(a, b, z_flat[~neg], acc)
    if np.any(neg):
        zn = -z_flat[neg]
        out[neg] = np.exp(-zn) * _m_series(b - a, b, zn, acc)
    return float(out[0]) if scalar else out.reshape(z_arr.shape)


def _erf_small(y: np.ndarray) -> np.ndarray:
    """erf(y) for 0 <= y < 2 via the all-positive rescaled Maclaurin series."""
    y2 = 2.0 * y * y
    term = y.copy()
    total = y.copy()
    for n in range(120):
        term = term * y2 / (2.0 * n + 3.0)
        total = total + term
        if np.all(term <= 1e-18 * np.maximum(total, 1e-300)):
            break
    return (2.0 / SQRT_PI) * np.exp(-y * y) * total


def _erfc_large(y: np.ndarray) -> np.ndarray:
    """erfc(y) for y >= 2 via the Laplace continued fraction (modified Lentz)."""
    tiny = 1e-300
    f = np.where(y != 0.0, y, tiny)
    c = f.copy()
    d = np.zeros_like(y)
    for n in range(1, 200):
        an = 0.5 * n
        d = y + an * d
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = y + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = c * d
        f = f * delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    return np.exp(-y * y) / (SQRT_PI * f)


def erfc(x):
    """Complementary error function, accurate to ~1e-13 relative on [0, 10].

    Uses the series branch below |x| = 2 and a continued fraction above;
    negative arguments use the reflection erfc(-x) = 2 - erfc(x).
    """
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_flat = np.atleast_1d(x_arr)
    y = np.abs(x_flat)
    out = np.empty_like(y)
    small = y < 2.0
    if np.any(small):
        out[small] = 1.0 - _erf_small(y[small])
    if np.any(~small):
        out[~small] = _erfc_large(y[~small])
    out = np.where(x_flat < 0, 2.0 - out, out)
    return float(out[0]) if scalar else out.reshape(x_arr.shape)
