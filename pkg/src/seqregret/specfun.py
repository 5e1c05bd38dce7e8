"""Imaginary error function and the Hermite payoff family.

The payoff family is the two-parameter solution set of

    g'' - 2 x g' + 2 g = 0,

namely ``F(x) = c1 * (x * erfi(x) - exp(x**2) / sqrt(pi)) + c2 * x``, whose
derivative is the betting rule ``c1 * erfi(x) + c2``. ``capped_hermite``
clips that slope to [-1, 1] by continuing ``F`` linearly past the points
where ``|F'| = 1``.

All functions accept Python floats or numpy arrays and return the same kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SQRT_PI = math.sqrt(math.pi)
TWO_OVER_SQRT_PI = 2.0 / SQRT_PI

# |x| above this makes exp(x**2) overflow a double well before 27; the
# payoff functions reject it instead of returning inf - inf.
PAYOFF_DOMAIN = 8.0

_SERIES_CUTOFF = 3.0
_SERIES_MIN_TERMS = 30
_SERIES_MAX_TERMS = 200
# Rybicki's sum for the Dawson integral. Aliasing error ~ exp(-(pi / 2h)**2)
# is ~1e-27 at h = 0.2; terms further than 7.5 from x are below 1e-24.
_RYBICKI_H = 0.2
_RYBICKI_HALF_WIDTH = 38


# pi to longdouble precision; np.pi is only a double
_PI_LONG = np.longdouble("3.14159265358979323846264338327950288")


def _sqrt_pi(dtype):
    if dtype == np.longdouble:
        return np.sqrt(_PI_LONG)
    return SQRT_PI


def _as_float_array(x, name="x"):
    # longdouble input is kept so finite-difference checks can sample F
    # with ~1e-19 noise instead of ~1e-16.
    arr = np.asarray(x)
    if arr.dtype != np.longdouble:
        arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _restore(arr, like):
    if np.ndim(like) == 0:
        if np.asarray(arr).dtype == np.longdouble:
            return np.longdouble(arr)
        return float(arr)
    return arr


def _erfi_series(x):
    """Maclaurin series; every term has the sign of x, so no cancellation."""
    x2 = x * x
    power = x.copy()
    two_over_sqrt_pi = 2 / _sqrt_pi(x.dtype)
    tol = min(1e-17, float(np.finfo(x.dtype).eps) / 8)
    total = x.copy()
    for k in range(1, _SERIES_MAX_TERMS):
        power = power * x2 / k
        term = power / (2 * k + 1)
        total = total + term
        if k >= _SERIES_MIN_TERMS:
            with np.errstate(invalid="ignore", divide="ignore"):
                rel = np.abs(term) / np.abs(total)
            if not np.any(rel >= tol):
                break
    return two_over_sqrt_pi * total


def _dawson_rybicki(x):
    """Dawson integral for |x| > 3 via the odd-index exponential sum."""
    ax = np.abs(x)
    h = _RYBICKI_H
    centre = 2 * np.floor(ax / (2 * h)) + 1
    offsets = 2 * np.arange(-_RYBICKI_HALF_WIDTH, _RYBICKI_HALF_WIDTH + 1)
    idx = centre[..., None] + offsets
    terms = np.exp(-((ax[..., None] - idx * h) ** 2)) / idx
    return np.sign(x) * terms.sum(axis=-1) / SQRT_PI


def _is_plain_scalar(x) -> bool:
    return isinstance(x, (float, int)) and not isinstance(x, bool) or \
        isinstance(x, np.floating) and not isinstance(x, np.longdouble)


def _erfi_series_scalar(x: float) -> float:
    x2 = x * x
    power = total = x
    for k in range(1, _SERIES_MAX_TERMS):
        power *= x2 / k
        term = power / (2 * k + 1)
        total += term
        if k >= _SERIES_MIN_TERMS and abs(term) < 1e-17 * abs(total):
            break
    return TWO_OVER_SQRT_PI * total


def _dawson_rybicki_scalar(x: float) -> float:
    ax = abs(x)
    h = _RYBICKI_H
    centre = 2 * math.floor(ax / (2 * h)) + 1
    total = 0.0
    for j in range(-_RYBICKI_HALF_WIDTH, _RYBICKI_HALF_WIDTH + 1):
        idx = centre + 2 * j
        total += math.exp(-((ax - idx * h) ** 2)) / idx
    return math.copysign(total / SQRT_PI, x)


def _erfi_scalar(x: float) -> float:
    if not math.isfinite(x):
        raise DomainError("x must be finite")
    if abs(x) <= _SERIES_CUTOFF:
        return _erfi_series_scalar(x)
    try:
        return TWO_OVER_SQRT_PI * math.exp(x * x) * _dawson_rybicki_scalar(x)
    except OverflowError:
        return math.copysign(math.inf, x)


def erfi(x):
    """Imaginary error function ``(2/sqrt(pi)) * integral_0^x exp(t**2) dt``.

    Uses the Maclaurin series for ``|x| <= 3`` and the Dawson-function
    relation ``erfi(x) = (2/sqrt(pi)) exp(x**2) D(x)`` beyond. Returns
    +-inf once ``exp(x**2)`` overflows (|x| > ~26.6).
    """
    if _is_plain_scalar(x):
        # pure-Python path: numpy call overhead dominates for single values
        return _erfi_scalar(float(x))
    arr = _as_float_array(x)
    flat = np.atleast_1d(arr)
    out = np.empty_like(flat)
    small = np.abs(flat) <= _SERIES_CUTOFF
    if np.any(small):
        out[small] = _erfi_series(flat[small])
    if np.any(~small):
        big = flat[~small]
        with np.errstate(over="ignore"):
            out[~small] = TWO_OVER_SQRT_PI * np.exp(big * big) * _dawson_rybicki(big)
    return _restore(out.reshape(arr.shape), x)


def dawson(x):
    """Dawson integral ``D(x) = exp(-x**2) * integral_0^x exp(t**2) dt``."""
    if _is_plain_scalar(x):
        x = float(x)
        if not math.isfinite(x):
            raise DomainError("x must be finite")
        if abs(x) <= _SERIES_CUTOFF:
            return 0.5 * SQRT_PI * math.exp(-x * x) * _erfi_series_scalar(x)
        return _dawson_rybicki_scalar(x)
    arr = _as_float_array(x)
    flat = np.atleast_1d(arr)
    out = np.empty_like(flat)
    small = np.abs(flat) <= _SERIES_CUTOFF
    if np.any(small):
        s = flat[small]
        out[small] = 0.5 * SQRT_PI * np.exp(-s * s) * _erfi_series(s)
    if np.any(~small):
        out[~small] = _dawson_rybicki(flat[~small])
    return _restore(out.reshape(arr.shape), x)


def erfi_inv(y: float) -> float:
    """Inverse of erfi on ``[0, 8]`` by Newton steps kept inside a bisection bracket.

    Returns +-inf when ``|y|`` exceeds ``erfi(PAYOFF_DOMAIN)``.
    """
    return _erfi_inv_upto(y, PAYOFF_DOMAIN)


# erfi is finite up to ~26.6; cap points of tiny-c1 curves can sit out there.
_CAP_SEARCH_LIMIT = 26.5
_MIN_CAPPED_C1 = 1e-300


def _erfi_inv_upto(y: float, limit: float) -> float:
    y = float(y)
    if not math.isfinite(y):
        raise DomainError("erfi_inv argument must be finite")
    if y == 0.0:
        return 0.0
    target = abs(y)
    if target > _erfi_scalar(limit):
        return math.copysign(math.inf, y)
    if target < 1e-8:
        # erfi(x) = 2x/sqrt(pi) * (1 + x^2/3 + ...); the correction is < 1e-16
        return math.copysign(target / TWO_OVER_SQRT_PI, y)
    lo, hi = 0.0, limit
    # erfi is convex on x > 0, so Newton from the right never overshoots
    # the root; the bracket guards the first steps anyway.
    x = min(math.sqrt(math.log1p(target * SQRT_PI)) + 0.5, hi)
    for _ in range(200):
        fx = _erfi_scalar(x) - target
        if fx == 0.0:
            break
        if fx < 0:
            lo = x
        else:
            hi = x
        step = fx / (TWO_OVER_SQRT_PI * math.exp(x * x))
        nxt = x - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) <= 2 * math.ulp(x) or hi - lo <= 2 * math.ulp(hi):
            x = nxt
            break
        x = nxt
    return math.copysign(x, y)


@dataclass(frozen=True)
class HermiteParams:
    """Coefficients selecting ``F = c1 * even_solution + c2 * x``."""

    c1: float
    c2: float

    def __post_init__(self):
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise DomainError("c1 and c2 must be finite")


def _payoff_domain(x):
    arr = _as_float_array(x)
    if np.any(np.abs(arr) > PAYOFF_DOMAIN):
        raise DomainError(f"|x| must be <= {PAYOFF_DOMAIN} (exp(x^2) overflow)")
    return arr


def hermite_payoff(p: HermiteParams, x):
    """``F_{c1,c2}(x) = c1 (x erfi(x) - e^{x^2}/sqrt(pi)) + c2 x`` for ``|x| <= 8``."""
    arr = _payoff_domain(x)
    even = arr * erfi(arr) - np.exp(arr * arr) / _sqrt_pi(arr.dtype)
    return _restore(p.c1 * even + p.c2 * arr, x)


def hermite_payoff_derivative(p: HermiteParams, x):
    """``F'(x) = c1 erfi(x) + c2``."""
    arr = _payoff_domain(x)
    return _restore(p.c1 * erfi(arr) + p.c2, x)


def gaussian_weighted_payoff(p: HermiteParams, x):
    """``F(x) * exp(-x**2) / sqrt(pi)``, evaluated without overflow for any x.

    Rewrites the even part as ``(2 x D(x) - 1) / sqrt(pi)`` so the weight
    cancels analytically; the integrand decays like ``c1 / (2 pi x**2)``.
    """
    arr = _as_float_array(x)
    even = (2.0 * arr * dawson(arr) - 1.0) / math.pi
    lin = arr * np.exp(-arr * arr) / SQRT_PI
    return _restore(p.c1 * even + p.c2 * lin, x)


def cap_points(p: HermiteParams) -> tuple[float, float]:
    """Return ``(x_minus, x_plus)`` where ``F'`` crosses -1 and +1.

    For ``c1 == 0`` the slope is the constant ``c2``: with ``|c2| <= 1``
    nothing is capped (``(-inf, inf)``); otherwise everything is, and both
    points collapse to 0 so that the capped curve is ``sign(c2) * x``.
    """
    if p.c1 < 0:
        raise DomainError("capping needs c1 >= 0")
    if 0 < p.c1 < _MIN_CAPPED_C1:
        raise DomainError(f"c1={p.c1:g} puts the cap points past erfi's double range; "
                          "use c1 = 0 or c1 >= 1e-300")
    if p.c1 == 0:
        if abs(p.c2) <= 1:
            return -math.inf, math.inf
        return 0.0, 0.0
    lo = _erfi_inv_upto((-1.0 - p.c2) / p.c1, _CAP_SEARCH_LIMIT)
    hi = _erfi_inv_upto((1.0 - p.c2) / p.c1, _CAP_SEARCH_LIMIT)
    return lo, hi


def _scaled_even_and_slope(c1: float, x: np.ndarray):
    """``c1 (x erfi(x) - e^{x^2}/sqrt(pi))`` and ``c1 erfi(x)`` for any x, c1 > 0.

    Past the payoff domain ``c1 e^{x^2}`` is formed as ``exp(x^2 + ln c1)``
    and erfi through Dawson's function, so small ``c1`` does not overflow.
    """
    x = np.asarray(x, dtype=float)
    inner = np.abs(x) <= PAYOFF_DOMAIN
    xi = np.where(inner, x, 0.0)
    even = c1 * (xi * erfi(xi) - np.exp(xi * xi) / SQRT_PI)
    slope = c1 * erfi(xi)
    if not np.all(inner):
        xo = np.where(inner, PAYOFF_DOMAIN + 1.0, x)
        with np.errstate(over="ignore"):
            scale = np.exp(xo * xo + math.log(c1)) / SQRT_PI
        d = dawson(xo)
        even = np.where(inner, even, scale * (2.0 * xo * d - 1.0))
        slope = np.where(inner, slope, 2.0 * scale * d)
    return even, slope


def capped_hermite(p: HermiteParams, x):
    """Slope-capped payoff ``F_hat`` and its slope.

    ``F_hat = F`` on ``[x_minus, x_plus]`` and continues with slope +-1
    outside, so it is continuous, convex for ``c1 >= 0`` and 1-Lipschitz.
    Unlike :func:`hermite_payoff` there is no ``|x| <= 8`` limit: the
    capped curve is linear in the tails.

    Returns:
        ``(value, slope)``, floats or arrays matching ``x``.
    """
    arr = _as_float_array(x)
    lo, hi = cap_points(p)
    if p.c1 == 0:
        # Linear: no exp(x^2) to overflow, so no |x| <= 8 restriction.
        s = p.c2 if abs(p.c2) <= 1 else math.copysign(1.0, p.c2)
        value, slope = s * arr, np.full_like(arr, s)
        return _restore(value, x), _restore(slope, x)
    inner = np.clip(arr, lo, hi)
    even, even_slope = _scaled_even_and_slope(p.c1, inner)
    value = even + p.c2 * inner
    slope = even_slope + p.c2
    above = arr > hi
    below = arr < lo
    if np.any(above):
        value = np.where(above, value + (arr - hi), value)
        slope = np.where(above, 1.0, slope)
    if np.any(below):
        value = np.where(below, value + (lo - arr), value)
        slope = np.where(below, -1.0, slope)
    slope = np.clip(slope, -1.0, 1.0)
    return _restore(value, x), _restore(slope, x)
