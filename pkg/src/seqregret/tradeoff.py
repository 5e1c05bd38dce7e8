"""Regret trade-offs for two experts and the optimal steady-state regret constant.

All regrets and losses here are normalized by ``sqrt(n)``. The central
function is ``T(y) = erfi(sqrt(ln y))`` for ``y >= 1``: a pair of one-sided
regrets ``(r1, r2)`` is achievable exactly when some ``alpha > 0`` has
``T(alpha r1) + T(alpha r2) >= alpha / sqrt(pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .specfun import HermiteParams, SQRT_PI, erfi, erfi_inv, hermite_payoff

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SYMMETRIC_X0_MAX = 6.0
FEASIBLE_THRESHOLD = -1e-9
_ALPHA_GRID_POINTS = 1000


def golden_section_min(fn, lo: float, hi: float, tol: float = 1e-10):
    """Minimize a unimodal ``fn`` on ``[lo, hi]``; never evaluates outside it.

    Returns:
        ``(argmin, min)``.
    """
    if not lo < hi:
        raise DomainError("need lo < hi")
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def t_func(y):
    """``erfi(sqrt(ln y))`` for ``y >= 1``."""
    arr = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 1.0):
        raise DomainError("T(y) is defined for finite y >= 1")
    out = erfi(np.sqrt(np.log(arr)))
    return float(out) if np.ndim(y) == 0 else out


def t_inv(z: float) -> float:
    """Inverse of :func:`t_func` for ``z >= 0``: ``exp(erfi_inv(z)^2)``."""
    if not (math.isfinite(z) and z >= 0):
        raise DomainError("T^-1 needs a finite z >= 0")
    return math.exp(erfi_inv(z) ** 2)


def _t_or_minus_inf(y: float) -> float:
    # Below 1 the regret cannot absorb a unit-slope cap, so the condition
    # must fail rather than get a free zero.
    return t_func(y) if y >= 1.0 else -math.inf


# -- symmetric (two-sided) trade-off ------------------------------------------

def symmetric_tradeoff(L: float) -> float:
    """Least regret ``R`` achievable with loss ``L`` (both over ``sqrt(n)``).

    Solves ``erfi(x0) = 1 / (sqrt(pi) L)`` and returns ``L exp(x0^2)``, so
    ``T(R / L) = 1 / (sqrt(pi) L)``. Rejects ``L`` small enough that
    ``x0 > 6``.
    """
    if not (math.isfinite(L) and L > 0):
        raise DomainError("L must be finite and > 0")
    x0 = erfi_inv(1.0 / (SQRT_PI * L))
    if x0 > SYMMETRIC_X0_MAX:
        raise DomainError(f"L={L:g} puts the cap point beyond {SYMMETRIC_X0_MAX}")
    return L * math.exp(x0 * x0)


def symmetric_pareto_loss() -> float:
    """Loss ``L*`` at which ``symmetric_tradeoff`` reaches its minimum ``C``.

    Above ``L*`` more loss no longer buys less regret.
    """
    return 1.0 / (SQRT_PI * erfi(optimal_cap_point()))


# -- one-sided trade-off -----------------------------------------------------

def one_sided_margin(r1: float, r2: float, alpha: float) -> float:
    """``T(alpha r1) + T(alpha r2) - alpha / sqrt(pi)``; ``-inf`` if either argument < 1."""
    return _t_or_minus_inf(alpha * r1) + _t_or_minus_inf(alpha * r2) - alpha / SQRT_PI


def _margins(r1: float, r2: float, alphas: np.ndarray) -> np.ndarray:
    y1, y2 = alphas * r1, alphas * r2
    out = np.full(alphas.shape, -np.inf)
    ok = (y1 >= 1.0) & (y2 >= 1.0)
    out[ok] = t_func(y1[ok]) + t_func(y2[ok]) - alphas[ok] / SQRT_PI
    return out


def one_sided_feasible(r1: float, r2: float) -> tuple[bool, float]:
    """Search ``alpha`` for the best margin; returns ``(feasible, alpha*)``.

    The margin is ``-inf`` for ``alpha < max(1/r1, 1/r2)``, so the log grid
    (1000 points) starts there and runs to at least 1e3; the best grid cell
    is refined by golden section.
    """
    if not (r1 > 0 and r2 > 0 and math.isfinite(r1) and math.isfinite(r2)):
        raise DomainError("regrets must be finite and > 0")
    lo = max(1.0 / r1, 1.0 / r2, 1e-3)
    hi = max(1e3, 10.0 * lo)
    grid = np.geomspace(lo, hi, _ALPHA_GRID_POINTS)
    margins = _margins(r1, r2, grid)
    k = int(np.argmax(margins))
    a_lo, a_hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    a_star, neg = golden_section_min(lambda a: -one_sided_margin(r1, r2, a), a_lo, a_hi,
                                     tol=1e-12 * a_hi)
    best = -neg
    if margins[k] > best:
        a_star, best = float(grid[k]), float(margins[k])
    return bool(best >= FEASIBLE_THRESHOLD), float(a_star)


def one_sided_best_margin(r1: float, r2: float) -> float:
    _, a = one_sided_feasible(r1, r2)
    return one_sided_margin(r1, r2, a)


def _cap_pair(c1: float, c2: float):
    x1 = erfi_inv(-c2 / c1)
    x0 = erfi_inv((1.0 - c2) / c1)
    return x1, x0


def _losses(c1: float, c2: float):
    """``(L_o, R_o) = (-F(x1), x0 - F(x0))`` at the slope-0 and slope-1 points."""
    p = HermiteParams(c1, c2)
    x1, x0 = _cap_pair(c1, c2)
    return -hermite_payoff(p, x1), x0 - hermite_payoff(p, x0)


def _tangency(c1: float, c2: float) -> float:
    # zero exactly when the (L_o, R_o) pair touches the alpha-condition boundary
    x1, x0 = _cap_pair(c1, c2)
    lo, ro = _losses(c1, c2)
    return lo / abs(x1) + ro / x0 - 1.0


@dataclass(frozen=True)
class TradeoffPoint:
    """Normalized regret pair; ``r1``/``r2`` meaning depends on ``kind``:

    two_sided ``(R, L)``, one_sided ``(R_o, L_o)``, experts ``(R1, R2)``,
    max_avg ``(R_m, R_a)``.
    """

    kind: str
    r1: float
    r2: float

    def __post_init__(self):
        if self.kind not in ("two_sided", "one_sided", "experts", "max_avg"):
            raise DomainError(f"unknown trade-off kind {self.kind!r}")
        for v in (self.r1, self.r2):
            if not (math.isfinite(v) and v >= 0):
                raise DomainError("trade-off components must be finite and >= 0")


def one_sided_point(c2: float, c1_bracket=(1e-6, 1e3)) -> tuple[TradeoffPoint, HermiteParams]:
    """Boundary point of the one-sided trade-off with linear coefficient ``c2``.

    ``c1`` is chosen so that the pair is tangent to the achievable region,
    which is the same as minimizing ``R_o`` at fixed ``L_o``. The tangency
    residual is negative for small ``c1`` and positive for large ``c1``;
    its root is bracketed and solved in ``log c1``.

    Returns:
        ``(experts point (R1=L_o, R2=R_o), params)``.
    """
    if not 0.0 < c2 < 1.0:
        raise DomainError("c2 must lie strictly between 0 and 1")
    lo, hi = (math.log(v) for v in c1_bracket)
    g_lo, g_hi = _tangency(math.exp(lo), c2), _tangency(math.exp(hi), c2)
    if not g_lo < 0 < g_hi:
        raise DomainError(f"tangency not bracketed for c2={c2}")
    log_c1 = brentq(lambda u: _tangency(math.exp(u), c2), lo, hi, xtol=1e-14, rtol=1e-15)
    c1 = math.exp(log_c1)
    l_o, r_o = _losses(c1, c2)
    return TradeoffPoint("experts", l_o, r_o), HermiteParams(c1, c2)


def one_sided_curve(points: int) -> list[TradeoffPoint]:
    """``points`` boundary points sweeping ``c2`` over ``(0, 1)``, ordered by ``r1``."""
    if points < 2:
        raise DomainError("points must be >= 2")
    c2s = np.linspace(0.0, 1.0, points + 2)[1:-1]
    pts = [one_sided_point(float(c2))[0] for c2 in c2s]
    return sorted(pts, key=lambda p: p.r1)


def experts_reductions(p: TradeoffPoint) -> TradeoffPoint:
    """two_sided ``(R, L)`` <-> max_avg ``(R/2, L/2)``; one_sided ``(R_o, L_o)`` <-> experts ``(L_o, R_o)``."""
    if p.kind == "two_sided":
        return TradeoffPoint("max_avg", p.r1 / 2, p.r2 / 2)
    if p.kind == "max_avg":
        return TradeoffPoint("two_sided", 2 * p.r1, 2 * p.r2)
    if p.kind == "one_sided":
        return TradeoffPoint("experts", p.r2, p.r1)
    return TradeoffPoint("one_sided", p.r2, p.r1)


# -- optimal constant --------------------------------------------------------

def _regret_objective(a: float) -> float:
    return a / (SQRT_PI * erfi(math.sqrt(math.log(a))))


def optimal_regret_constant() -> float:
    """``C = min_{alpha >= 1} alpha / (sqrt(pi) erfi(sqrt(ln alpha)))`` by golden section."""
    _, c = golden_section_min(_regret_objective, 1.0 + 1e-9, 100.0, tol=1e-10)
    return c


def optimal_cap_point() -> float:
    """Root ``x*`` of ``F_{1,0}(x) = 0`` (``x erfi(x) = e^{x^2}/sqrt(pi)``), by bisection.

    At the optimum ``C = x*``.
    """
    p = HermiteParams(1.0, 0.0)
    lo, hi = 0.5, 1.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if hermite_payoff(p, mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimal_params() -> HermiteParams:
    """``(1/erfi(x*), 0)``: the bounded-bets curve whose cap points sit at ``+-x*``."""
    return HermiteParams(1.0 / erfi(optimal_cap_point()), 0.0)
