"""Tabulated payoff curves and steady-state feasibility checks.

A payoff curve ``f`` promises that the algorithm's discounted payoff is at
least ``f(h)`` whenever the discounted height is ``h``. With discount
``rho = 1 - 1/n`` a curve is achievable with the betting rule
``(f(rho x + 1) - f(rho x - 1)) / 2`` exactly when ``f(0) <= 0`` and

    f(x) >= (f(rho x + 1) + f(rho x - 1)) / (2 rho)

for every reachable height ``x``; with bets restricted to [-1, 1] the rule
must also stay in range. Curves are stored on a uniform dyadic grid and
read between nodes by linear interpolation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConstructionError, DomainError
from .specfun import HermiteParams, SQRT_PI, capped_hermite, hermite_payoff

DEFAULT_GRID_STEP = Fraction(1, 8)
DEFAULT_TOLERANCE = 1e-9

_K_MAX = 10.0
_K_RESOLUTION = 1e-6
_BETA_MAX = 64.0
_BETA_RESOLUTION = 1e-3
_EDGE_EPS = 1e-9


def as_grid_step(step) -> Fraction:
    """Parse a grid step (``"1/8"``, ``0.125``, ``Fraction``) and check it is 1/2^k."""
    if isinstance(step, str):
        frac = Fraction(step.strip())
    else:
        frac = Fraction(step)
    if frac <= 0 or frac.numerator != 1:
        raise DomainError(f"grid_step must be 1/2^k, got {frac}")
    den = frac.denominator
    if den & (den - 1):
        raise DomainError(f"grid_step must be 1/2^k, got {frac}")
    return frac


def _rounding_slack(values) -> float:
    finite = np.asarray(values)[np.isfinite(values)]
    scale = max(1.0, float(np.max(np.abs(finite)))) if finite.size else 1.0
    return 64 * np.finfo(float).eps * scale


@dataclass(frozen=True, eq=False)
class PayoffCurve:
    """Payoff function sampled at ``x = -w, -w + step, ..., w``.

    ``half_width`` ``w`` defaults to the window size ``n``; constructions
    that would overflow (unbounded bets) use a narrower window. ``partial``
    curves come from simulation envelopes and mark unvisited nodes as NaN.
    """

    n: int
    grid_step: Fraction
    values: np.ndarray
    bounded_bets: bool = True
    half_width: Fraction | None = None
    partial: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError("n must be an integer >= 2")
        object.__setattr__(self, "n", int(self.n))
        step = as_grid_step(self.grid_step)
        object.__setattr__(self, "grid_step", step)
        w = Fraction(self.n) if self.half_width is None else Fraction(self.half_width)
        if w <= 0 or w > self.n or (w / step).denominator != 1:
            raise DomainError("half_width must be a positive multiple of grid_step, <= n")
        object.__setattr__(self, "half_width", w)
        vals = np.array(self.values, dtype=float)
        expected = int(2 * w / step) + 1
        if vals.shape != (expected,):
            raise DomainError(f"expected {expected} values, got shape {vals.shape}")
        if self.partial:
            if np.any(np.isinf(vals)):
                raise DomainError("curve values must be finite or NaN")
        elif not np.all(np.isfinite(vals)):
            raise DomainError("curve values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def rho(self) -> float:
        return 1.0 - 1.0 / self.n

    @property
    def width(self) -> float:
        return float(self.half_width)

    @property
    def step(self) -> float:
        return float(self.grid_step)

    @property
    def xs(self) -> np.ndarray:
        return -self.width + self.step * np.arange(self.values.size)

    def __call__(self, x):
        """Linear interpolation; raises outside ``[-w, w]``."""
        arr = np.asarray(x, dtype=float)
        w = self.width
        if np.any(np.abs(arr) > w + _EDGE_EPS):
            raise DomainError(f"height outside [-{w}, {w}]")
        pos = (np.clip(arr, -w, w) + w) / self.step
        i = np.clip(np.floor(pos).astype(int), 0, self.values.size - 2)
        t = pos - i
        out = (1.0 - t) * self.values[i] + t * self.values[i + 1]
        return float(out) if np.ndim(x) == 0 else out

    def induced_bet(self, x):
        """Bet ``(f(rho x + 1) - f(rho x - 1)) / 2`` placed at height ``x``."""
        x = np.asarray(x, dtype=float)
        out = 0.5 * (self(self.rho * x + 1.0) - self(self.rho * x - 1.0))
        return float(out) if np.ndim(x) == 0 else out

    def node_index(self, x: float) -> int:
        pos = (x + self.width) / self.step
        i = round(pos)
        if abs(pos - i) > 1e-9 or not 0 <= i < self.values.size:
            raise DomainError(f"{x} is not a grid node")
        return i

    def shifted(self, k: float) -> "PayoffCurve":
        return PayoffCurve(self.n, self.grid_step, self.values - k, self.bounded_bets,
                           self.half_width, self.partial, dict(self.meta))


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    min_margin: float
    argmin_x: float
    origin_ok: bool
    lipschitz_ok: bool
    bets_ok: bool
    max_abs_bet: float
    checked: int
    skipped: int

    def summary(self) -> str:
        verdict = "feasible" if self.feasible else "INFEASIBLE"
        return (f"{verdict}: min margin {self.min_margin:.3e} at x={self.argmin_x:g}, "
                f"f(0)<=0 {self.origin_ok}, lipschitz {self.lipschitz_ok}, "
                f"max |bet| {self.max_abs_bet:.6f}, checked {self.checked} nodes "
                f"(skipped {self.skipped} near the boundary)")


def _scan_mask(curve: PayoffCurve) -> np.ndarray:
    xs = curve.xs
    return curve.rho * np.abs(xs) + 1.0 <= curve.width + _EDGE_EPS


def recursion_residual(curve: PayoffCurve, x):
    """``f(x) - (f(rho x + 1) + f(rho x - 1)) / (2 rho)``; nonnegative iff the
    steady-state inequality holds at ``x``."""
    arr = np.asarray(x, dtype=float)
    if np.any(curve.rho * np.abs(arr) + 1.0 > curve.width + _EDGE_EPS):
        raise DomainError("rho*x +- 1 leaves the curve domain")
    rho = curve.rho
    out = curve(arr) - (curve(rho * arr + 1.0) + curve(rho * arr - 1.0)) / (2.0 * rho)
    return float(out) if np.ndim(x) == 0 else out


def check_feasible(curve: PayoffCurve, tolerance: float = DEFAULT_TOLERANCE) -> FeasibilityReport:
    """Scan every grid node whose successors stay on the grid.

    Nodes with ``rho |x| + 1 > w`` are skipped; for ``w = n`` there are none.
    Lipschitz and bet-range checks get an extra allowance of a few ulps of
    ``max |f|`` so that exact 1-Lipschitz curves are not rejected for
    rounding.
    """
    if tolerance < 0:
        raise DomainError("tolerance must be >= 0")
    if curve.partial and np.any(np.isnan(curve.values)):
        raise DomainError("cannot check a curve with unvisited nodes")
    xs = curve.xs
    mask = _scan_mask(curve)
    pts = xs[mask]
    margins = recursion_residual(curve, pts)
    k = int(np.argmin(margins))
    min_margin = float(margins[k])
    bets = curve.induced_bet(pts)
    max_bet = float(np.max(np.abs(bets)))
    slack = _rounding_slack(curve.values)
    origin_ok = curve(0.0) <= tolerance
    lipschitz_ok = bool(np.all(np.abs(np.diff(curve.values)) <= curve.step + slack))
    bets_ok = max_bet <= 1.0 + tolerance + slack
    feasible = min_margin >= -tolerance and origin_ok
    if curve.bounded_bets:
        feasible = feasible and lipschitz_ok and bets_ok
    return FeasibilityReport(
        feasible=bool(feasible),
        min_margin=min_margin,
        argmin_x=float(pts[k]),
        origin_ok=bool(origin_ok),
        lipschitz_ok=lipschitz_ok,
        bets_ok=bool(bets_ok),
        max_abs_bet=max_bet,
        checked=int(mask.sum()),
        skipped=int((~mask).sum()),
    )


def _grid(n: int, step: Fraction, half_width: Fraction | None = None) -> np.ndarray:
    w = Fraction(n) if half_width is None else half_width
    return -float(w) + float(step) * np.arange(int(2 * w / step) + 1)


def _smallest_passing(passes, hi: float, resolution: float, what: str) -> float:
    if passes(0.0):
        return 0.0
    if not passes(hi):
        raise ConstructionError(f"no {what} <= {hi} makes the curve feasible")
    lo = 0.0
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return hi


def make_feasible_bounded(p: HermiteParams, n: int, grid_step=DEFAULT_GRID_STEP):
    """Bounded-bets curve ``sqrt(n) * F_hat(x / sqrt(n)) - K``.

    ``K`` is the smallest shift in ``[0, 10]`` (to 1e-6) for which the
    curve passes :func:`check_feasible` with zero tolerance (a few ulps of
    ``max |f|``, to absorb rounding).

    Returns:
        ``(curve, K)``.
    """
    if p.c1 < 0:
        raise DomainError("c1 must be >= 0 (negative c1 has unbounded loss)")
    if n < 4:
        raise DomainError("n must be >= 4")
    step = as_grid_step(grid_step)
    xs = _grid(n, step)
    root = math.sqrt(n)
    value, _ = capped_hermite(p, xs / root)
    base = PayoffCurve(n, step, root * np.asarray(value), bounded_bets=True)

    # "Tolerance 0" up to rounding: linear curves hit equality exactly and
    # would otherwise fail on 1e-16 noise.
    tol = _rounding_slack(base.values)

    def passes(k):
        return check_feasible(base.shifted(k), tolerance=tol).feasible

    k = _smallest_passing(passes, _K_MAX, _K_RESOLUTION, "shift K")
    curve = base.shifted(k)
    curve.meta.update(c1=p.c1, c2=p.c2, shift=k, construction="bounded")
    return curve, k


def unbounded_half_width(n: int, grid_step=DEFAULT_GRID_STEP) -> Fraction:
    """Grid-aligned ``sqrt(n ln n)``: beyond it ``F`` grows like ``n^(n/...)``."""
    step = as_grid_step(grid_step)
    raw = math.sqrt(n * math.log(n))
    return min(Fraction(n), Fraction(math.floor(raw / step)) * step)


def damped_hermite_values(p: HermiteParams, n: int, beta: float, xs: np.ndarray) -> np.ndarray:
    """``sqrt(n) F(lam y) / lam`` with ``y = x/sqrt(n)`` and ``lam = exp(-beta/(2n))``.

    This is the exact solution of the Hermite equation with the
    ``exp(-beta y^2 / n)`` correction folded into the argument, so for
    large ``|y|`` it behaves as ``F(y) exp(-beta (y^2/n + 1/n))`` up to
    constant factors.
    """
    lam = math.exp(-beta / (2.0 * n))
    root = math.sqrt(n)
    return root * np.asarray(hermite_payoff(p, lam * xs / root)) / lam


def make_feasible_unbounded(p: HermiteParams, n: int, grid_step=DEFAULT_GRID_STEP):
    """Unbounded-bets curve from ``F`` with the smallest damping ``beta``.

    The curve lives on ``|x| <= sqrt(n ln n)`` and ``beta`` is searched in
    ``[0, 64]`` to resolution 1e-3 for the first value that passes
    :func:`check_feasible` (zero tolerance up to rounding, unbounded bets).

    Returns:
        ``(curve, beta)``.
    """
    if p.c1 < 0:
        raise DomainError("c1 must be >= 0 (negative c1 has unbounded loss)")
    if n < 4:
        raise DomainError("n must be >= 4")
    step = as_grid_step(grid_step)
    w = unbounded_half_width(n, step)
    xs = _grid(n, step, w)

    def build(beta):
        return PayoffCurve(n, step, damped_hermite_values(p, n, beta, xs),
                           bounded_bets=False, half_width=w)

    def passes(beta):
        curve = build(beta)
        return check_feasible(curve, _rounding_slack(curve.values)).feasible

    beta = _smallest_passing(passes, _BETA_MAX, _BETA_RESOLUTION, "damping beta")
    curve = build(beta)
    curve.meta.update(c1=p.c1, c2=p.c2, beta=beta, construction="unbounded")
    return curve, beta


# -- continuum checks ----------------------------------------------------------

def _node_index(n_values: int, grid_step: float, x) -> np.ndarray:
    centre = (n_values - 1) / 2
    pos = np.asarray(x, dtype=float) / grid_step + centre
    idx = np.rint(pos).astype(int)
    if np.any(np.abs(pos - idx) > 1e-6):
        raise DomainError("x must be a grid node")
    if np.any(idx < 2) or np.any(idx > n_values - 3):
        raise DomainError("x must keep a two-node margin from the grid edge")
    return idx


def differential_residual(g_values, grid_step, x):
    """Central-difference ``g'' - 2 x g' + 2 g`` on a grid centred at 0.

    ``g_values[i]`` is ``g`` at ``(i - (len - 1) / 2) * grid_step``; ``x``
    (scalar or array) must be grid nodes at least two nodes from the edge.
    The truncation error is ``h^2 (g''''/12 - x g'''/3)``.
    """
    g = np.asarray(g_values)
    h = g.dtype.type(grid_step) if g.dtype == np.longdouble else float(grid_step)
    i = _node_index(g.size, float(grid_step), x)
    xv = (i - (g.size - 1) / 2) * h if g.dtype != np.longdouble else \
        (i.astype(np.longdouble) - np.longdouble(g.size - 1) / 2) * h
    d2 = (g[i + 1] - 2 * g[i] + g[i - 1]) / (h * h)
    d1 = (g[i + 1] - g[i - 1]) / (2 * h)
    out = d2 - 2 * xv * d1 + 2 * g[i]
    return out[()] if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class Domination:
    params: HermiteParams
    dominated: bool
    max_violation: float


def dominating_hermite(g_values, grid_step) -> Domination:
    """Match ``F_{c1,c2}`` to ``g`` at the origin and test ``g <= F`` on the grid.

    ``c1 = -sqrt(pi) g(0)`` and ``c2 = g'(0)`` (central difference); the
    grid is centred at 0 and must stay inside ``|x| <= 8``.
    """
    g = np.asarray(g_values, dtype=float)
    if g.size < 3 or g.size % 2 == 0:
        raise DomainError("need an odd number of samples centred on x = 0")
    h = float(grid_step)
    mid = g.size // 2
    params = HermiteParams(-SQRT_PI * g[mid], (g[mid + 1] - g[mid - 1]) / (2 * h))
    xs = (np.arange(g.size) - mid) * h
    excess = g - np.asarray(hermite_payoff(params, xs))
    worst = float(np.max(excess))
    return Domination(params, bool(worst <= 1e-6), max(worst, 0.0))


def regret_of(curve: PayoffCurve) -> float:
    """``max_x |x| - f(x)`` over the grid (unvisited nodes ignored)."""
    return float(np.nanmax(np.abs(curve.xs) - curve.values))


def loss_of(curve: PayoffCurve) -> float:
    """``-min_x f(x)`` over the grid."""
    return float(-np.nanmin(curve.values))


# -- CSV ---------------------------------------------------------------------

def write_curve_csv(curve: PayoffCurve, path, extra_meta: dict | None = None) -> None:
    """``x,f`` rows after ``#`` metadata lines; unvisited nodes are omitted."""
    lines = format_curve_csv(curve, extra_meta)
    Path(path).write_text(lines)


def format_curve_csv(curve: PayoffCurve, extra_meta: dict | None = None) -> str:
    head = [f"# n={curve.n} grid_step={curve.grid_step} bounded={int(curve.bounded_bets)}"
            + ("" if curve.half_width == curve.n else f" half_width={curve.half_width}")]
    for key, val in (extra_meta or {}).items():
        head.append(f"# {key}={val}")
    rows = ["x,f"]
    for x, f in zip(curve.xs, curve.values):
        if np.isfinite(f):
            rows.append(f"{float(x)!r},{float(f)!r}")
    return "\n".join(head + rows) + "\n"


def _parse_meta(line: str) -> dict:
    out = {}
    for token in line.lstrip("#").split():
        if "=" in token:
            key, val = token.split("=", 1)
            out[key] = val
    return out


def read_curve_csv(path) -> PayoffCurve:
    meta, rows = {}, []
    with open(path, newline="") as fh:
        data_lines = []
        for line in fh:
            if line.startswith("#"):
                meta.update(_parse_meta(line))
            elif line.strip():
                data_lines.append(line)
    reader = csv.DictReader(data_lines)
    if reader.fieldnames is None or not {"x", "f"} <= set(reader.fieldnames):
        raise DomainError(f"{path}: expected header 'x,f'")
    try:
        rows = [(float(r["x"]), float(r["f"])) for r in reader]
    except (TypeError, ValueError):
        raise DomainError(f"{path}: non-numeric row") from None
    if not rows:
        raise DomainError(f"{path}: no data rows")
    try:
        n = int(meta["n"])
        step = as_grid_step(meta["grid_step"])
        bounded = meta.get("bounded", "1") == "1"
    except KeyError as exc:
        raise DomainError(f"{path}: missing metadata {exc}") from None
    if "half_width" in meta:
        w = Fraction(meta["half_width"])
    else:
        w = Fraction(-min(x for x, _ in rows)).limit_denominator(step.denominator)
    size = int(2 * w / step) + 1
    values = np.full(size, np.nan)
    for x, f in rows:
        pos = (x + float(w)) / float(step)
        i = round(pos)
        if abs(pos - i) > 1e-6 or not 0 <= i < size:
            raise DomainError(f"{path}: x={x} is not on the grid")
        values[i] = f
    partial = bool(np.any(np.isnan(values)))
    return PayoffCurve(n, step, values, bounded, w, partial=partial)
