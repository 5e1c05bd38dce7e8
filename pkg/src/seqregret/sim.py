"""Game engine: strategies against bit sequences, and adversaries that search for regret."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .curves import DEFAULT_GRID_STEP, PayoffCurve, as_grid_step
from .errors import DomainError, ResourceError
from .strategies import Strategy

MAX_EXHAUSTIVE_T = 22
MAX_HORIZON = 10**6


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 < rho <= 1.0:
        raise DomainError("rho must lie in (0, 1]")
    return rho


@dataclass
class GameTrace:
    """Per-step record. Row ``t`` holds the bit and bet of step ``t`` and the
    state after it; regret is ``|h| - a`` with discounting."""

    rho: float
    t: np.ndarray
    bit: np.ndarray
    bet: np.ndarray
    h: np.ndarray
    a: np.ndarray
    a_raw: np.ndarray
    regret: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return int(self.t.size)

    @property
    def max_regret(self) -> float:
        return float(self.regret.max()) if len(self) else 0.0

    def recomputed_payoff(self) -> float:
        """``sum_t b_t bet_t rho^(T-t)`` evaluated directly, not incrementally."""
        T = len(self)
        weights = self.rho ** (T - 1 - np.arange(T, dtype=float))
        return float(np.sum(self.bit * self.bet * weights))

    def to_csv(self, header: str = "") -> str:
        buf = io.StringIO()
        buf.write(header)
        buf.write("t,bit,bet,h,a,a_raw,regret\n")
        for row in zip(self.t, self.bit, self.bet, self.h, self.a, self.a_raw, self.regret):
            t, bit, rest = int(row[0]), int(row[1]), row[2:]
            buf.write(f"{t},{bit}," + ",".join(repr(float(v)) for v in rest) + "\n")
        return buf.getvalue()


def run(s: Strategy, bits, rho: float) -> GameTrace:
    """Play ``s`` against ``bits``; the bet is chosen from ``h`` before the bit is seen."""
    rho = _check_rho(rho)
    bits = np.asarray(bits, dtype=int).ravel()
    if bits.size and not np.all(np.abs(bits) == 1):
        raise DomainError("bits must be +1 or -1")
    T = bits.size
    bets = np.empty(T)
    hs = np.empty(T)
    as_ = np.empty(T)
    raw = np.empty(T)
    h = a = a_raw = 0.0
    for t in range(T):
        b = s.bet(h)
        bets[t] = b
        h = rho * h + bits[t]
        a = rho * a + bits[t] * b
        a_raw += bits[t] * b
        hs[t], as_[t], raw[t] = h, a, a_raw
    return GameTrace(rho, np.arange(1, T + 1), bits.astype(float), bets, hs, as_, raw,
                     np.abs(hs) - as_, {"strategy": s.label()})


def _expand(h, a, bets, rho):
    """Children of every node, ordered (+1 child, -1 child) per parent."""
    h_new = np.stack([rho * h + 1.0, rho * h - 1.0], axis=-1).ravel()
    a_new = np.stack([rho * a + bets, rho * a - bets], axis=-1).ravel()
    return h_new, a_new


def _bits_of(index: int, T: int) -> list[int]:
    return [1 if (index >> (T - 1 - k)) & 1 == 0 else -1 for k in range(T)]


def exhaustive_worst_regret(s: Strategy, rho: float, T: int):
    """Maximize ``|h_T| - a_T`` over all ``2^T`` sequences.

    Returns:
        ``(regret, witness_bits)``.
    """
    rho = _check_rho(rho)
    if T < 1:
        raise DomainError("T must be >= 1")
    if T > MAX_EXHAUSTIVE_T:
        raise ResourceError(f"T={T} exceeds the exhaustive limit {MAX_EXHAUSTIVE_T}")
    h = np.zeros(1)
    a = np.zeros(1)
    for _ in range(T):
        h, a = _expand(h, a, np.asarray(s.bet(h)), rho)
    regret = np.abs(h) - a
    k = int(np.argmax(regret))
    return float(regret[k]), _bits_of(k, T)


@dataclass(frozen=True)
class GuaranteeReport:
    holds: bool
    min_slack: float
    worst_t: int
    witness: list
    sequences: int


def exhaustive_guarantee(curve: PayoffCurve, T: int, tolerance: float = 1e-9,
                         strategy: Strategy | None = None) -> GuaranteeReport:
    """Check ``a_t >= f(h_t)`` at every step of every sequence of length ``T``.

    Uses the curve's own betting rule unless ``strategy`` is given, with the
    curve's discount ``1 - 1/n``.
    """
    if T > MAX_EXHAUSTIVE_T:
        raise ResourceError(f"T={T} exceeds the exhaustive limit {MAX_EXHAUSTIVE_T}")
    s = strategy or Strategy.from_curve(curve)
    rho = curve.rho
    h = np.zeros(1)
    a = np.zeros(1)
    worst, worst_t, witness = np.inf, 0, []
    for t in range(1, T + 1):
        h, a = _expand(h, a, np.asarray(s.bet(h)), rho)
        slack = a - np.asarray(curve(h))
        k = int(np.argmin(slack))
        if slack[k] < worst:
            worst, worst_t, witness = float(slack[k]), t, _bits_of(k, t)
    return GuaranteeReport(worst >= -tolerance, worst, worst_t, witness, 2**T)


def greedy_adversary(s: Strategy, rho: float, horizon: int, lookahead: int = 1,
                     first_bit: int = 1):
    """Myopic adversary: each step picks the bit whose best ``lookahead``-step
    continuation reaches the largest ``|h| - a`` anywhere along the way.

    Ties go to ``first_bit``. Returns ``(max regret over time, trace)``.
    """
    rho = _check_rho(rho)
    if lookahead not in (1, 2, 3):
        raise DomainError("lookahead must be 1, 2 or 3")
    if not 1 <= horizon <= MAX_HORIZON:
        raise DomainError(f"horizon must be in [1, {MAX_HORIZON}]")
    if first_bit not in (1, -1):
        raise DomainError("first_bit must be +1 or -1")
    # Offsets of every tree node below the root, by depth, as affine maps of
    # the root height: node height = rho^d * h + offset.
    levels = []
    offs = np.zeros(1)
    for d in range(1, lookahead + 1):
        offs = np.stack([rho * offs + 1.0, rho * offs - 1.0], axis=-1).ravel()
        levels.append(offs)
    inner = np.concatenate([np.zeros(1)] + levels[:-1])
    scale = np.concatenate([np.full(2**d, rho**d) for d in range(lookahead)])
    bits = np.empty(horizon)
    bets = np.empty(horizon)
    hs = np.empty(horizon)
    as_ = np.empty(horizon)
    raw = np.empty(horizon)
    h = a = a_raw = 0.0
    for t in range(horizon):
        node_bets = np.atleast_1d(s.bet(scale * h + inner))
        start = 0
        best = np.full(2, -np.inf)
        ah = np.array([a])
        hh = np.array([h])
        for d in range(lookahead):
            width = 2**d
            hh, ah = _expand(hh, ah, node_bets[start:start + width], rho)
            start += width
            reg = np.abs(hh) - ah
            best = np.maximum(best, reg.reshape(2, -1).max(axis=1))
        if best[0] > best[1]:
            bit = 1
        elif best[1] > best[0]:
            bit = -1
        else:
            bit = first_bit
        b = node_bets[0]
        h = rho * h + bit
        a = rho * a + bit * b
        a_raw += bit * b
        bits[t], bets[t], hs[t], as_[t], raw[t] = bit, b, h, a, a_raw
    trace = GameTrace(rho, np.arange(1, horizon + 1), bits, bets, hs, as_, raw,
                      np.abs(hs) - as_, {"strategy": s.label(),
                                         "adversary": f"greedy(lookahead={lookahead})"})
    return trace.max_regret, trace


def empirical_payoff_curve(s: Strategy, rho: float, horizon: int, probes: int,
                           seed: int = 0, grid_step=DEFAULT_GRID_STEP) -> PayoffCurve:
    """Lower envelope of visited ``(h, a)`` pairs, bucketed onto the curve grid.

    Runs the greedy adversary from both opening signs plus ``probes`` random
    sequences whose bias is itself drawn per probe, so that the walk visits
    both tails. Unvisited buckets stay NaN. This is a measurement
    instrument, not a construction from the theory.
    """
    if probes < 1:
        raise DomainError("probes must be >= 1")
    rho = _check_rho(rho)
    step = as_grid_step(grid_step)
    n = s.n
    size = int(2 * n / step) + 1
    env = np.full(size, np.inf)

    def absorb(trace):
        idx = np.rint((trace.h + n) / float(step)).astype(int)
        ok = (idx >= 0) & (idx < size)
        np.minimum.at(env, idx[ok], trace.a[ok])

    for sign in (1, -1):
        absorb(greedy_adversary(s, rho, horizon, 1, first_bit=sign)[1])
    rng = np.random.default_rng(seed)
    for _ in range(probes):
        p_plus = rng.uniform(0.0, 1.0)
        bits = np.where(rng.uniform(size=horizon) < p_plus, 1, -1)
        absorb(run(s, bits, rho))
    env[np.isinf(env)] = np.nan
    curve = PayoffCurve(n, step, env, bounded_bets=s.bet_bound, partial=True)
    curve.meta.update(strategy=s.label(), seed=seed, probes=probes, horizon=horizon,
                      instrument="greedy+random-probe envelope")
    return curve
