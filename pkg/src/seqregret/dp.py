"""Exact fixed-horizon minimax dynamic programming.

Undiscounted: with a terminal payoff target ``f`` at time ``T``, the minimal
payoff needed at ``(t, x)`` is ``s_t(x) = (s_{t+1}(x+1) + s_{t+1}(x-1)) / 2``
and the optimal bet from that state is half the difference. Everything is
rational, so the table is built with ``Fraction`` and identities hold
exactly.

Discounted: heights ``sum b_i rho^(T-i)`` do not merge, so the recursion runs
over the full history tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Mapping, Union

import numpy as np

from .errors import DomainError, ResourceError

MAX_TABLE_T = 30
MAX_BINOMIAL_T = 60
MAX_TREE_T = 22

Terminal = Union[Callable[[int], object], Mapping[int, object]]


def _terminal_values(terminal: Terminal, T: int) -> dict[int, Fraction]:
    """Exact values of the terminal payoff on ``{-T, -T+2, ..., T}``."""
    out = {}
    for x in range(-T, T + 1, 2):
        raw = terminal[x] if isinstance(terminal, Mapping) else terminal(x)
        try:
            # floats convert exactly to their binary value
            out[x] = Fraction(raw)
        except (TypeError, ValueError, OverflowError):
            raise DomainError(f"terminal({x}) = {raw!r} is not a finite number") from None
    return out


@dataclass(frozen=True)
class DPTable:
    """``s[(t, x)]`` is the minimal payoff needed at time ``t`` and height ``x``;
    ``bet[(t, x)]`` is the bet placed from that state (``t < T``)."""

    T: int
    s: dict
    bet: dict

    @property
    def value(self) -> Fraction:
        return self.s[(0, 0)]

    def max_abs_bet(self) -> Fraction:
        return max(abs(b) for b in self.bet.values())

    def rows(self):
        """``(t, x, s, bet)`` in time-major order; the bet is blank at ``t = T``."""
        for t in range(self.T + 1):
            for x in range(-t, t + 1, 2):
                yield t, x, self.s[(t, x)], self.bet.get((t, x))


def minimax_table(T: int, terminal: Terminal) -> DPTable:
    """Backward induction in exact rationals for ``1 <= T <= 30``."""
    if not isinstance(T, int) or not 1 <= T <= MAX_TABLE_T:
        raise DomainError(f"T must be an integer in [1, {MAX_TABLE_T}]")
    s = {(T, x): v for x, v in _terminal_values(terminal, T).items()}
    bet = {}
    for t in range(T - 1, -1, -1):
        for x in range(-t, t + 1, 2):
            up, down = s[(t + 1, x + 1)], s[(t + 1, x - 1)]
            s[(t, x)] = (up + down) / 2
            bet[(t, x)] = (up - down) / 2
    return DPTable(T, s, bet)


def cover_feasibility(terminal: Terminal, T: int) -> tuple[bool, bool]:
    """``(binomial sum is 0, |f(y+2) - f(y)| <= 2 on reachable heights)``."""
    if not isinstance(T, int) or not 1 <= T <= MAX_BINOMIAL_T:
        raise DomainError(f"T must be an integer in [1, {MAX_BINOMIAL_T}]")
    f = _terminal_values(terminal, T)
    total = sum(comb(T, k) * f[T - 2 * k] for k in range(T + 1))
    lipschitz = all(abs(f[y + 2] - f[y]) <= 2 for y in range(-T, T, 2))
    return total == 0, lipschitz


def expected_abs_height(T: int) -> Fraction:
    """``E|b_1 + ... + b_T|`` for uniform random signs, exactly."""
    if not isinstance(T, int) or not 0 <= T <= MAX_BINOMIAL_T:
        raise DomainError(f"T must be an integer in [0, {MAX_BINOMIAL_T}]")
    return Fraction(sum(comb(T, k) * abs(T - 2 * k) for k in range(T + 1)), 2**T)


def alpha(rho: float, T: int) -> float:
    """Variance ``(1 - rho^(2T)) / (1 - rho^2)`` of the discounted height after ``T`` steps."""
    if not 0.0 < rho < 1.0:
        raise DomainError("rho must lie in (0, 1)")
    if T < 0:
        raise DomainError("T must be >= 0")
    return (1.0 - rho ** (2 * T)) / (1.0 - rho * rho)


def discounted_heights(T: int, rho: float) -> np.ndarray:
    """All ``2^T`` final discounted heights, leaf ``i`` spelling its bits in
    binary from the first step (0 = +1)."""
    if T > MAX_TREE_T:
        raise ResourceError(f"T={T} exceeds the tree limit {MAX_TREE_T}")
    h = np.zeros(1)
    for _ in range(T):
        h = np.stack([rho * h + 1.0, rho * h - 1.0], axis=-1).ravel()
    return h


def discounted_minimax(T: int, rho: float, terminal: Callable) -> tuple[float, float]:
    """Root requirement of the discounted game and the largest optimal bet.

    A node that needs payoff ``s'`` at both children after ``a <- rho a + b bet``
    needs ``(s'_+ + s'_-) / (2 rho)``, with bet ``(s'_+ - s'_-) / 2``; so the
    root value is ``E[f(h_T)] / rho^T``. ``terminal`` must accept arrays.

    Returns:
        ``(s_0, max |bet|)``.
    """
    if not isinstance(T, int) or T < 1:
        raise DomainError("T must be a positive integer")
    if T > MAX_TREE_T:
        raise ResourceError(f"T={T} exceeds the tree limit {MAX_TREE_T} (2^T leaves)")
    if not 0.0 < rho <= 1.0:
        raise DomainError("rho must lie in (0, 1]")
    values = np.asarray(terminal(discounted_heights(T, rho)), dtype=float)
    max_bet = 0.0
    for _ in range(T):
        pairs = values.reshape(-1, 2)
        max_bet = max(max_bet, float(np.max(np.abs(pairs[:, 0] - pairs[:, 1]))) / 2)
        values = (pairs[:, 0] + pairs[:, 1]) / (2.0 * rho)
    return float(values[0]), max_bet
