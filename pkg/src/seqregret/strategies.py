"""Time-independent betting rules: functions of the discounted height."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curves import PayoffCurve, read_curve_csv
from .errors import DomainError
from .specfun import HermiteParams, erfi

KINDS = ("curve_induced", "hermite", "weighted_majority", "constant_plus", "constant_minus")


@dataclass(frozen=True)
class Strategy:
    """A betting rule ``x -> bet``.

    ``n`` is the window size (heights live in ``[-n, n]``); a curve-induced
    strategy takes it from its curve. ``bet_bound`` clamps to [-1, 1].
    """

    kind: str
    n: int
    params: Optional[HermiteParams] = None
    curve: Optional[PayoffCurve] = None
    bet_bound: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown strategy kind {self.kind!r}")
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.kind == "hermite" and self.params is None:
            raise DomainError("hermite strategy needs params")
        if self.kind == "curve_induced":
            if self.curve is None:
                raise DomainError("curve_induced strategy needs a curve")
            if self.curve.n != self.n:
                raise DomainError("strategy n must match the curve's n")

    @classmethod
    def hermite(cls, p: HermiteParams, n: int, bet_bound: bool = True) -> "Strategy":
        return cls("hermite", n, params=p, bet_bound=bet_bound)

    @classmethod
    def weighted_majority(cls, n: int) -> "Strategy":
        return cls("weighted_majority", n)

    @classmethod
    def from_curve(cls, curve: PayoffCurve) -> "Strategy":
        return cls("curve_induced", curve.n, curve=curve, bet_bound=curve.bounded_bets)

    @classmethod
    def constant(cls, sign: int, n: int = 1) -> "Strategy":
        return cls("constant_plus" if sign > 0 else "constant_minus", n)

    @property
    def rho(self) -> float:
        return 1.0 - 1.0 / self.n

    @property
    def domain(self) -> float:
        if self.kind == "curve_induced":
            return (self.curve.width - 1.0) / self.rho
        return float(self.n)

    def bet(self, x):
        """Bet placed at discounted height ``x`` (scalar or array)."""
        arr = np.asarray(x, dtype=float)
        if self.kind in ("constant_plus", "constant_minus"):
            # constants do not look at the height, so any real x is fine
            if not np.all(np.isfinite(arr)):
                raise DomainError("height must be finite")
            out = np.full(arr.shape, 1.0 if self.kind == "constant_plus" else -1.0)
            return float(out) if np.ndim(x) == 0 else out
        if not np.all(np.abs(arr) <= self.domain + 1e-9):
            raise DomainError(f"height outside [-{self.domain:g}, {self.domain:g}]")
        root = math.sqrt(self.n)
        if self.kind == "hermite":
            out = self.params.c1 * np.asarray(erfi(arr / root)) + self.params.c2
        elif self.kind == "weighted_majority":
            out = np.tanh(arr / root)
        else:
            out = np.asarray(self.curve.induced_bet(arr))
        if self.bet_bound:
            out = np.clip(out, -1.0, 1.0)
        return float(out) if np.ndim(x) == 0 else out

    def __call__(self, x):
        return self.bet(x)

    def label(self) -> str:
        if self.kind == "hermite":
            return f"hermite(c1={self.params.c1:.6g},c2={self.params.c2:.6g})"
        if self.kind == "weighted_majority":
            return "weighted_majority"
        if self.kind == "curve_induced":
            return "curve_induced"
        return self.kind


def _parse_params(body: str) -> HermiteParams:
    vals = {}
    for item in body.split(","):
        if "=" not in item:
            raise DomainError(f"bad hermite parameter {item!r}")
        key, raw = (s.strip() for s in item.split("=", 1))
        if key not in ("c1", "c2") or key in vals:
            raise DomainError(f"bad hermite parameter {item!r}")
        if key == "c1" and raw == "opt":
            from .tradeoff import optimal_params
            vals[key] = optimal_params().c1
            continue
        try:
            vals[key] = float(raw)
        except ValueError:
            raise DomainError(f"bad number {raw!r}") from None
    if set(vals) != {"c1", "c2"}:
        raise DomainError("hermite needs both c1 and c2")
    return HermiteParams(vals["c1"], vals["c2"])


def parse_strategy(spec: str, n: int, bet_bound: bool = True) -> Strategy:
    """Parse ``hermite:c1=<r>,c2=<r>``, ``wm``, ``curve:<path>``, ``const:+``, ``const:-``.

    ``c1=opt`` selects the regret-optimal coefficient.
    """
    spec = spec.strip()
    if spec == "wm":
        return Strategy.weighted_majority(n)
    if spec in ("const:+", "const:-"):
        return Strategy.constant(1 if spec.endswith("+") else -1, n)
    if spec.startswith("hermite:"):
        return Strategy.hermite(_parse_params(spec[len("hermite:"):]), n, bet_bound)
    if spec.startswith("curve:"):
        path = spec[len("curve:"):]
        try:
            curve = read_curve_csv(path)
        except OSError as exc:
            raise DomainError(f"cannot read curve {path!r}: {exc}") from None
        return Strategy.from_curve(curve)
    raise DomainError(f"unknown strategy spec {spec!r}")
