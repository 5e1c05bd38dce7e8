"""Residual checker for the two-window system of partial differential inequalities.

With windows ``n1 = a1 n`` and ``n2 = a2 n`` a pair of payoff fields
``g1, g2`` over scaled heights ``(x1, x2)`` must satisfy

    E1 = -1/2 (d1 + d2)^2 g1 + (a1^2 x1 d1 + a2^2 x2 d2) g1 - a1^2 g1 >= 0
    E2 = -1/2 (d1 + d2)^2 g2 + (a1^2 x1 d1 + a2^2 x2 d2) g2 - a2^2 g2 >= 0
    E1 + E2 >= |(d1 + d2)(g1 - g2)|

No closed-form solution is known; this module only evaluates candidates.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

DEFAULT_BOX = 3.0
DEFAULT_SPACING = 0.02
MAX_SPACING = 0.05


@dataclass(frozen=True, eq=False)
class ScaleGrid:
    """Fields on ``x1, x2 in {-B, -B+h, ..., B}``; axis 0 is ``x1``."""

    a1: float
    a2: float
    box: float
    spacing: float
    g1: np.ndarray
    g2: np.ndarray

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0):
            raise DomainError("scale factors must be positive")
        if self.a1 == self.a2:
            raise DomainError("scale factors must differ")
        if not 0 < self.spacing <= MAX_SPACING:
            raise DomainError(f"spacing must lie in (0, {MAX_SPACING}]")
        size = self.size
        if abs((2 * self.box / self.spacing) - (size - 1)) > 1e-6:
            raise DomainError("box must be a multiple of the spacing")
        for name in ("g1", "g2"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (size, size):
                raise DomainError(f"{name} must have shape {(size, size)}")
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return int(round(2 * self.box / self.spacing)) + 1

    @property
    def axis(self) -> np.ndarray:
        return -self.box + self.spacing * np.arange(self.size)

    @classmethod
    def from_functions(cls, a1, a2, g1, g2, box=DEFAULT_BOX, spacing=DEFAULT_SPACING):
        """Sample vectorized ``g(x1, x2)`` callables on the grid."""
        size = int(round(2 * box / spacing)) + 1
        ax = -box + spacing * np.arange(size)
        x1, x2 = np.meshgrid(ax, ax, indexing="ij")
        f1 = np.broadcast_to(np.asarray(g1(x1, x2), dtype=float), x1.shape)
        f2 = np.broadcast_to(np.asarray(g2(x1, x2), dtype=float), x1.shape)
        return cls(a1, a2, box, spacing, f1, f2)

    def swapped(self) -> "ScaleGrid":
        """Relabel the windows: ``(g1, a1) <-> (g2, a2)`` and ``x1 <-> x2``."""
        return ScaleGrid(self.a2, self.a1, self.box, self.spacing, self.g2.T, self.g1.T)


def read_fields_csv(path, a1: float, a2: float) -> ScaleGrid:
    """Read ``x1,x2,g1,g2`` rows covering a full square grid (lines starting ``#`` skipped)."""
    with open(path, newline="") as fh:
        rows = [line for line in fh if line.strip() and not line.startswith("#")]
    reader = csv.DictReader(rows)
    if reader.fieldnames is None or not {"x1", "x2", "g1", "g2"} <= set(reader.fieldnames):
        raise DomainError(f"{path}: expected header x1,x2,g1,g2")
    try:
        data = np.array([[float(r[k]) for k in ("x1", "x2", "g1", "g2")] for r in reader])
    except (TypeError, ValueError):
        raise DomainError(f"{path}: non-numeric row") from None
    if data.size == 0:
        raise DomainError(f"{path}: no rows")
    ax = np.unique(data[:, 0])
    if not np.array_equal(ax, np.unique(data[:, 1])) or ax.size ** 2 != data.shape[0]:
        raise DomainError(f"{path}: rows must cover a square grid exactly once")
    # span over node count, rounded so 0.05 read from text stays 0.05
    spacing = float(f"{(ax[-1] - ax[0]) / (ax.size - 1):.12g}") if ax.size > 1 else 0.0
    if ax.size < 3 or not np.allclose(np.diff(ax), spacing, rtol=0, atol=1e-9):
        raise DomainError(f"{path}: grid must be uniform with at least 3 nodes per axis")
    if not math.isclose(ax[0], -ax[-1], abs_tol=1e-9):
        raise DomainError(f"{path}: grid must be symmetric about 0")
    i = np.rint((data[:, 0] - ax[0]) / spacing).astype(int)
    j = np.rint((data[:, 1] - ax[0]) / spacing).astype(int)
    g1 = np.empty((ax.size, ax.size))
    g2 = np.empty_like(g1)
    g1[i, j] = data[:, 2]
    g2[i, j] = data[:, 3]
    return ScaleGrid(a1, a2, float(ax[-1]), spacing, g1, g2)


def _partials(g: np.ndarray, h: float):
    """Interior ``d1, d2, (d1 + d2)^2`` by central differences."""
    c = g[1:-1, 1:-1]
    d1 = (g[2:, 1:-1] - g[:-2, 1:-1]) / (2 * h)
    d2 = (g[1:-1, 2:] - g[1:-1, :-2]) / (2 * h)
    d11 = (g[2:, 1:-1] - 2 * c + g[:-2, 1:-1]) / (h * h)
    d22 = (g[1:-1, 2:] - 2 * c + g[1:-1, :-2]) / (h * h)
    d12 = (g[2:, 2:] - g[2:, :-2] - g[:-2, 2:] + g[:-2, :-2]) / (4 * h * h)
    return d1, d2, d11 + 2 * d12 + d22


def residual_fields(grid: ScaleGrid):
    """``(E1, E2, slack)`` on the interior nodes (shape ``(size-2, size-2)``)."""
    h = grid.spacing
    inner = grid.axis[1:-1]
    x1, x2 = np.meshgrid(inner, inner, indexing="ij")
    s1, s2 = grid.a1 ** 2, grid.a2 ** 2
    out = []
    for g, own in ((grid.g1, s1), (grid.g2, s2)):
        d1, d2, dd = _partials(g, h)
        out.append(-0.5 * dd + s1 * x1 * d1 + s2 * x2 * d2 - own * g[1:-1, 1:-1])
    e1, e2 = out
    diff = grid.g1 - grid.g2
    d1, d2, _ = _partials(diff, h)
    slack = e1 + e2 - np.abs(d1 + d2)
    return e1, e2, slack


def residual_at(grid: ScaleGrid, x1: float, x2: float) -> tuple[float, float, float]:
    """``(E1, E2, slack)`` at one interior node."""
    h = grid.spacing
    idx = []
    for x in (x1, x2):
        pos = (x + grid.box) / h
        k = round(pos)
        if abs(pos - k) > 1e-6:
            raise DomainError(f"{x} is not a grid node")
        if not 1 <= k <= grid.size - 2:
            raise DomainError(f"{x} is on or outside the grid boundary")
        idx.append(k - 1)
    e1, e2, slack = residual_fields(grid)
    i, j = idx
    return float(e1[i, j]), float(e2[i, j]), float(slack[i, j])


@dataclass(frozen=True)
class MultiscaleReport:
    feasible: bool
    tolerance: float
    minima: dict
    argmins: dict

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "tolerance": self.tolerance,
            "minima": dict(self.minima),
            "argmins": {k: list(v) for k, v in self.argmins.items()},
        }


def check_pair(grid: ScaleGrid, tolerance: float = 1e-9) -> MultiscaleReport:
    """Feasible iff every interior minimum of ``E1``, ``E2`` and slack is ``>= -tolerance``."""
    inner = grid.axis[1:-1]
    minima, argmins = {}, {}
    for name, field in zip(("E1", "E2", "slack"), residual_fields(grid)):
        i, j = np.unravel_index(int(np.argmin(field)), field.shape)
        minima[name] = float(field[i, j])
        argmins[name] = (float(inner[i]), float(inner[j]))
    feasible = all(v >= -tolerance for v in minima.values())
    return MultiscaleReport(feasible, tolerance, minima, argmins)
