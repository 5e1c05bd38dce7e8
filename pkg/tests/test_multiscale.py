import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqregret.errors import DomainError
from seqregret.multiscale import (
    ScaleGrid, check_pair, read_fields_csv, residual_at, residual_fields,
)

MONOMIALS = [(i, j) for i in range(4) for j in range(4) if i + j <= 3]


def zero(x1, x2):
    return np.zeros_like(x1)


def interior(grid):
    ax = grid.axis[1:-1]
    return np.meshgrid(ax, ax, indexing="ij")


def poly_parts(coef, x1, x2):
    """Value, d1, d2 and (d1 + d2)^2 of sum c_ij x1^i x2^j in closed form."""
    g = d1 = d2 = dd = 0.0
    for (i, j), c in zip(MONOMIALS, coef):
        g = g + c * x1**i * x2**j
        if i:
            d1 = d1 + c * i * x1 ** (i - 1) * x2**j
        if j:
            d2 = d2 + c * j * x1**i * x2 ** (j - 1)
        if i > 1:
            dd = dd + c * i * (i - 1) * x1 ** (i - 2) * x2**j
        if j > 1:
            dd = dd + c * j * (j - 1) * x1**i * x2 ** (j - 2)
        if i and j:
            dd = dd + 2 * c * i * j * x1 ** (i - 1) * x2 ** (j - 1)
    return g, d1, d2, dd


def exact_residuals(c1, c2, a1, a2, x1, x2):
    out = []
    for coef, own in ((c1, a1**2), (c2, a2**2)):
        g, d1, d2, dd = poly_parts(coef, x1, x2)
        out.append(-0.5 * dd + a1**2 * x1 * d1 + a2**2 * x2 * d2 - own * g)
    _, e1, e2, _ = poly_parts(np.subtract(c1, c2), x1, x2)
    return out[0], out[1], out[0] + out[1] - np.abs(e1 + e2)


def poly(coef):
    return lambda x1, x2: sum(c * x1**i * x2**j for (i, j), c in zip(MONOMIALS, coef))


# -- closed-form examples ---------------------------------------------------

def test_zero_pair():
    grid = ScaleGrid.from_functions(1, 2, zero, zero)
    for field in residual_fields(grid):
        assert np.all(field == 0)
    rep = check_pair(grid)
    assert rep.feasible and rep.minima == {"E1": 0.0, "E2": 0.0, "slack": 0.0}


def test_single_linear_field_violates_slack():
    grid = ScaleGrid.from_functions(1, 2, lambda x1, x2: x1, zero)
    e1, e2, slack = residual_fields(grid)
    assert np.max(np.abs(e1)) < 1e-10 and np.all(e2 == 0)
    assert np.allclose(slack, -1, atol=1e-10)
    rep = check_pair(grid)
    assert not rep.feasible and rep.minima["slack"] == pytest.approx(-1)


def test_equal_linear_fields():
    a1, a2 = 1.0, 2.0
    grid = ScaleGrid.from_functions(a1, a2, lambda x1, x2: x1, lambda x1, x2: x1)
    x1, _ = interior(grid)
    e1, e2, slack = residual_fields(grid)
    assert np.max(np.abs(e1)) < 1e-10
    assert np.allclose(e2, (a1**2 - a2**2) * x1, atol=1e-10)
    assert np.allclose(slack, e1 + e2, atol=1e-12)


def test_small_diagonal_pair_is_reported():
    c = 0.01
    grid = ScaleGrid.from_functions(1, 2, lambda x1, x2: c * (x1 + x2),
                                    lambda x1, x2: c * (x1 + x2))
    rep = check_pair(grid).to_dict()
    assert set(rep["minima"]) == {"E1", "E2", "slack"}
    assert all(len(v) == 2 for v in rep["argmins"].values())
    assert isinstance(rep["feasible"], bool)


# -- finite-difference accuracy ---------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=len(MONOMIALS), max_size=len(MONOMIALS)),
       st.lists(st.floats(-1, 1), min_size=len(MONOMIALS), max_size=len(MONOMIALS)))
def test_cubic_fields_match_closed_form(c1, c2):
    a1, a2, h = 0.5, 1.0, 0.05
    grid = ScaleGrid.from_functions(a1, a2, poly(c1), poly(c2), box=3.0, spacing=h)
    x1, x2 = interior(grid)
    bound = 10 * h * h * max(1.0, max(map(abs, c1 + c2)))
    for got, want in zip(residual_fields(grid), exact_residuals(c1, c2, a1, a2, x1, x2)):
        assert np.max(np.abs(got - want)) < bound


def test_quadratic_fields_are_exact():
    c1 = [0.3, -0.2, 0.5, 0, 0.1, 0.7, 0, -0.4, 0, 0]
    c2 = [-1, 0.5, 0, 0, 0.25, 0, 0, 0.6, 0, 0]
    grid = ScaleGrid.from_functions(0.7, 1.3, poly(c1), poly(c2), spacing=0.025)
    x1, x2 = interior(grid)
    for got, want in zip(residual_fields(grid), exact_residuals(c1, c2, 0.7, 1.3, x1, x2)):
        assert np.max(np.abs(got - want)) < 1e-9


# -- symmetry ---------------------------------------------------------------

@pytest.mark.parametrize("a1, a2", [(1, 2), (0.5, 1.5)])
def test_swapping_windows_swaps_residuals(a1, a2):
    grid = ScaleGrid.from_functions(a1, a2, lambda x1, x2: np.sin(x1) * x2**2 - 1,
                                    lambda x1, x2: np.cos(x2 - x1) + 0.3 * x1)
    e1, e2, slack = residual_fields(grid)
    s1, s2, sslack = residual_fields(grid.swapped())
    assert np.allclose(s1, e2.T, atol=1e-10)
    assert np.allclose(s2, e1.T, atol=1e-10)
    assert np.allclose(sslack, slack.T, atol=1e-10)


# -- point queries and validation -------------------------------------------

def test_residual_at_nodes():
    grid = ScaleGrid.from_functions(1, 2, lambda x1, x2: x1 * x2, lambda x1, x2: x1**2)
    e1, e2, slack = residual_fields(grid)
    ax = grid.axis
    for i, j in itertools.product((1, 40, grid.size - 2), repeat=2):
        got = residual_at(grid, float(ax[i]), float(ax[j]))
        assert got == pytest.approx((e1[i - 1, j - 1], e2[i - 1, j - 1], slack[i - 1, j - 1]))
    with pytest.raises(DomainError):
        residual_at(grid, -3.0, 0.0)
    with pytest.raises(DomainError):
        residual_at(grid, 0.011, 0.0)


@pytest.mark.parametrize("kwargs", [dict(a1=1, a2=1), dict(a1=0, a2=1),
                                    dict(spacing=0.1), dict(box=3.01)])
def test_grid_validation(kwargs):
    args = dict(a1=1.0, a2=2.0, box=3.0, spacing=0.02)
    args.update(kwargs)
    size = int(round(2 * 3.0 / 0.02)) + 1
    with pytest.raises(DomainError):
        ScaleGrid(g1=np.zeros((size, size)), g2=np.zeros((size, size)), **args)


def test_grid_rejects_bad_fields():
    with pytest.raises(DomainError):
        ScaleGrid(1, 2, 1.0, 0.05, np.zeros((41, 41)), np.zeros((40, 40)))
    bad = np.zeros((41, 41))
    bad[3, 3] = np.inf
    with pytest.raises(DomainError):
        ScaleGrid(1, 2, 1.0, 0.05, bad, np.zeros((41, 41)))


def write_fields(path, grid):
    ax = grid.axis
    lines = ["# fields", "x1,x2,g1,g2"]
    for i, j in itertools.product(range(grid.size), repeat=2):
        lines.append(",".join(repr(float(v)) for v in (ax[i], ax[j], grid.g1[i, j], grid.g2[i, j])))
    path.write_text("\n".join(lines) + "\n")


def test_fields_csv_round_trip(tmp_path):
    grid = ScaleGrid.from_functions(1, 2, lambda x1, x2: x1 - 2 * x2, lambda x1, x2: x1 * x2,
                                    box=1.0, spacing=0.05)
    path = tmp_path / "f.csv"
    write_fields(path, grid)
    back = read_fields_csv(path, 1, 2)
    assert back.size == grid.size and back.spacing == pytest.approx(0.05)
    assert np.array_equal(back.g1, grid.g1) and np.array_equal(back.g2, grid.g2)


@pytest.mark.parametrize("text", [
    "a,b\n1,2\n",
    "x1,x2,g1,g2\n",
    "x1,x2,g1,g2\n0,0,0,0\n",
    "x1,x2,g1,g2\n-0.05,-0.05,0,0\n-0.05,0,0,0\n0,0,0,0\n",
])
def test_fields_csv_rejects_malformed(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(DomainError):
        read_fields_csv(path, 1, 2)


def test_fields_csv_rejects_text_values(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x1,x2,g1,g2\n0,0,zero,0\n")
    with pytest.raises(DomainError):
        read_fields_csv(path, 1, 2)
