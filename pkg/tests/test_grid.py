import numpy as np
import pytest

from sheathsim.grid import MIN_CELLS, Grid1D


def test_uniform_grid_basic():
    g = Grid1D.uniform(2.0, 32)
    assert g.n_cells == 32
    assert g.length == 2.0
    assert np.allclose(g.widths, 2.0 / 32)
    assert np.allclose(g.centers, g.x_edges[:-1] + g.widths / 2)
    assert np.sum(g.widths) == pytest.approx(2.0, rel=1e-15)


def test_grid_rejects_too_few_cells():
    with pytest.raises(ValueError, match="at least"):
        Grid1D(np.linspace(0.0, 1.0, MIN_CELLS))  # one cell short


def test_grid_rejects_nonzero_start():
    with pytest.raises(ValueError, match="start"):
        Grid1D(np.linspace(0.5, 1.0, 40))


def test_grid_rejects_decreasing_edges():
    edges = np.linspace(0.0, 1.0, 40)
    edges[5] = edges[7]
    with pytest.raises(ValueError, match="increasing"):
        Grid1D(edges)


def test_graded_grid_structure():
    g = Grid1D.graded(1.0, first_width=1e-3, ratio=1.1,
                      interior_width=1.0 / 64)
    assert g.widths[0] == pytest.approx(1e-3)
    # geometric growth until the interior width is reached
    ratios = g.widths[1:6] / g.widths[:5]
    assert np.allclose(ratios, 1.1)
    assert np.max(g.widths) <= 1.0 / 64 + 1e-12
    assert g.x_edges[-1] == 1.0
    assert np.sum(g.widths) == pytest.approx(1.0, rel=1e-12)


def test_graded_grid_resolves_layer():
    eps = 0.01
    g = Grid1D.graded(1.0, first_width=eps / 24, ratio=1.1,
                      interior_width=1.0 / 64)
    assert int(np.sum(g.centers < 5 * eps)) >= 8


def test_graded_rejects_bad_ratio():
    for ratio in (1.0, 1.25, 0.9):
        with pytest.raises(ValueError, match="ratio"):
            Grid1D.graded(1.0, 1e-3, ratio, 1.0 / 64)


def test_graded_rejects_bad_first_width():
    with pytest.raises(ValueError, match="first cell"):
        Grid1D.graded(1.0, 0.1, 1.1, 1.0 / 64)
    with pytest.raises(ValueError, match="first cell"):
        Grid1D.graded(1.0, 0.0, 1.1, 1.0 / 64)


def test_graded_tiny_domain_meets_cell_floor():
    g = Grid1D.graded(0.05, first_width=0.01, ratio=1.1, interior_width=0.05)
    assert g.n_cells >= MIN_CELLS
    assert g.x_edges[-1] == 0.05
