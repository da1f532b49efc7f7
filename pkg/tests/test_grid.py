import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adefrac.grid import (
    CATALOG,
    BoundarySpec,
    Grid1D,
    Grid2D,
    GridError,
    TimeAxis,
    convergence_rates,
    exact_solution,
    l2_norm,
    linf_norm,
)
from adefrac.oracles import distributed_order_residual, heat_residual


def test_grid1d_nodes_and_spacing():
    g = Grid1D(-math.pi, math.pi, 100)
    assert g.node_count == 101
    assert g.x[0] == -math.pi and g.x[-1] == math.pi
    assert g.dx == pytest.approx(2 * math.pi / 100, rel=1e-15)
    assert g.refined().M == 200


@pytest.mark.parametrize("M", [0, 1, 2.5])
def test_grid1d_rejects_degenerate(M):
    with pytest.raises(GridError):
        Grid1D(0.0, 1.0, M)


def test_grid1d_rejects_empty_domain():
    with pytest.raises(GridError):
        Grid1D(1.0, 1.0, 4)


def test_grid2d_shape_and_masks():
    g = Grid2D(Grid1D(0, 1, 4), Grid1D(0, 2, 6))
    assert g.shape == (5, 7)
    X, Y = g.mesh()
    assert X[4, 0] == 1.0 and Y[0, 6] == 2.0
    assert g.interior_mask().sum() == 3 * 5
    assert g.boundary_mask().sum() == 35 - 15


def test_time_axis_pins_final_time():
    ax = TimeAxis(0.3, 7)
    assert ax.t(7) == 0.3
    assert ax.t(0) == 0.0
    with pytest.raises(GridError):
        TimeAxis(0.0, 4)


def test_l2_norm_is_grid_scaled():
    g = Grid1D(0, 1, 4)
    e = np.array([9.0, 1.0, 1.0, 1.0, 9.0])  # boundary ignored
    assert l2_norm(e, g) == pytest.approx(math.sqrt(0.25 * 3))
    assert l2_norm(e, 0.25) == l2_norm(e, g)
    assert linf_norm(e) == 1.0


def test_norms_2d_use_cell_area():
    g = Grid2D.square(0, 1, 4)
    e = np.ones(g.shape)
    assert l2_norm(e, g) == pytest.approx(math.sqrt(9 / 16))


def test_norm_of_grid_without_interior():
    with pytest.raises(GridError, match="degenerate grid"):
        linf_norm(np.zeros(2))


def test_spacing_mismatch():
    with pytest.raises(GridError):
        l2_norm(np.zeros((4, 4)), 0.1)


def test_rates_known_values():
    rates = convergence_rates([(20, 1.0), (40, 0.25), (80, 0.0625)])
    assert rates == pytest.approx([2.0, 2.0])


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_rates_reject_invalid(bad):
    with pytest.raises(ValueError, match="invalid error magnitude"):
        convergence_rates([(10, 1.0), (20, bad)])


@settings(max_examples=50, deadline=None)
@given(e0=st.floats(1e-8, 1e3), p=st.floats(0.5, 4.0))
def test_rates_recover_power_law(e0, p):
    errs = [(10 * 2**k, e0 * 2.0 ** (-p * k)) for k in range(4)]
    assert convergence_rates(errs) == pytest.approx([p] * 3, abs=1e-9)


def test_boundary_field_evaluates_psi():
    g = Grid2D.square(0, 1, 3)
    bc = BoundarySpec.dirichlet(psi=lambda x, y, t: x + 10 * y + 100 * t)
    f = bc.boundary_field(g, 1.0)
    assert f[3, 3] == pytest.approx(111.0)
    assert BoundarySpec.zero_dirichlet().boundary_field(g, 5.0).sum() == 0.0


@pytest.mark.parametrize("name", ["heat1d-dirichlet", "heat2d-dirichlet", "heat1d-neumann"])
def test_catalog_sources_satisfy_the_pde(name):
    ex = exact_solution(name)
    lo, hi = ex.domain
    rng = np.random.default_rng(3)
    for _ in range(5):
        pt = tuple(rng.uniform(lo + 0.1, hi - 0.1, ex.dim))
        t = rng.uniform(0.2, 1.5)
        assert abs(heat_residual(ex, pt, t)) < 1e-5


def test_catalog_boundary_data_matches_solution():
    ex = exact_solution("heat1d-dirichlet")
    for t in (0.0, 0.7, 2.0):
        assert ex.boundary.left(t) == pytest.approx(ex.u(-math.pi, t), abs=1e-14)
        assert ex.boundary.right(t) == pytest.approx(ex.u(math.pi, t), abs=1e-14)
    x = Grid1D(-math.pi, math.pi, 10).x
    assert np.allclose(ex.initial(x), ex.u(x, 0.0))


def test_neumann_entry_has_zero_flux():
    ex = exact_solution("heat1d-neumann")
    h = 1e-6
    for t in (0.5, 2.0):
        assert abs(ex.u(h, t) - ex.u(0.0, t)) / h < 1e-5
        assert abs(ex.u(1.0, t) - ex.u(1.0 - h, t)) / h < 1e-5


def test_distributed_order_source_consistency():
    ex = exact_solution("dist-order")
    for pt, t in [((0.7, 1.1), 0.5), ((2.0, 0.4), 0.3)]:
        F = ex.source(*pt, t)
        assert abs(distributed_order_residual(ex, pt, t)) < 1e-6 * abs(F)


def test_catalog_lookup():
    assert set(CATALOG) == {"heat1d-dirichlet", "heat2d-dirichlet", "heat1d-neumann", "dist-order"}
    with pytest.raises(KeyError):
        exact_solution("turing")


def test_norm_examples():
    assert l2_norm(np.array([0.0, 2.0, 0.0]), 0.5) == pytest.approx(math.sqrt(2))
    assert l2_norm(np.zeros((4, 4)), (1.0, 1.0)) == 0.0
    e = np.zeros((4, 4))
    e[1:3, 1:3] = 1.0
    assert l2_norm(e, (1.0, 1.0)) == pytest.approx(2.0)
    assert linf_norm(np.array([0.0, -3.0, 1.0, 0.0])) == 3.0
    spike = np.zeros(9)
    spike[4] = 7.0
    assert linf_norm(spike) == 7.0


def test_rate_examples_from_reference_values():
    assert convergence_rates([(20, 4.18e-1), (40, 1.18e-1)])[0] == pytest.approx(1.82, abs=5e-3)
    assert convergence_rates([(40, 1.05e-2), (80, 2.65e-3)])[0] == pytest.approx(1.99, abs=5e-3)


@settings(max_examples=40, deadline=None)
@given(c=st.floats(-1e3, 1e3).filter(lambda c: c == 0 or abs(c) > 1e-100), seed=st.integers(0, 2**16))
def test_norm_homogeneity(c, seed):
    e = np.random.default_rng(seed).normal(size=(6, 5))
    assert l2_norm(c * e, (0.1, 0.2)) == pytest.approx(abs(c) * l2_norm(e, (0.1, 0.2)), rel=1e-12, abs=1e-300)
    assert linf_norm(c * e) == pytest.approx(abs(c) * linf_norm(e), rel=1e-15, abs=1e-300)
