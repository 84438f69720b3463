import numpy as np
import pytest
from hypothesis import given, strategies as st

from fredholm_lattice.expr import parse
from fredholm_lattice.grid import (ClassMembershipError, FunctionClass, Grid, GridFunction,
                                   GridMismatchError, SampleError, from_csv, in_class, leq,
                                   pointwise_inf, pointwise_sup, sample, sample_kernel,
                                   semicontinuity_side, sup_norm, to_csv)

EXAMPLE_F = parse("piecewise(t < 1/2 -> t^4/6, else -> t^3/5)", {"t"})
USC2 = FunctionClass("op", "usc", "nonneg", 2.0)


def gf(grid, source):
    return sample(parse(source, {"t"}), grid)


def test_grid_nodes_hit_endpoints_exactly():
    g = Grid(0.0, 1.0, 1001)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0
    assert g.nodes[500] == 0.5
    assert g.h == pytest.approx(1e-3)
    with pytest.raises(ValueError):
        g.nodes[0] = 1.0


def test_refined_grid_contains_old_nodes():
    g = Grid(0.0, 2.0, 11)
    np.testing.assert_array_equal(g.refined().nodes[::2], g.nodes)


def test_bad_grids():
    with pytest.raises(ValueError):
        Grid(1.0, 0.0, 5)
    with pytest.raises(ValueError):
        Grid(0.0, 1.0, 1)


def test_leq_examples():
    g = Grid(0.0, 1.0, 3)
    zero, two = GridFunction.constant(g, 0.0), GridFunction.constant(g, 2.0)
    assert leq(zero, two)
    assert leq(two, two)
    t, one_minus_t = gf(g, "t"), gf(g, "1-t")
    assert not leq(t, one_minus_t) and not leq(one_minus_t, t)


def test_mismatched_grids_refused():
    with pytest.raises(GridMismatchError):
        leq(GridFunction.constant(Grid(0, 1, 3), 0), GridFunction.constant(Grid(0, 1, 4), 0))


def test_empty_inf_is_class_top():
    g = Grid(0.0, 1.0, 5)
    np.testing.assert_array_equal(pointwise_inf([], USC2, g).values, 2.0)
    np.testing.assert_array_equal(pointwise_sup([], USC2, g).values, 0.0)
    with pytest.raises(ValueError):
        pointwise_inf([])


def test_singleton_inf():
    g = Grid(0.0, 1.0, 5)
    phi = gf(g, "t")
    assert pointwise_inf([phi], USC2) == phi


def test_inf_of_crossing_pair_is_rejected():
    g = Grid(0.0, 1.0, 5)
    pair = [gf(g, "t"), gf(g, "1-t")]
    # without a class the nodewise min is still available
    np.testing.assert_allclose(pointwise_inf(pair).values, [0, .25, .5, .25, 0])
    with pytest.raises(ClassMembershipError):
        pointwise_inf(pair, USC2)


def test_in_class_examples():
    g = Grid(0.0, 1.0, 1001)
    t = gf(g, "t")
    assert in_class(t, USC2)
    assert not in_class(t, USC2.with_bound(0.5))
    assert in_class(sample(EXAMPLE_F, g), USC2.with_bound(0.2))


def test_reversing_and_nonpositive_classes():
    g = Grid(0.0, 1.0, 11)
    assert in_class(gf(g, "1-t"), FunctionClass("or", "lsc", "nonneg", 1.0))
    assert not in_class(gf(g, "t"), FunctionClass("or", "lsc", "nonneg", 1.0))
    assert in_class(gf(g, "-t"), FunctionClass("or", "lsc", "nonpos", -1.0))
    with pytest.raises(ValueError):
        FunctionClass("op", "usc", "nonpos", 1.0)


def test_sample_examples():
    assert np.all(gf(Grid(0, 1, 7), "0").values == 0.0)
    np.testing.assert_array_equal(sample(EXAMPLE_F, Grid(0, 1, 3)).values,
                                  [0.0, 0.5 ** 3 / 5, 0.2])
    np.testing.assert_array_equal(gf(Grid(0, 1, 2), "t^2").values, [0.0, 1.0])


def test_sample_one_sided_at_jump():
    g = Grid(0, 1, 3)
    assert sample(EXAMPLE_F, g, "right").values[1] == 0.5 ** 3 / 5
    assert sample(EXAMPLE_F, g, "left").values[1] == 0.5 ** 4 / 6


def test_semicontinuity_side():
    assert semicontinuity_side(FunctionClass("op", "usc")) == "right"
    assert semicontinuity_side(FunctionClass("op", "lsc")) == "left"
    assert semicontinuity_side(FunctionClass("or", "usc")) == "left"
    assert semicontinuity_side(FunctionClass("or", "lsc")) == "right"


def test_sample_error_names_node():
    with pytest.raises(SampleError) as err:
        gf(Grid(-1, 1, 5), "sqrt(t)")
    assert err.value.node == 0


def test_sample_kernel_layout():
    K = sample_kernel(parse("t - 2*s", {"t", "s"}), Grid(0, 1, 3))
    assert K[2, 0] == 1.0 and K[0, 2] == -2.0


def test_csv_round_trip():
    g = Grid(0.0, 1.0, 17)
    phi = sample(EXAMPLE_F, g)
    back = from_csv(to_csv(phi))
    assert back == phi
    assert back.grid == g


def test_sup_norm():
    g = Grid(0, 1, 5)
    assert sup_norm(gf(g, "t"), gf(g, "1-t")) == 1.0
    assert sup_norm(gf(g, "-3*t")) == 3.0


# -- lattice laws for the pointwise order -----------------------------------

def _monotone_values(draw_values):
    return np.cumsum(np.abs(draw_values))


monotone_functions = st.lists(st.floats(0, 0.3), min_size=6, max_size=6).map(
    lambda v: GridFunction(Grid(0.0, 1.0, 6), _monotone_values(v)))


@given(monotone_functions, monotone_functions, monotone_functions)
def test_pointwise_order_laws(phi, psi, chi):
    assert leq(phi, phi)
    if leq(phi, psi) and leq(psi, phi):
        assert phi == psi
    if leq(phi, psi) and leq(psi, chi):
        assert leq(phi, chi)


@given(st.lists(monotone_functions, min_size=1, max_size=5))
def test_inf_sup_of_class_members_stay_in_class(family):
    inf, sup = pointwise_inf(family, USC2), pointwise_sup(family, USC2)
    assert in_class(inf, USC2) and in_class(sup, USC2)
    for phi in family:
        assert leq(inf, phi) and leq(phi, sup)


@given(monotone_functions, monotone_functions)
def test_absorption(phi, psi):
    meet = pointwise_inf([phi, psi])
    join = pointwise_sup([phi, psi])
    assert pointwise_sup([phi, meet]) == phi
    assert pointwise_inf([phi, join]) == phi
