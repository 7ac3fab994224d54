import math

import numpy as np

from equihol.fields import (
    FormField,
    Grid,
    fd4_derivative,
    merge_sign,
    insert_sign,
    pair_wedge,
    spectral_derivative,
    torus_grid,
    wedge,
    zero_form,
)
from equihol.lie import SU2, invariant_pair, su2_from_components
from equihol.trig import TrigPoly


def _sample_form(grid, degree, comp_polys, matrix_dim=0):
    meshes = grid.meshes()
    comps = {}
    for idx, poly in comp_polys.items():
        comps[idx] = poly.sample(meshes)
    return FormField(grid, degree, comps, matrix_dim)


def test_index_combinatorics():
    assert insert_sign((1, 2), 0) == ((0, 1, 2), 1)
    assert insert_sign((0, 2), 1) == ((0, 1, 2), -1)
    assert insert_sign((0, 1), 2) == ((0, 1, 2), 1)
    assert insert_sign((0, 1), 1)[1] == 0
    assert merge_sign((0,), (1,)) == ((0, 1), 1)
    assert merge_sign((1,), (0,)) == ((0, 1), -1)
    assert merge_sign((0, 1), (2,)) == ((0, 1, 2), 1)
    assert merge_sign((2,), (0, 1)) == ((0, 1, 2), 1)
    assert merge_sign((1,), (1,))[1] == 0


def test_spectral_derivative_exact_for_trig():
    n = 16
    x = np.arange(n) / n
    f = np.cos(2 * math.pi * 3 * x) + 0.5 * np.sin(2 * math.pi * 5 * x)
    df = -3 * 2 * math.pi * np.sin(2 * math.pi * 3 * x) + 0.5 * 5 * 2 * math.pi * np.cos(2 * math.pi * 5 * x)
    got = spectral_derivative(f.astype(complex), 0, n)
    assert np.max(np.abs(got - df)) < 1e-11


def test_fd4_derivative_order():
    errs = []
    for n in (16, 32, 64):
        x = np.arange(n + 1) / n
        f = np.exp(np.sin(2 * math.pi * x) * 0.3)
        df = f * 0.3 * 2 * math.pi * np.cos(2 * math.pi * x)
        got = fd4_derivative(f.astype(complex), 0, 1.0 / n)
        errs.append(np.max(np.abs(got - df)))
    assert errs[0] / errs[1] > 12.0  # ~2^4
    assert errs[1] / errs[2] > 12.0


def test_d_squared_is_zero():
    grid = torus_grid(12, 12)
    rng = np.random.default_rng(3)
    comps = {}
    for idx in [(0,), (1,)]:
        poly = TrigPoly.constant(2, 0)
        for _ in range(3):
            k = tuple(int(v) for v in rng.integers(-2, 3, size=2))
            poly = poly + TrigPoly.wave(2, k, rng.standard_normal(), rng.uniform(0, 2 * math.pi))
        comps[idx] = poly
    a = _sample_form(grid, 1, comps)
    dda = a.exterior_derivative().exterior_derivative()
    assert dda.sup_norm() < 1e-10


def test_stokes_on_torus():
    # integral of an exact 2-form over T^2 vanishes
    grid = torus_grid(16, 16)
    poly = TrigPoly.wave(2, (1, 0), 0.8) + TrigPoly.wave(2, (2, 1), 0.3, 0.4)
    a = _sample_form(grid, 1, {(0,): poly, (1,): poly.partial(0)})
    da = a.exterior_derivative()
    assert abs(da.integrate()) < 1e-12


def test_integrate_frozen_value():
    # integral over T^2 of (2 + cos(2 pi x) cos(2 pi y)) dx dy = 2
    grid = torus_grid(16, 16)
    poly = TrigPoly.constant(2, 2.0) + TrigPoly.wave(2, (1, 1), 0.5) + TrigPoly.wave(2, (1, -1), 0.5)
    f = _sample_form(grid, 2, {(0, 1): poly})
    assert abs(f.integrate() - 2.0) < 1e-12


def test_simpson_on_interval_axis():
    # int_0^1 t^2 cos(2 pi x) ... separable check on T^1 x [0,1]
    grid = Grid(sizes=(8, 8), periodic=(True, False))
    xs, ts = grid.meshes()
    comps = {(0, 1): (np.cos(2 * math.pi * xs) ** 2) * ts**2}
    f = FormField(grid, 2, comps)
    # int cos^2 = 1/2, int t^2 = 1/3; Simpson is exact on cubics
    assert abs(f.integrate() - 1.0 / 6.0) < 1e-14


def test_wedge_antisymmetry_scalar_one_forms():
    grid = torus_grid(10, 10)
    rng = np.random.default_rng(4)
    polys = []
    for _ in range(2):
        p = {}
        for idx in [(0,), (1,)]:
            poly = TrigPoly.wave(2, tuple(int(v) for v in rng.integers(-2, 3, size=2)), rng.standard_normal())
            p[idx] = poly
        polys.append(p)
    a = _sample_form(grid, 1, polys[0])
    b = _sample_form(grid, 1, polys[1])
    ab = wedge(a, b)
    ba = wedge(b, a)
    assert (ab + ba).sup_norm() < 1e-12


def test_wedge_one_form_squared_vanishes_scalar():
    grid = torus_grid(10, 10)
    a = _sample_form(grid, 1, {(0,): TrigPoly.wave(2, (1, 0)), (1,): TrigPoly.wave(2, (0, 1))})
    assert wedge(a, a).sup_norm() < 1e-13


def test_matrix_wedge_square_is_half_bracket():
    # for su(2)-valued 1-forms, (A ^ A)_{xy} = [A_x, A_y]
    grid = torus_grid(8, 8)
    meshes = grid.meshes()
    ax = su2_from_components(
        np.cos(2 * math.pi * meshes[0]), np.sin(2 * math.pi * meshes[1]), 0.3 * np.ones(grid.shape)
    )
    ay = su2_from_components(
        0.2 * np.ones(grid.shape), np.cos(2 * math.pi * meshes[1]), np.sin(2 * math.pi * meshes[0])
    )
    a = FormField(grid, 1, {(0,): ax, (1,): ay}, matrix_dim=2)
    sq = wedge(a, a)
    bracket = np.einsum("...ij,...jk->...ik", ax, ay) - np.einsum("...ij,...jk->...ik", ay, ax)
    assert np.max(np.abs(sq.comps[(0, 1)] - bracket)) < 1e-12


def test_pair_wedge_graded_symmetry():
    # p(a ^ b) = p(b ^ a) * (-1)^{deg a deg b} with symmetric pair
    grid = torus_grid(8, 8)
    rng = np.random.default_rng(5)
    pair = invariant_pair(SU2, level=1)
    a = FormField(grid, 1, {(0,): SU2.random_algebra(rng, grid.shape), (1,): SU2.random_algebra(rng, grid.shape)}, 2)
    b = FormField(grid, 1, {(0,): SU2.random_algebra(rng, grid.shape), (1,): SU2.random_algebra(rng, grid.shape)}, 2)
    ab = pair_wedge(pair, a, b)
    ba = pair_wedge(pair, b, a)
    assert (ab + ba).sup_norm() < 1e-13  # (-1)^{1*1} = -1


def test_partials_override_used():
    grid = Grid(sizes=(8, 8), periodic=(True, False))
    meshes = grid.meshes()
    arr = np.exp(meshes[1]) * np.cos(2 * math.pi * meshes[0])
    exact = arr.copy()  # d/dt e^t cos = e^t cos
    f = FormField(grid, 1, {(0,): arr.astype(complex)}, 0, partials={1: {(0,): exact.astype(complex)}})
    d = f.exterior_derivative()
    # the (0,1) component is -d/dt a_x ... sign: dt ^ dx = -dx ^ dt
    got = d.comps[(0, 1)]
    assert np.max(np.abs(got - (-exact))) < 1e-13


def test_leibniz_for_d_and_wedge():
    grid = torus_grid(12, 12)
    p1 = TrigPoly.wave(2, (1, 0), 0.7, 0.2)
    p2 = TrigPoly.wave(2, (0, 2), 0.4, 1.1)
    q1 = TrigPoly.wave(2, (1, 1), 0.5, 0.9)
    a = _sample_form(grid, 1, {(0,): p1, (1,): p2})
    g = _sample_form(grid, 0, {(): q1})
    lhs = wedge(g, a).exterior_derivative()
    rhs = wedge(g.exterior_derivative(), a) + wedge(g, a.exterior_derivative())
    assert (lhs - rhs).sup_norm() < 1e-10


def test_zero_form_helper():
    grid = torus_grid(8, 8)
    z = zero_form(grid, 1, matrix_dim=2)
    assert z.sup_norm() == 0.0
    a = _sample_form(grid, 1, {(0,): TrigPoly.wave(2, (1, 0))})
    assert ((a + zero_form(grid, 1)) - a).sup_norm() < 1e-15
