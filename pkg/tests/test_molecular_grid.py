"""Tests for core.molecular_grid and core.lebedev."""

import math

import numpy as np
import pandas as pd
import pytest

from core.errors import (
    CoincidentNuclei,
    LengthMismatch,
    OutOfRange,
    UnknownAtomIndex,
    UnknownElement,
    UnsupportedLebedevOrder,
)
from core.lebedev import lebedev_rule
from core.molecular_grid import (
    GridSettings,
    becke_weight_matrix,
    becke_weights,
    bragg_radius,
    build_grid,
    dump_grid_csv,
    integrate,
    radial_grid,
)
from core.wavefunction import Nucleus

# Highest exactly integrated polynomial degree of each rule
LEBEDEV_DEGREES = {6: 3, 26: 7, 50: 11, 110: 17, 194: 23, 302: 29}


def hydrogen(position=(0.0, 0.0, 0.0)):
    return Nucleus("H", 1, tuple(position))


def odd_double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2))


def sphere_average(i: int, j: int, k: int) -> float:
    """Mean of x^2i y^2j z^2k over the unit sphere."""
    numerator = odd_double_factorial(2 * i - 1) * odd_double_factorial(2 * j - 1) * odd_double_factorial(2 * k - 1)
    return numerator / odd_double_factorial(2 * (i + j + k) + 1)


@pytest.fixture
def three_atoms():
    return [
        Nucleus("O", 8, (0.0, 0.0, 0.0)),
        Nucleus("H", 1, (1.43, 1.11, 0.0)),
        Nucleus("C", 6, (-1.9, 0.4, 0.8)),
    ]


class TestLebedev:

    @pytest.mark.parametrize("order", sorted(LEBEDEV_DEGREES))
    def test_point_count_and_unit_vectors(self, order):
        directions, weights = lebedev_rule(order)
        assert directions.shape == (order, 3)
        np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0, rtol=1e-14)
        assert weights.sum() == pytest.approx(1.0, abs=1e-13)
        assert len(np.unique(np.round(directions, 10), axis=0)) == order

    @pytest.mark.parametrize("order, degree", sorted(LEBEDEV_DEGREES.items()))
    def test_even_monomials_integrated_exactly(self, order, degree):
        directions, weights = lebedev_rule(order)
        x, y, z = directions.T
        for n in range(degree // 2 + 1):
            for i in range(n + 1):
                for j in range(n - i + 1):
                    k = n - i - j
                    value = float(np.sum(weights * x ** (2 * i) * y ** (2 * j) * z ** (2 * k)))
                    assert value == pytest.approx(sphere_average(i, j, k), rel=1e-10), (i, j, k)

    def test_odd_monomials_vanish(self):
        directions, weights = lebedev_rule(302)
        x, y, z = directions.T
        assert abs(np.sum(weights * x * y ** 2 * z ** 4)) < 1e-15

    def test_unsupported_order(self):
        with pytest.raises(UnsupportedLebedevOrder):
            lebedev_rule(74)


class TestBeckeWeights:

    def test_single_atom(self):
        np.testing.assert_array_equal(becke_weights((0.3, 0.1, -2.0), [hydrogen()]), [1.0])

    def test_bond_midpoint_of_homonuclear_diatomic(self):
        geometry = [hydrogen((0.0, 0.0, 0.0)), hydrogen((0.0, 0.0, 1.4))]
        np.testing.assert_allclose(becke_weights((0.0, 0.0, 0.7), geometry), [0.5, 0.5], rtol=1e-15)

    def test_point_at_a_nucleus(self):
        geometry = [hydrogen((0.0, 0.0, 0.0)), hydrogen((0.0, 0.0, 1.4))]
        np.testing.assert_array_equal(becke_weights((0.0, 0.0, 0.0), geometry), [1.0, 0.0])

    def test_coordinate_array_geometry(self):
        coords = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 2.0]])
        weights = becke_weights((0.0, 0.0, 0.2), coords)
        assert weights[0] > weights[1]
        with pytest.raises(UnknownElement):
            becke_weights((0.0, 0.0, 0.2), coords, size_adjustment=True)

    @pytest.mark.parametrize("size_adjustment", [False, True])
    def test_partition_of_unity(self, three_atoms, size_adjustment):
        rng = np.random.default_rng(11)
        points = rng.uniform(-6.0, 6.0, size=(10_000, 3))
        coords = np.array([n.position for n in three_atoms])
        radii = [bragg_radius(n.symbol) for n in three_atoms] if size_adjustment else None
        weights = becke_weight_matrix(points, coords, 3, radii)
        assert np.max(np.abs(weights.sum(axis=0) - 1.0)) <= 1e-12
        assert weights.min() >= 0.0
        assert weights.max() <= 1.0

    def test_size_adjustment_moves_boundary_toward_smaller_atom(self):
        geometry = [Nucleus("O", 8, (0.0, 0.0, 0.0)), hydrogen((0.0, 0.0, 1.8))]
        plain = becke_weights((0.0, 0.0, 0.9), geometry)
        adjusted = becke_weights((0.0, 0.0, 0.9), geometry, size_adjustment=True)
        assert plain[0] == pytest.approx(0.5, rel=1e-14)
        assert adjusted[0] > plain[0]

    def test_coincident_nuclei(self):
        geometry = [hydrogen(), hydrogen()]
        with pytest.raises(CoincidentNuclei):
            becke_weights((1.0, 0.0, 0.0), geometry)


class TestRadialGrid:

    def test_nodes_run_inward_with_positive_weights(self):
        r, w = radial_grid(32, 0.7)
        assert np.all(r > 0.0)
        assert np.all(w > 0.0)
        assert np.all(np.diff(r) < 0.0)

    def test_integrates_radial_gaussian(self):
        # integral of r^2 exp(-r^2) over [0, inf) = sqrt(pi) / 4
        r, w = radial_grid(128, 0.6614)
        assert np.sum(w * np.exp(-r * r)) == pytest.approx(math.sqrt(math.pi) / 4.0, rel=1e-9)


class TestBuildGrid:

    def test_single_atom_default_grid(self):
        grid = build_grid([hydrogen()])
        assert len(grid) == 128 * 302 == 38_656
        assert np.all(grid.owner_atom == 0)
        assert np.all(grid.becke_weights == 1.0)
        assert np.all(grid.quad_weights >= 0.0)

    def test_two_atom_grid_size_and_partition(self):
        geometry = [hydrogen((0.0, 0.0, 0.0)), hydrogen((0.0, 0.0, 1.4))]
        grid = build_grid(geometry, GridSettings(32, 50))
        assert len(grid) == 2 * 32 * 50
        coords = np.array([n.position for n in geometry])
        full = becke_weight_matrix(grid.points, coords)
        assert np.max(np.abs(full.sum(axis=0) - 1.0)) <= 1e-12
        np.testing.assert_array_equal(full[grid.owner_atom, np.arange(len(grid))], grid.becke_weights)

    def test_arrays_are_read_only(self):
        grid = build_grid([hydrogen()], GridSettings(8, 6))
        with pytest.raises(ValueError):
            grid.quad_weights[0] = 1.0

    def test_gaussian_integral(self):
        grid = build_grid([hydrogen()])
        r2 = np.einsum("ij,ij->i", grid.points, grid.points)
        assert integrate(grid, np.exp(-r2)) == pytest.approx(math.pi ** 1.5, rel=1e-8)

    def test_hydrogenic_density_normalized(self):
        grid = build_grid([hydrogen()])
        r = np.linalg.norm(grid.points, axis=1)
        assert integrate(grid, np.exp(-2.0 * r) / math.pi) == pytest.approx(1.0, abs=1e-6)

    def test_radial_convergence(self):
        errors = []
        for n_radial in (16, 32, 64, 128):
            grid = build_grid([hydrogen()], GridSettings(n_radial, 302))
            r = np.linalg.norm(grid.points, axis=1)
            errors.append(abs(integrate(grid, np.exp(-2.0 * r) / math.pi) - 1.0))
        assert errors[0] > errors[1] > errors[2]
        # 128 points may already sit at rounding level
        assert errors[3] <= max(errors[2], 1e-12)

    def test_threads_do_not_change_results(self, three_atoms):
        serial = build_grid(three_atoms, GridSettings(24, 26))
        threaded = build_grid(three_atoms, GridSettings(24, 26), threads=3)
        np.testing.assert_array_equal(serial.points, threaded.points)
        np.testing.assert_array_equal(serial.becke_weights, threaded.becke_weights)
        values = np.exp(-np.einsum("ij,ij->i", serial.points, serial.points))
        assert integrate(serial, values) == integrate(threaded, values)

    def test_too_few_radial_points(self):
        with pytest.raises(OutOfRange):
            build_grid([hydrogen()], GridSettings(7, 302))

    def test_unsupported_angular_order(self):
        with pytest.raises(UnsupportedLebedevOrder):
            build_grid([hydrogen()], GridSettings(32, 100))

    def test_unknown_element(self):
        with pytest.raises(UnknownElement):
            build_grid([Nucleus("Xx", 0, (0.0, 0.0, 0.0))], GridSettings(16, 6))


class TestIntegrate:

    @pytest.fixture
    def grid(self, three_atoms):
        return build_grid(three_atoms, GridSettings(32, 50))

    def test_zero_values(self, grid):
        assert integrate(grid, np.zeros(len(grid))) == 0.0

    def test_basin_additivity(self, grid):
        values = np.exp(-0.5 * np.einsum("ij,ij->i", grid.points, grid.points))
        total = integrate(grid, values)
        basins = [integrate(grid, values, basin=a) for a in range(grid.n_atoms)]
        assert math.fsum(basins) == total

    def test_length_mismatch(self, grid):
        with pytest.raises(LengthMismatch):
            integrate(grid, np.ones(len(grid) - 1))

    def test_unknown_basin(self, grid):
        with pytest.raises(UnknownAtomIndex):
            integrate(grid, np.ones(len(grid)), basin=3)


class TestDumpGrid:

    def test_columns_and_rows(self, tmp_path):
        grid = build_grid([hydrogen()], GridSettings(8, 6))
        path = tmp_path / "grid.csv"
        dump_grid_csv(grid, str(path))
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["x", "y", "z", "quad_weight", "owner", "becke_weight"]
        assert len(frame) == 48
        np.testing.assert_allclose(frame["quad_weight"].to_numpy(), grid.quad_weights, rtol=1e-15)
