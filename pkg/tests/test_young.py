import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropy_lab import (
    EmpiricalYoungMeasure,
    MeasureSequenceInput,
    PeriodicGrid,
    ScalarField,
    Trajectory,
    attach_recession,
    build_measure,
    contraction_check,
    dirac_diagnostic,
    fundamental_lemma_check,
    linear_flux,
    m2_density,
    pair_with,
    tensor_distance,
)
from entropy_lab.errors import (
    DegeneratePartitionError,
    DimensionError,
    GrowthBoundError,
    InvalidInputError,
)

TWO_PI = 2 * np.pi


def constant_trajectory(grid, value, n_snap=8, t_end=1.0):
    times = np.linspace(0.0, t_end, n_snap + 1)
    return Trajectory([ScalarField(grid, np.full(grid.n_cells, value), t)
                       for t in times])


def field_trajectory(grid, values, n_snap=8, t_end=1.0):
    times = np.linspace(0.0, t_end, n_snap + 1)
    return Trajectory([ScalarField(grid, values.copy(), t) for t in times])


def seq(trajs):
    bound = max(tr.grid.dx * np.abs(tr.values_array()).sum(axis=1).max()
                for tr in trajs)
    return MeasureSequenceInput(list(trajs), bound * (1 + 1e-9))


def dirac_measure(grid, value, bins=64, R=2.0, coarse=(4, 2)):
    tr = constant_trajectory(grid, value)
    return build_measure(seq([tr]), bins=bins, R=R, coarse=coarse)


class TestBuildMeasure:
    def test_constant_is_dirac(self):
        g = PeriodicGrid(64)
        m = dirac_measure(g, 0.5)
        assert np.all(np.abs(m.weights.sum(axis=2) - 1.0) < 1e-12)
        assert np.all(np.max(m.weights, axis=2) == 1.0)
        assert np.all(m.m1 == 0.0)
        assert np.all(np.isnan(m.angle_plus))

    def test_checkerboard_half_half(self):
        g = PeriodicGrid(64)
        vals = np.where(np.arange(64) % 2 == 0, 1.0, -1.0)
        tr = field_trajectory(g, vals)
        m = build_measure(seq([tr]), bins=2, R=2.0, coarse=(4, 2))
        assert np.all(m.weights == 0.5)
        assert np.all(m.m1 == 0.0)

    def test_spike_concentration_mass(self):
        # value n on one cell of width 1/n carries unit clipped mass,
        # time-averaged per slab
        n = 100
        g = PeriodicGrid(n, length=1.0)
        vals = np.zeros(n)
        vals[7] = float(n)
        tr = field_trajectory(g, vals)
        m = build_measure(seq([tr]), bins=16, R=10.0, coarse=(4, 2))
        per_slab = np.sum(m.m1, axis=1)
        assert np.all(np.abs(per_slab - 1.0) < 1e-12)
        ix = (7 * 4) // n
        assert m.angle_plus[0, ix] == 1.0 and m.angle_minus[0, ix] == 0.0

    def test_empty_slab_rejected(self):
        g = PeriodicGrid(64)
        tr = constant_trajectory(g, 0.0, n_snap=2)
        with pytest.raises(DegeneratePartitionError):
            build_measure(seq([tr]), coarse=(4, 16))

    def test_l1_bound_enforced(self):
        g = PeriodicGrid(64)
        tr = constant_trajectory(g, 1.0)
        with pytest.raises(InvalidInputError):
            MeasureSequenceInput([tr], 0.5)


class TestPairing:
    def test_normalization(self):
        m = dirac_measure(PeriodicGrid(64), 0.3)
        ones = pair_with(m, lambda lam: np.ones_like(lam))
        assert np.all(np.abs(ones - 1.0) < 1e-12)

    def test_dirac_second_moment(self):
        # place the state on a bin midpoint: bins=16 over [-2,2], c = -0.125
        c = -0.125
        m = dirac_measure(PeriodicGrid(64), c, bins=16, R=2.0)
        mom = pair_with(m, lambda lam: lam**2)
        assert np.all(np.abs(mom - c * c) < 1e-12)

    def test_checkerboard_moments(self):
        g = PeriodicGrid(64)
        vals = np.where(np.arange(64) % 2 == 0, 1.0, -1.0)
        m = build_measure(seq([field_trajectory(g, vals)]), bins=2, R=2.0,
                          coarse=(4, 2))
        assert np.all(np.abs(pair_with(m, lambda lam: lam)) < 1e-12)
        assert np.all(np.abs(pair_with(m, np.abs) - 1.0) < 1e-12)

    def test_sampling_mismatch(self):
        m = dirac_measure(PeriodicGrid(64), 0.0)
        with pytest.raises(DimensionError):
            pair_with(m, np.zeros(7))

    @given(seed=st.integers(0, 2**31))
    @settings(max_examples=20, deadline=None)
    def test_monotone(self, seed):
        m = dirac_measure(PeriodicGrid(64), 0.25)
        r = np.random.default_rng(seed)
        g1 = r.normal(0, 1, len(m.bin_midpoints))
        g2 = g1 + r.random(len(g1))
        assert np.all(pair_with(m, g1) <= pair_with(m, g2) + 1e-12)


class TestTensorDistance:
    def test_identical_diracs(self):
        g = PeriodicGrid(64)
        a = dirac_measure(g, 0.375)
        b = dirac_measure(g, 0.375)
        out = tensor_distance(a, b)
        assert np.all(out[:, 1] == 0.0)

    def test_separated_diracs(self):
        g = PeriodicGrid(64)
        # bins=16 over [-2,2]: midpoints at -0.125+k/4
        a = dirac_measure(g, -0.125, bins=16)
        b = dirac_measure(g, 0.875, bins=16)
        out = tensor_distance(a, b)
        assert np.allclose(out[:, 1], 1.0 * TWO_PI, atol=1e-12)

    def test_checkerboard_vs_dirac(self):
        # 3 bins over [-1.5, 1.5] put the midpoints exactly at -1, 0, 1
        g = PeriodicGrid(64)
        vals = np.where(np.arange(64) % 2 == 0, 1.0, -1.0)
        mixed = build_measure(seq([field_trajectory(g, vals)]), bins=3, R=1.5,
                              coarse=(4, 2))
        center = dirac_measure(g, 0.0, bins=3, R=1.5)
        d = tensor_distance(mixed, center)
        assert np.allclose(d[:, 1], 1.0 * TWO_PI, atol=1e-12)

    def test_symmetry_exact(self, rng):
        g = PeriodicGrid(64)
        a = build_measure(seq([field_trajectory(g, rng.normal(0, 0.5, 64))]),
                          bins=32, coarse=(4, 2))
        b = build_measure(seq([field_trajectory(g, rng.normal(0, 0.5, 64))]),
                          bins=32, coarse=(4, 2))
        ab = tensor_distance(a, b)[:, 1]
        ba = tensor_distance(b, a)[:, 1]
        assert np.array_equal(ab, ba)

    def test_triangle_bound(self, rng):
        g = PeriodicGrid(64)
        ms = [build_measure(seq([field_trajectory(g, rng.normal(0, 0.6, 64))]),
                            bins=32, coarse=(4, 2)) for _ in range(3)]
        ab = tensor_distance(ms[0], ms[1])[:, 1]
        ac = tensor_distance(ms[0], ms[2])[:, 1]
        cb = tensor_distance(ms[2], ms[1])[:, 1]
        assert np.all(ab <= ac + cb + 1e-12)

    def test_partition_mismatch(self):
        g = PeriodicGrid(64)
        a = dirac_measure(g, 0.0, coarse=(4, 2))
        b = dirac_measure(g, 0.0, coarse=(8, 2))
        with pytest.raises(DimensionError):
            tensor_distance(a, b)


class TestDiracDiagnostic:
    def test_dirac_zero_variance(self):
        m = dirac_measure(PeriodicGrid(64), 0.125, bins=16)
        assert np.all(dirac_diagnostic(m) < 1e-14)

    def test_uniform_law_variance(self):
        # uniform histogram over [-1, 1]: variance 1/3 up to bin-width^2
        g = PeriodicGrid(64)
        bins = 64
        m = dirac_measure(g, 0.0, bins=bins, R=1.0)
        m.weights[:] = 1.0 / bins
        var = dirac_diagnostic(m)
        width = 2.0 / bins
        assert np.all(np.abs(var - 1.0 / 3.0) < width**2)


class TestConcentrationSplit:
    def test_m2_reconstruction_dominated(self):
        g = PeriodicGrid(100, length=1.0)
        vals = np.zeros(100)
        vals[3] = 50.0
        vals[60] = -80.0
        tr = field_trajectory(g, vals)
        m = build_measure(seq([tr]), bins=16, R=10.0, coarse=(4, 2))
        fl = attach_recession(linear_flux(1.5))
        m2 = m2_density(m, fl)
        assert np.all(np.abs(m2) <= 1.5 * m.m1 + 1e-15)

    def test_m2_requires_slopes(self):
        g = PeriodicGrid(64)
        m = dirac_measure(g, 0.0)
        with pytest.raises(InvalidInputError):
            m2_density(m, linear_flux(1.0))


class TestContractionCheck:
    def test_identical_measures(self):
        g = PeriodicGrid(64)
        a = dirac_measure(g, 0.5)
        rep = contraction_check(a, a)
        assert rep.ok
        assert np.all(rep.values == 0.0)

    def test_mismatched_data_flagged(self):
        g = PeriodicGrid(64)
        times = np.linspace(0, 1.0, 9)
        same = Trajectory([ScalarField(g, np.zeros(64), t) for t in times])
        drift_vals = [np.full(64, 0.0 if t < 0.5 else 1.0) for t in times]
        drift = Trajectory([ScalarField(g, v, t) for v, t in zip(drift_vals, times)])
        a = build_measure(seq([same]), bins=16, coarse=(4, 4))
        b = build_measure(seq([drift]), bins=16, coarse=(4, 4))
        rep = contraction_check(a, b)
        assert not rep.ok


class TestFundamentalLemma:
    def test_constant_sequence(self):
        # constant at a bin midpoint: both sides of the pairing agree exactly
        g = PeriodicGrid(64)
        c = -2.0 + 40.5 * (4.0 / 64)  # midpoint of bin 40 for bins=64, R=2
        trs = [constant_trajectory(g, c) for _ in range(3)]
        rep = fundamental_lemma_check(seq(trs), lambda lam: lam**2)
        assert rep.decreasing
        assert np.all(rep.gaps < 1e-10)

    def test_oscillating_sequence(self):
        # u_k = sign(sin(kx)): weak limit 0 while u_k^2 == 1 throughout
        g = PeriodicGrid(256)
        x = g.cell_centers
        trs = [field_trajectory(g, np.sign(np.sin(k * x)) + 0.0)
               for k in (4, 16, 64)]
        inp = seq(trs)
        rep_linear = fundamental_lemma_check(inp, lambda lam: lam, growth=(2.0, 1.0))
        assert rep_linear.decreasing
        rep_square = fundamental_lemma_check(inp, lambda lam: lam**2)
        assert np.all(rep_square.gaps < 5e-2)

    def test_growth_violation(self):
        g = PeriodicGrid(64)
        trs = [constant_trajectory(g, 1.5) for _ in range(3)]
        with pytest.raises(GrowthBoundError):
            fundamental_lemma_check(seq(trs), lambda lam: np.exp(4 * np.abs(lam)),
                                    growth=(1.0, 1.0))

    def test_needs_three_members(self):
        g = PeriodicGrid(64)
        with pytest.raises(InvalidInputError):
            fundamental_lemma_check(seq([constant_trajectory(g, 0.0)]),
                                    lambda lam: lam)
