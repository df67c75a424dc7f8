import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semibohm.errors import CausticError
from semibohm.measures import (
    MomentumHistogram,
    branch_set,
    limiting_bohmian_measure,
    limiting_wigner_measure,
    measure_moments,
    multiphase_eval,
    oscillatory_integral_oracle,
    phase_correction,
    stationary_points,
    torus_measure,
    wigner_transform_numeric,
)
from semibohm.profiles import GaussianAmplitude, LogCoshPhase, PlanePhase, ZeroPhase
from semibohm.spectral import Field, make_grid

A0 = GaussianAmplitude(0.5, 25.0)
S0 = LogCoshPhase(5.0, 2.5)


def rel_err(a, b):
    return abs(a - b) / abs(b)


class TestStationaryPoints:
    @given(st.floats(-0.5, 1.5))
    def test_single_root_before_caustic(self, x):
        roots = stationary_points(0.1, x, S0)
        assert len(roots) == 1
        assert abs(roots[0] + 0.1 * S0.d1(roots[0]) - x) <= 1e-12

    def test_three_roots_after_caustic(self):
        roots = stationary_points(0.4, 0.5, S0)
        assert len(roots) == 3
        assert roots[1] == pytest.approx(0.5, abs=1e-12)
        for y in roots:
            assert abs(y + 0.4 * S0.d1(y) - 0.5) <= 1e-12

    @given(st.floats(0.0, 3.0), st.floats(-2.0, 2.0))
    def test_plane_wave(self, t, x):
        roots = stationary_points(t, x, PlanePhase(0.7))
        assert len(roots) == 1 and roots[0] == pytest.approx(x - 0.7 * t, abs=1e-12)

    def test_root_count_locally_constant(self):
        counts = {len(stationary_points(0.4, x, S0)) for x in np.linspace(0.45, 0.55, 11)}
        assert counts == {3}

    def test_degenerate_root_refused(self):
        with pytest.raises(CausticError):
            stationary_points(0.2, 0.5, S0)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            stationary_points(-0.1, 0.5, S0)


class TestBranches:
    def test_short_time_limit(self):
        bs = branch_set(1e-9, 0.43, A0, S0)
        (br,) = bs.branches
        assert br.amp == pytest.approx(A0.value(0.43), rel=1e-6)
        assert br.s == pytest.approx(S0.value(0.43), abs=1e-8)
        assert br.m_minus == 0

    def test_maslov_indices_after_caustic(self):
        bs = branch_set(0.4, 0.5, A0, S0)
        assert [br.m_minus for br in bs.branches] == [0, 1, 0]
        mid = bs.branches[1]
        assert mid.amp == pytest.approx(A0.value(0.5))  # |1 + 0.4 * (-5)| = 1
        assert np.all(np.diff(bs.grad_s) != 0)

    def test_phase_correction_values(self):
        assert phase_correction(0) == 1
        assert phase_correction(1) == pytest.approx(-1j)

    def test_single_branch_is_plain_wkb(self):
        bs = branch_set(0.1, 0.6, A0, S0)
        (br,) = bs.branches
        assert multiphase_eval(bs, 1e-2) == pytest.approx(br.amp * np.exp(1j * br.s / 1e-2))


class TestOracle:
    def test_dispersive_gaussian(self):
        # a0 = e^{-c y^2}, S0 = 0: psi = e^{-c x^2 / (1 + 2 i c eps t)} / sqrt(1 + 2 i c eps t)
        c, eps, t = 25.0, 1e-2, 0.3
        a0 = GaussianAmplitude(0.0, c)
        for x in (-0.2, 0.0, 0.13, 0.4):
            z = 1 + 2j * c * eps * t
            exact = np.exp(-c * x**2 / z) / np.sqrt(z)
            assert abs(oscillatory_integral_oracle(t, x, eps, a0, ZeroPhase()) - exact) < 1e-8

    def test_converges_when_smooth(self):
        a0 = GaussianAmplitude(0.0, 1.0)
        vals = [oscillatory_integral_oracle(0.05, 0.3, 1.0, a0, S0, points_per_period=p)
                for p in (40, 80, 160)]
        # trapezoid on a smooth decaying integrand is already at rounding level
        assert max(abs(v - vals[2]) for v in vals) < 1e-12

    def test_refuses_under_resolution(self):
        with pytest.raises(ValueError):
            oscillatory_integral_oracle(0.3, 0.5, 1e-6, A0, S0, max_points=1000)
        with pytest.raises(ValueError):
            oscillatory_integral_oracle(0.0, 0.5, 1e-2, A0, S0)


class TestMultiphase:
    def test_pre_caustic_against_oracle(self):
        bs = branch_set(0.1, 0.6, A0, S0)
        errs = [rel_err(multiphase_eval(bs, e), oscillatory_integral_oracle(0.1, 0.6, e, A0, S0))
                for e in (1e-2, 1e-3)]
        assert errs[0] <= 0.05
        assert errs[1] < errs[0]

    def test_post_caustic_against_oracle(self):
        eps = 1e-3
        bs = branch_set(0.4, 0.5, A0, S0)
        ref = oscillatory_integral_oracle(0.4, 0.5, eps, A0, S0)
        assert rel_err(multiphase_eval(bs, eps), ref) <= 0.05
        flipped = [1.0, -phase_correction(1), 1.0]
        assert rel_err(multiphase_eval(bs, eps, flipped), ref) > 0.05

    @pytest.mark.parametrize("t, x", [(0.1, 0.6), (0.4, 0.5)])
    def test_first_order_error(self, t, x):
        bs = branch_set(t, x, A0, S0)
        eps = 2e-3
        e1 = abs(multiphase_eval(bs, eps) - oscillatory_integral_oracle(t, x, eps, A0, S0))
        e2 = abs(multiphase_eval(bs, eps / 2) - oscillatory_integral_oracle(t, x, eps / 2, A0, S0))
        assert 1.5 <= e1 / e2 <= 3.0


class TestTorusMeasure:
    def test_single_branch_is_a_point_mass(self):
        h = torus_measure([0.7 - 0.2j], [0.3], samples=4096)
        assert h.is_concentrated()
        assert h.total_mass == pytest.approx(0.53)
        assert measure_moments(h, 1) == pytest.approx(0.53 * 0.3)

    def test_equal_amplitudes_collapse_to_the_mean(self):
        h = torus_measure([1.0, 1.0], [0.0, 1.0], samples=10**5)
        assert h.total_mass == pytest.approx(2.0, abs=3 / np.sqrt(1e5) * 2)
        assert h.is_concentrated()
        assert measure_moments(h, 1) / h.total_mass == pytest.approx(0.5, abs=1e-12)

    def test_unequal_amplitudes(self):
        n = 10**5
        h = torus_measure([1.0, 2.0], [0.0, 1.0], samples=n)
        assert not h.is_concentrated()
        assert measure_moments(h, 0) == pytest.approx(5.0, abs=3 / np.sqrt(n))
        assert measure_moments(h, 1) == pytest.approx(4.0, abs=3 / np.sqrt(n))

    def test_masses_sum_to_total(self):
        h = torus_measure([1.0, 0.5j, -0.3], [0.0, 1.0, -0.5], samples=10**4)
        assert np.sum(h.masses) == pytest.approx(h.total_mass, abs=1e-12)
        assert np.all(h.masses >= 0)

    def test_deterministic(self):
        a = torus_measure([1.0, 2.0], [0.0, 1.0], samples=5000, seed=3)
        b = torus_measure([1.0, 2.0], [0.0, 1.0], samples=5000, seed=3)
        assert np.array_equal(a.masses, b.masses)

    @settings(max_examples=15)
    @given(st.integers(2, 3), st.integers(0, 2**31 - 1))
    def test_moment_identities(self, n_branches, seed):
        r = np.random.default_rng(seed)
        b = r.uniform(0.5, 2.0, n_branches) * np.exp(2j * np.pi * r.uniform(size=n_branches))
        grads = np.cumsum(r.uniform(0.5, 1.5, n_branches)) - 1.0
        samples = 2**15
        h = torus_measure(b, grads, samples=samples, seed=seed % 1000)
        atoms = list(zip(grads, np.abs(b) ** 2))
        scale = np.sum(np.abs(b) ** 2) * max(1.0, np.max(np.abs(grads)))
        tol = 3 / np.sqrt(samples) * scale
        assert measure_moments(h, 0) == pytest.approx(measure_moments(atoms, 0), abs=tol)
        assert measure_moments(h, 1) == pytest.approx(measure_moments(atoms, 1), abs=tol)
        assert measure_moments(h, 2) < measure_moments(atoms, 2) - tol


class TestLimitingMeasures:
    def test_bohmian_versus_wigner_after_caustic(self):
        bs = branch_set(0.4, 0.5, A0, S0)
        beta = limiting_bohmian_measure(bs, samples=2**16)
        w = limiting_wigner_measure(bs)
        assert len(w) == 3
        tol = 3 / 2**8 * sum(m for _, m in w)
        for k in (0, 1):
            assert measure_moments(beta, k) == pytest.approx(measure_moments(w, k), abs=tol)
        assert measure_moments(beta, 2) < measure_moments(w, 2)

    def test_wigner_ignores_maslov_phase(self):
        bs = branch_set(0.4, 0.5, A0, S0)
        assert [m for _, m in limiting_wigner_measure(bs)] == [abs(br.amp) ** 2 for br in bs.branches]

    def test_single_branch_agrees(self):
        bs = branch_set(0.1, 0.6, A0, S0)
        beta = limiting_bohmian_measure(bs, samples=4096)
        ((p, m),) = limiting_wigner_measure(bs)
        assert beta.is_concentrated()
        assert measure_moments(beta, 1) == pytest.approx(p * m, rel=1e-10)

    def test_empty_histogram_has_no_moments(self):
        h = MomentumHistogram(np.linspace(0, 1, 5), np.zeros(4), 0.0, np.full(4, 0.5))
        assert measure_moments(h, 0) == 0.0 and measure_moments(h, 2) == 0.0
        assert measure_moments([], 1) == 0.0

    def test_equal_amplitude_second_moments(self):
        atoms = [(0.0, 1.0), (1.0, 1.0)]
        h = torus_measure([1.0, 1.0], [0.0, 1.0], samples=10**5)
        assert measure_moments(atoms, 2) == 1.0
        assert measure_moments(h, 2) == pytest.approx(0.5, abs=1e-4)


class TestWignerTransform:
    grid = make_grid(-2.0, 5.0, 2**9)

    def packet(self, eps, k):
        x = self.grid.nodes
        return Field(self.grid, np.exp(-((x - 0.5) ** 2) / eps) * np.exp(1j * k * x / eps))

    def test_coherent_state_concentrates(self):
        eps, k = 1e-2, 0.5
        w = wigner_transform_numeric(self.packet(eps, k), eps)
        marg = np.clip(w.values, 0, None).sum(axis=0)
        near = np.abs(w.p - k) <= 5 * np.sqrt(eps)
        assert marg[near].sum() >= 0.9 * marg.sum()

    def test_real_gaussian_is_symmetric_in_p(self):
        eps = 1e-2
        f = self.packet(eps, 0.0)
        w = wigner_transform_numeric(f, eps)
        total = w.values.sum() * w.dp * self.grid.dx
        first = (w.values * w.p[None, :]).sum() * w.dp * self.grid.dx
        assert abs(first / total) <= 1e-6

    @pytest.mark.parametrize("k", [0.0, 0.5])
    def test_marginal_and_mass(self, k):
        eps = 1e-2
        f = self.packet(eps, k)
        w = wigner_transform_numeric(f, eps)
        assert np.max(np.abs(w.x_marginal() - f.density)) <= 1e-8
        mass = np.sum(f.density) * self.grid.dx
        assert w.x_marginal().sum() * self.grid.dx == pytest.approx(mass, abs=1e-6)
        assert w.imag_ratio <= 1e-8

    def test_stride(self):
        eps = 1e-2
        w = wigner_transform_numeric(self.packet(eps, 0.5), eps, x_stride=4)
        assert w.values.shape == (self.grid.n // 4, self.grid.n)
