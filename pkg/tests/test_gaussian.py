import math

import numpy as np
import pytest

from otcsim import fock as fk
from otcsim import gaussian as g

RNG = np.random.default_rng(20260809)


def random_state(rng, num_modes, max_r=1.0, max_alpha=1.5):
    """Random physical Gaussian state built from a short random gate string."""
    state = g.vacuum(num_modes)
    for mode in range(num_modes):
        state = g.squeeze(state, mode, rng.uniform(-max_r, max_r), rng.uniform(0, np.pi))
        state = g.displace(state, mode, max_alpha * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) / np.sqrt(2))
    for _ in range(num_modes):
        a, b = rng.choice(num_modes, size=2, replace=False) if num_modes > 1 else (0, 0)
        if a != b:
            state = g.beamsplit(state, a, b, rng.uniform(0, 1))
        state = g.rotate(state, int(rng.integers(num_modes)), rng.uniform(0, 2 * np.pi))
    return state


class TestVacuum:
    def test_single_mode(self):
        state = g.vacuum(1)
        assert np.array_equal(state.mean, np.zeros(2))
        assert np.array_equal(state.cov, np.eye(2))

    def test_two_modes(self):
        state = g.vacuum(2)
        assert np.array_equal(state.mean, np.zeros(4))
        assert np.array_equal(state.cov, np.eye(4))

    def test_rotation_symmetry(self):
        state = g.vacuum(1)
        for theta in np.linspace(0, 2 * np.pi, 17):
            mean, var = g.quad_stats(state, 0, theta)
            assert mean == 0.0
            assert abs(var - 1.0) < 1e-15

    def test_zero_modes_rejected(self):
        with pytest.raises(ValueError):
            g.vacuum(0)


class TestDisplace:
    def test_zero_is_identity(self):
        state = g.vacuum(1)
        out = g.displace(state, 0, 0.0)
        assert np.array_equal(out.mean, state.mean)
        assert np.array_equal(out.cov, state.cov)

    def test_mean_convention(self):
        # canonical convention check: |alpha> has quadrature means (2 Re, 2 Im)
        out = g.displace(g.vacuum(1), 0, 1.0)
        assert np.allclose(out.mean, [2.0, 0.0], atol=1e-15)
        assert np.array_equal(out.cov, np.eye(2))
        out = g.displace(g.vacuum(1), 0, 0.3 - 0.4j)
        assert np.allclose(out.mean, [0.6, -0.8], atol=1e-15)

    def test_mean_convention_against_fock_oracle(self):
        alpha = 0.8 + 0.5j
        state = g.coherent(alpha)
        oracle = fk.coherent(alpha, 30)
        for theta in (0.0, np.pi / 2, 1.1):
            mean, var = g.quad_stats(state, 0, theta)
            fmean, fvar = fk.quad_stats_fock(oracle, 0, theta)
            assert abs(mean - fmean) < 1e-9
            assert abs(var - fvar) < 1e-9

    def test_inverse(self):
        alpha = 1.3 - 0.2j
        out = g.displace(g.displace(g.vacuum(1), 0, alpha), 0, -alpha)
        assert np.allclose(out.mean, 0.0, atol=1e-15)


class TestSqueeze:
    def test_zero_is_identity(self):
        out = g.squeeze(g.vacuum(1), 0, 0.0)
        assert np.allclose(out.cov, np.eye(2), atol=1e-15)

    def test_variances(self):
        out = g.squeeze(g.vacuum(1), 0, 1.0)
        assert abs(g.quad_stats(out, 0, 0.0)[1] - math.exp(-2)) < 1e-12
        assert abs(g.quad_stats(out, 0, np.pi / 2)[1] - math.exp(2)) < 1e-12

    def test_variances_against_fock_oracle(self):
        out = g.squeeze(g.vacuum(1), 0, 1.0)
        oracle = fk.squeezed_vac(1.0, 40, max_loss=1e-5)
        # the anti-squeezed second moment converges slowest in the cutoff
        assert abs(g.quad_stats(out, 0, 0.0)[1] - fk.quad_stats_fock(oracle, 0, 0.0)[1]) < 1e-4
        assert abs(g.quad_stats(out, 0, np.pi / 2)[1] - fk.quad_stats_fock(oracle, 0, np.pi / 2)[1]) < 1e-3

    def test_inverse(self):
        out = g.squeeze(g.squeeze(g.vacuum(1), 0, 0.8), 0, -0.8)
        assert np.allclose(out.cov, np.eye(2), atol=1e-14)


class TestBeamsplit:
    def test_transparent(self):
        # the convention is a reflection: at full transmissivity the through
        # port is untouched and the reflected port flips sign, invisible to
        # variances and |mean|; the element is its own inverse
        state = random_state(np.random.default_rng(1), 2)
        out = g.beamsplit(state, 0, 1, 1.0)
        assert np.allclose(out.mode_cov(0), state.mode_cov(0), atol=1e-14)
        assert np.allclose(out.mode_mean(0), state.mode_mean(0), atol=1e-14)
        assert np.allclose(out.mode_cov(1), state.mode_cov(1), atol=1e-14)
        assert np.allclose(np.abs(out.mode_mean(1)), np.abs(state.mode_mean(1)), atol=1e-14)
        undone = g.beamsplit(g.beamsplit(state, 0, 1, 0.3), 0, 1, 0.3)
        assert np.allclose(undone.cov, state.cov, atol=1e-13)
        assert np.allclose(undone.mean, state.mean, atol=1e-13)

    def test_balanced_copies_coherent(self):
        state = g.tensor(g.coherent(2.0), g.vacuum(1))
        out = g.beamsplit(state, 0, 1, 0.5)
        expect = 2.0 / np.sqrt(2.0)
        assert abs(out.complex_amplitude(0) - expect) < 1e-14
        assert abs(out.complex_amplitude(1) - expect) < 1e-14
        assert np.allclose(out.cov, np.eye(4), atol=1e-14)

    def test_vacuum_invariance(self):
        for eta in (0.0, 0.3, 0.5, 1.0):
            out = g.beamsplit(g.vacuum(2), 0, 1, eta)
            assert np.allclose(out.cov, np.eye(4), atol=1e-14)
            assert np.allclose(out.mean, 0.0)

    def test_same_mode_rejected(self):
        with pytest.raises(ValueError):
            g.beamsplit(g.vacuum(2), 1, 1, 0.5)


class TestQuadStats:
    def test_vacuum(self):
        assert g.quad_stats(g.vacuum(1), 0, 0.37) == (0.0, 1.0)

    def test_coherent(self):
        mean, var = g.quad_stats(g.coherent(1.0), 0, 0.0)
        assert abs(mean - 2.0) < 1e-15
        assert abs(var - 1.0) < 1e-15

    def test_squeezed(self):
        mean, var = g.quad_stats(g.squeeze(g.vacuum(1), 0, 1.0), 0, 0.0)
        assert mean == 0.0
        assert abs(var - math.exp(-2)) < 1e-12

    def test_half_turn_flips_mean(self):
        state = random_state(np.random.default_rng(2), 1)
        for theta in np.linspace(0, np.pi, 7):
            m1, v1 = g.quad_stats(state, 0, theta)
            m2, v2 = g.quad_stats(state, 0, theta + np.pi)
            assert abs(m1 + m2) < 1e-12
            assert abs(v1 - v2) < 1e-12


class TestHomodyne:
    def test_vacuum_sample_mean(self):
        samples = g.homodyne_sample(g.vacuum(1), 0, 0.0, rng=123, size=100000)
        assert abs(np.mean(samples)) < 0.02

    def test_seed_determinism(self):
        a = g.homodyne_sample(g.coherent(1j), 0, 0.4, rng=7, size=50)
        b = g.homodyne_sample(g.coherent(1j), 0, 0.4, rng=7, size=50)
        assert np.array_equal(a, b)

    def test_squeezed_empirical_variance(self):
        state = g.squeeze(g.vacuum(1), 0, 2.0)
        samples = g.homodyne_sample(state, 0, 0.0, rng=99, size=100000)
        assert abs(np.var(samples) / math.exp(-4) - 1.0) < 0.05

    def test_moments_match_quad_stats(self):
        state = random_state(np.random.default_rng(3), 1)
        mean, var = g.quad_stats(state, 0, 0.9)
        n = 200000
        samples = g.homodyne_sample(state, 0, 0.9, rng=5, size=n)
        se_mean = math.sqrt(var / n)
        se_var = var * math.sqrt(2.0 / (n - 1))
        assert abs(np.mean(samples) - mean) < 5 * se_mean
        assert abs(np.var(samples, ddof=1) - var) < 5 * se_var


class TestTensorPartialTrace:
    def test_tensor_of_vacua(self):
        assert np.array_equal(g.tensor(g.vacuum(1), g.vacuum(1)).cov, g.vacuum(2).cov)

    def test_partial_trace_of_product(self):
        a = random_state(np.random.default_rng(4), 1)
        b = random_state(np.random.default_rng(5), 2)
        joint = g.tensor(a, b)
        back = g.partial_trace(joint, [0])
        assert np.array_equal(back.mean, a.mean)
        assert np.array_equal(back.cov, a.cov)
        back_b = g.partial_trace(joint, [1, 2])
        assert np.array_equal(back_b.cov, b.cov)

    def test_tensor_then_trace_roundtrip(self):
        a = random_state(np.random.default_rng(6), 2)
        b = random_state(np.random.default_rng(7), 1)
        assert np.array_equal(g.partial_trace(g.tensor(a, b), [0, 1]).cov, a.cov)

    def test_two_mode_squeezed_marginal_is_thermal(self):
        # standard identity: tracing one arm of a two-mode squeezed state
        # leaves a thermal state of variance cosh(2r)
        r = 0.7
        state = g.squeeze(g.squeeze(g.vacuum(2), 0, r, 0.0), 1, r, np.pi / 2)
        state = g.beamsplit(state, 0, 1, 0.5)
        marginal = g.partial_trace(state, [0])
        assert np.allclose(marginal.cov, math.cosh(2 * r) * np.eye(2), atol=1e-12)
        assert np.allclose(marginal.mean, 0.0)


class TestProperties:
    def test_symplectic_identity_random_gates(self):
        rng = np.random.default_rng(8)
        for _ in range(300):
            kind = rng.integers(3)
            if kind == 0:
                s = g.rotation_matrix(rng.uniform(-10, 10))
            elif kind == 1:
                s = g.squeeze_matrix(rng.uniform(-2, 2), rng.uniform(0, np.pi))
            else:
                s = g.beamsplitter_matrix(rng.uniform(0, 1))
            assert g.is_symplectic(s, 1e-10)

    def test_physicality_after_random_circuits(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            state = random_state(rng, int(rng.integers(1, 4)))
            assert g.is_physical(state)

    def test_passive_gates_preserve_photon_number(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            state = random_state(rng, 2)
            n0 = g.mean_photon_number(state)
            rotated = g.rotate(state, 0, rng.uniform(0, 2 * np.pi))
            split = g.beamsplit(rotated, 0, 1, rng.uniform(0, 1))
            assert abs(g.mean_photon_number(split) - n0) < 1e-10

    def test_mean_photon_number_of_coherent(self):
        assert abs(g.mean_photon_number(g.coherent(1.5j)) - 2.25) < 1e-12
