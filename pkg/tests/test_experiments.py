import math

import numpy as np
import pytest
from scipy import integrate

from otcsim import experiments as ex


def recursion_variance(m, r):
    """Independent oracle for the iterated closed form: per-stage averaging
    V -> (V + e^{-2r})/2 starting from vacuum."""
    v = 1.0
    for _ in range(m):
        v = 0.5 * (v + math.exp(-2.0 * r))
    return v


class TestClosedForms:
    def test_iterated_formula_matches_recursion(self):
        for r in (0.0, 0.3, 1.0, 2.5, 10.0):
            for m in range(1, 12):
                assert abs(ex.iterated_variance(m, r) - recursion_variance(m, r)) < 1e-12

    def test_single_pass_is_first_iteration(self):
        for r in (0.1, 0.7, 2.0):
            vx, vp = ex.single_pass_variances(r)
            assert abs(vx - ex.iterated_variance(1, r)) < 1e-12
            assert abs(vx * vp - math.cosh(r) ** 2 * 1.0) < 1e-9  # e^-r e^r cosh^2

    def test_fidelity_prediction_by_quadrature(self):
        # E[exp(-(u^2+v^2))] for u, v ~ N(0, s2) evaluated numerically
        for m, r in ((3, 2.0), (5, 3.0), (1, 0.5)):
            s2 = ex.estimator_component_variance(m, r)
            density = lambda u: math.exp(-u * u) * math.exp(-u * u / (2 * s2)) / math.sqrt(2 * math.pi * s2)
            one_dim, _ = integrate.quad(density, -np.inf, np.inf)
            assert abs(one_dim ** 2 - ex.predicted_cloning_fidelity(m, r)) < 1e-9


class TestSinglePass:
    def test_no_resource_is_identity(self):
        table = ex.single_pass(alpha=1.0, r=0.0)
        assert abs(table.rows[0][2] - 1.0) < 1e-12
        assert abs(table.rows[1][2] - 1.0) < 1e-12
        assert table.all_passed()

    def test_r_one_values(self):
        table = ex.single_pass(alpha=0.5 + 0.5j, r=1.0)
        assert abs(table.rows[0][2] - math.exp(-1) * math.cosh(1)) < 1e-9
        assert abs(table.rows[1][2] - math.exp(1) * math.cosh(1)) < 1e-9

    def test_large_squeezing_approaches_half(self):
        table = ex.single_pass(alpha=1.0, r=12.0)
        assert abs(table.rows[0][2] - 0.5) < 1e-9

    def test_fock_engine_agreement(self):
        gaussian = ex.single_pass(alpha=0.6, r=0.5)
        fock = ex.single_pass(alpha=0.6, r=0.5, engine="fock", cutoff=30)
        assert abs(gaussian.rows[0][2] - fock.rows[0][2]) < 1e-3
        assert fock.all_passed()

    def test_unknown_engine_rejected(self):
        with pytest.raises(ValueError):
            ex.single_pass(engine="tarot")


class TestIteratedViolation:
    def test_zero_resource_keeps_vacuum_noise(self):
        table = ex.iterated_violation(alpha=1.0, r=0.0, iterations=6)
        assert all(abs(row[1] - 1.0) < 1e-12 for row in table.rows)
        assert all(row[5] == 0.0 for row in table.rows)

    def test_first_iteration_equals_single_pass(self):
        sp = ex.single_pass(alpha=1.0, r=0.8)
        iv = ex.iterated_violation(alpha=1.0, r=0.8, iterations=1)
        assert abs(iv.rows[0][1] - sp.rows[0][2]) < 1e-12

    def test_closed_form_column_tracks_recursion(self):
        table = ex.iterated_violation(alpha=0.3 - 0.1j, r=1.3, iterations=8)
        for row in table.rows:
            m = int(row[0])
            assert abs(row[1] - recursion_variance(m, 1.3)) < 1e-9
            assert abs(row[4] - recursion_variance(m, 1.3)) < 1e-12

    def test_large_squeezing_product_scaling(self):
        table = ex.iterated_violation(alpha=1.0, r=10.0, iterations=6)
        for row in table.rows:
            m = int(row[0])
            assert abs(row[3] / 2.0 ** (-2 * m) - 1.0) < 0.05

    def test_monotone_in_iterations_and_r(self):
        low = ex.iterated_violation(alpha=1.0, r=0.5, iterations=6)
        high = ex.iterated_violation(alpha=1.0, r=1.5, iterations=6)
        vs_low = [row[1] for row in low.rows]
        vs_high = [row[1] for row in high.rows]
        assert all(b < a for a, b in zip(vs_low, vs_low[1:]))
        assert all(h < l for l, h in zip(vs_low, vs_high))

    def test_violation_flag_is_computed(self):
        table = ex.iterated_violation(alpha=1.0, r=1.0, iterations=2)
        for row in table.rows:
            assert row[5] == (1.0 if row[3] < 1.0 else 0.0)

    def test_fock_engine_agreement(self):
        gaussian = ex.iterated_violation(alpha=0.8, r=0.5, iterations=2)
        fock = ex.iterated_violation(alpha=0.8, r=0.5, iterations=2, engine="fock", cutoff=25)
        for grow, frow in zip(gaussian.rows, fock.rows):
            assert abs(grow[1] - frow[1]) < 1e-3

    def test_invalid_iterations_rejected(self):
        with pytest.raises(ValueError):
            ex.iterated_violation(iterations=0)


class TestTomographyCloning:
    def test_seed_determinism(self):
        a = ex.tomography_cloning(alpha=1.0, r=2.0, iterations=3, shots=2000, seed=11)
        b = ex.tomography_cloning(alpha=1.0, r=2.0, iterations=3, shots=2000, seed=11)
        assert a.rows == b.rows

    def test_estimator_statistics(self):
        table = ex.tomography_cloning(alpha=1.0, r=2.0, iterations=3, shots=10000, seed=0)
        assert table.all_passed()
        row = dict(zip(table.columns, table.rows[0]))
        predicted = ex.estimator_component_variance(3, 2.0)
        se = predicted * math.sqrt(2.0 / (10000 - 1))
        assert abs(row["var_est_re"] - predicted) < 5 * se
        assert abs(row["var_est_im"] - predicted) < 5 * se

    def test_identical_candidates_give_chance(self):
        table = ex.tomography_cloning(alpha=0.0, r=1.0, iterations=2, shots=10000, seed=3,
                                      candidate_b=0.0)
        row = dict(zip(table.columns, table.rows[0]))
        assert abs(row["discrimination_error"] - 0.5) < 5 * math.sqrt(0.25 / 10000)

    def test_high_resource_read_out_approaches_truth(self):
        table = ex.tomography_cloning(alpha=1.0 - 0.5j, r=3.0, iterations=5, shots=4000, seed=5)
        row = dict(zip(table.columns, table.rows[0]))
        assert row["mean_fidelity"] > 0.95
        assert abs(row["mean_est_re"] - 1.0) < 0.01
        assert abs(row["mean_est_im"] + 0.5) < 0.01
        assert row["discrimination_error"] == 0.0

    def test_too_few_shots_rejected(self):
        with pytest.raises(ValueError):
            ex.tomography_cloning(shots=10)


class TestXiSweep:
    def test_endpoints(self):
        table = ex.xi_sweep(alpha=1.0, r=1.0, xis=[0.0, 1.0])
        assert abs(table.rows[0][3] - math.exp(-1) * math.cosh(1)) < 1e-9
        assert abs(table.rows[1][3] - 1.0) < 1e-9
        assert table.all_passed()

    def test_mean_preserved_everywhere(self):
        table = ex.xi_sweep(alpha=0.7 + 0.2j, r=1.2, xis=np.linspace(0, 1, 7))
        for row in table.rows:
            assert abs(row[1] - 1.4) < 1e-10
            assert abs(row[2] - 0.4) < 1e-10

    def test_out_of_range_xi_rejected(self):
        with pytest.raises(ValueError):
            ex.xi_sweep(xis=[0.5, 1.2])


class TestOverlapExperiment:
    def test_endpoint_chain(self):
        table = ex.overlap_experiment(sigma=2.0, delta_ts=[0.0, 40.0], r=1.0)
        assert table.rows[0][1] == 1.0
        assert abs(table.rows[0][2] - 1.0) < 1e-9
        assert table.rows[1][1] < 1e-10
        assert abs(table.rows[1][2] - math.exp(-1) * math.cosh(1)) < 1e-9
        assert table.all_passed()

    def test_intermediate_point_against_fock(self):
        gaussian = ex.overlap_experiment(sigma=1.0, delta_ts=[1.0], r=0.5)
        fock = ex.overlap_experiment(sigma=1.0, delta_ts=[1.0], r=0.5, engine="fock", cutoff=25)
        assert abs(gaussian.rows[0][2] - fock.rows[0][2]) < 1e-3
        assert abs(gaussian.rows[0][1] - math.exp(-0.25)) < 1e-9

    def test_invalid_sigma_rejected(self):
        with pytest.raises(ValueError):
            ex.overlap_experiment(sigma=0.0)


class TestResultTable:
    def test_rectangularity_enforced(self):
        with pytest.raises(ValueError):
            ex.ResultTable("bad", ("a", "b"), [(1.0,)])

    def test_csv_roundtrip_precision(self, tmp_path):
        table = ex.single_pass(alpha=1.0, r=1.0)
        path = tmp_path / "t.csv"
        table.write_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "theta,mean,variance"
        values = [float(v) for v in lines[1].split(",")]
        assert values[2] == table.rows[0][2]  # repr round-trips exactly
