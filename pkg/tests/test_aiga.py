"""Scalar-precision solver: init/step worked values, invariants, and
fixed-point optimality."""

import numpy as np
import pytest

from igabench import (
    AigaConfig,
    ConfigError,
    SyntheticConfig,
    aiga_step,
    generate_instance,
    init_aiga_state,
    run_aiga,
    solve_lasso_ista,
    stationarity_residual,
    upsilon_pair_arrays,
)
from igabench.aiga import target_mean


class TestInitAndFirstStep:
    def test_cold_start_values(self):
        inst = generate_instance(SyntheticConfig(8, 16, 0.2, 25.0, 0.08, 7))
        state = init_aiga_state(inst)
        np.testing.assert_array_equal(state.lam0, np.zeros(16))
        np.testing.assert_array_equal(state.inv_prec0, np.zeros(16))
        np.testing.assert_array_equal(state.z, inst.y)
        assert state.prec_hat == 1.0 and state.iota == 0.0

    def test_first_step_closed_form(self):
        """From the cold start: prec_hat stays 1, z = y, lam_hat = A^T y."""
        inst = generate_instance(SyntheticConfig(8, 16, 0.2, 25.0, 0.08, 7))
        state = aiga_step(init_aiga_state(inst), inst)
        assert state.prec_hat == 1.0
        np.testing.assert_array_equal(state.z, inst.y)
        np.testing.assert_allclose(state.lam_hat0, inst.a.T @ inst.y, atol=1e-15)

    def test_scalar_recursion_halves_at_matched_ratio(self):
        """iota = delta and prec_hat = 1 gives prec_hat' = (1 + 1)^-1 = 1/2."""
        inst = generate_instance(SyntheticConfig(8, 16, 0.2, 25.0, 0.08, 7))
        state = init_aiga_state(inst)
        state.iota = inst.m / inst.n
        new = aiga_step(state, inst)
        assert new.prec_hat == 0.5

    def test_configurable_init_validated(self):
        inst = generate_instance(SyntheticConfig(8, 16, 0.2, 25.0, 0.08, 7))
        assert init_aiga_state(inst, prec_hat=0.5).prec_hat == 0.5
        with pytest.raises(ConfigError):
            init_aiga_state(inst, prec_hat=0.0)
        with pytest.raises(ConfigError):
            init_aiga_state(inst, prec_hat=1.5)

    def test_zero_observation_is_fixed_point(self):
        inst = generate_instance(SyntheticConfig(8, 16, 0.2, 25.0, 0.08, 7))
        zero_inst = type(inst)(m=8, n=16, a=inst.a, y=np.zeros(8), kappa=0.08)
        state = aiga_step(init_aiga_state(zero_inst), zero_inst)
        np.testing.assert_array_equal(state.lam_hat0, np.zeros(16))
        assert state.iota == 0.0
        np.testing.assert_array_equal(target_mean(state), np.zeros(16))


class TestInvariants:
    def test_prec_hat_and_iota_ranges(self):
        inst = generate_instance(SyntheticConfig(32, 64, 0.1, 20.0, 0.05, 9))
        state = init_aiga_state(inst)
        for _ in range(40):
            state = aiga_step(state, inst)
            assert 0.0 < state.prec_hat <= 1.0
            assert 0.0 <= state.iota <= 1.0

    def test_iota_counts_strictly_above_threshold(self):
        inst = generate_instance(SyntheticConfig(8, 16, 0.2, 25.0, 0.08, 7))
        state = aiga_step(init_aiga_state(inst), inst)
        assert state.iota == float(np.count_nonzero(np.abs(state.lam_hat0) > inst.kappa)) / 16

    def test_inv_prec_binary_valued(self):
        """Each inverse precision is exactly 0 or exactly 1/prec_hat."""
        inst = generate_instance(SyntheticConfig(16, 32, 0.15, 20.0, 0.05, 4))
        state = init_aiga_state(inst)
        for _ in range(15):
            state = aiga_step(state, inst)
            allowed = {0.0, 1.0 / state.prec_hat}
            assert set(np.unique(state.inv_prec0)).issubset(allowed)

    def test_iota_matches_estimate_support(self):
        inst = generate_instance(SyntheticConfig(16, 32, 0.15, 20.0, 0.05, 4))
        state = init_aiga_state(inst)
        for _ in range(10):
            state = aiga_step(state, inst)
            mu = target_mean(state)
            assert state.iota == float(np.count_nonzero(mu)) / inst.n

    def test_threshold_matches_upsilon(self):
        inst = generate_instance(SyntheticConfig(8, 16, 0.2, 25.0, 0.08, 7))
        state = aiga_step(aiga_step(init_aiga_state(inst), inst), inst)
        lam, inv = upsilon_pair_arrays(state.lam_hat0, state.prec_hat, inst.kappa)
        np.testing.assert_array_equal(state.lam0, lam)
        np.testing.assert_array_equal(state.inv_prec0, inv)


class TestRunAiga:
    def test_zero_iterations(self):
        inst = generate_instance(SyntheticConfig(8, 16, 0.2, 25.0, 0.08, 7))
        trace = run_aiga(inst, AigaConfig(max_iter=0, tol=0.0))
        assert len(trace.records) == 1
        np.testing.assert_array_equal(trace.records[0].estimate, np.zeros(16))

    def test_exact_step_count_with_zero_tol(self):
        inst = generate_instance(SyntheticConfig(8, 16, 0.2, 25.0, 0.08, 7))
        trace = run_aiga(inst, AigaConfig(max_iter=12, tol=0.0))
        assert len(trace.records) == 13

    def test_converged_point_is_lasso_solution(self):
        inst = generate_instance(SyntheticConfig(8, 16, 0.25, 30.0, 0.1, 0))
        trace = run_aiga(inst, AigaConfig(max_iter=2000, tol=1e-12))
        assert trace.converged
        assert stationarity_residual(trace.estimate, inst) <= 1e-6
        ista = solve_lasso_ista(inst, tol=1e-10)
        assert float(np.max(np.abs(trace.estimate - ista))) <= 1e-6

    def test_deterministic_traces(self):
        inst = generate_instance(SyntheticConfig(16, 32, 0.15, 20.0, 0.05, 4))
        cfg = AigaConfig(max_iter=25, tol=0.0)
        first = run_aiga(inst, cfg)
        second = run_aiga(inst, cfg)
        for rec_a, rec_b in zip(first.records, second.records):
            np.testing.assert_array_equal(rec_a.estimate, rec_b.estimate)
            assert rec_a.scalars == rec_b.scalars
