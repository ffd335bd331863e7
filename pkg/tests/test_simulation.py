import math

import numpy as np
import pytest

from dpkalman import (
    PrivacyConfig,
    SimulationConfig,
    SimulationRecord,
    SystemModel,
    ValidationError,
    bound_violation_stats,
    compose,
    simulate,
    write_csv,
)
from dpkalman.simulation import CSV_HEADER
from helpers import case_study_system, reference_paths
from test_network import agent, scalar_agent

LN3 = math.log(3.0)


def case_config(trials=200, horizon=100, seed=42, **kw):
    system = case_study_system()
    privacy = PrivacyConfig.for_system(system, epsilon=LN3, delta=0.001, adjacency_B=1.0)
    return SimulationConfig(system=system, privacy=privacy, horizon_T=horizon,
                            trials=trials, seed=seed, **kw)


class TestDeterminism:
    def test_bitwise_reproducible(self):
        a = simulate(case_config(trials=50))
        b = simulate(case_config(trials=50))
        np.testing.assert_array_equal(a.sq_err_prior, b.sq_err_prior)
        np.testing.assert_array_equal(a.sq_err_post, b.sq_err_post)

    def test_thread_count_irrelevant(self):
        base = simulate(case_config(trials=101), threads=1)
        for threads in (2, 4, 7):
            other = simulate(case_config(trials=101), threads=threads)
            np.testing.assert_array_equal(base.sq_err_prior, other.sq_err_prior)
            np.testing.assert_array_equal(base.sq_err_post, other.sq_err_post)

    def test_trials_differ_within_a_run(self):
        res = simulate(case_config(trials=2))
        assert not np.array_equal(res.sq_err_prior[0], res.sq_err_prior[1])

    def test_csv_bytes_identical(self, tmp_path):
        res = simulate(case_config(trials=20))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(res, p1)
        write_csv(simulate(case_config(trials=20)), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_csv_format(self, tmp_path):
        res = simulate(case_config(trials=3, horizon=5))
        path = tmp_path / "out.csv"
        write_csv(res, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode("ascii").splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 3 * 5
        first = lines[1].split(",")
        assert first[0] == "0" and first[1] == "0"
        assert float(first[4]) == pytest.approx(res.bound_prior[0])


class TestStatistics:
    def test_near_noiseless_estimation_is_exact(self):
        system = SystemModel(H=case_study_system().H, C=np.eye(2), W=1e-12 * np.eye(2), x0_hat=np.zeros(2))
        privacy = PrivacyConfig.for_system(system, epsilon=5.0, delta=0.01, adjacency_B=1e-5)
        assert privacy.sigma.max() < 2e-5
        cfg = SimulationConfig(system=system, privacy=privacy, horizon_T=50, trials=5, seed=3)
        res = simulate(cfg)
        assert float(res.sq_err_post[:, 1:].max()) < 1e-8

    def test_seed_changes_paths_not_means(self):
        a = simulate(case_config(trials=600, seed=11))
        b = simulate(case_config(trials=600, seed=12))
        assert not np.array_equal(a.sq_err_prior, b.sq_err_prior)
        for field in ("mean_sq_err_prior", "mean_sq_err_post"):
            ma, mb = getattr(a.summary, field), getattr(b.summary, field)
            sa = getattr(a.summary, field.replace("mean", "stderr"))
            sb = getattr(b.summary, field.replace("mean", "stderr"))
            assert abs(ma - mb) <= 3.0 * math.hypot(sa, sb)

    def test_means_converge_to_solved_traces(self):
        res = simulate(case_config(trials=10_000, horizon=100), threads=4)
        tr_prior = float(np.trace(res.solution.riccati.sigma))
        tr_post = float(np.trace(res.solution.riccati.sigma_bar))
        assert res.summary.mean_sq_err_prior == pytest.approx(tr_prior, rel=0.02)
        assert res.summary.mean_sq_err_post == pytest.approx(tr_post, rel=0.02)

    def test_matches_reference_simulator(self):
        # the engine and the plain-loop reference use different RNG streams,
        # so only the distributions must agree
        res = simulate(case_config(trials=1500, horizon=80))
        system = case_study_system()
        _, prior_err, post_err, _, _ = reference_paths(
            system, np.full(2, 2.966281680892255), T=80, trials=1500, seed=7)
        ref_prior = (prior_err[:, 10:, :] ** 2).sum(axis=2).mean()
        ref_post = (post_err[:, 10:, :] ** 2).sum(axis=2).mean()
        assert res.summary.mean_sq_err_prior == pytest.approx(ref_prior, rel=0.05)
        assert res.summary.mean_sq_err_post == pytest.approx(ref_post, rel=0.05)


class TestGaussianInitialSpread:
    def test_spread_raises_early_error_only(self):
        tight = simulate(case_config(trials=400, horizon=40))
        spread = simulate(case_config(trials=400, horizon=40, x0_cov=25.0 * np.eye(2)))
        # the first prediction uses the public mean, so the spread shows up at k=0
        assert spread.sq_err_prior[:, 0].mean() > tight.sq_err_prior[:, 0].mean() + 10.0
        # steady-state behavior is unchanged
        assert spread.summary.mean_sq_err_prior == pytest.approx(
            tight.summary.mean_sq_err_prior, rel=0.1)

    def test_bad_spread_shape_rejected(self):
        with pytest.raises(ValidationError):
            case_config(x0_cov=np.eye(3))


class TestNetworkSimulation:
    def test_network_runs_and_burns_in(self):
        network = compose([agent("plane", case_study_system(), epsilon=LN3, delta=0.001),
                           scalar_agent("dot", 0.5)])
        cfg = SimulationConfig(system=network, privacy=None, horizon_T=60, trials=50, seed=9)
        res = simulate(cfg)
        assert res.sq_err_prior.shape == (50, 60)
        assert res.summary.burn_in == 10

    def test_network_rejects_extra_privacy(self):
        network = compose([scalar_agent("dot", 0.5)])
        stray = PrivacyConfig.for_system(case_study_system(), epsilon=1.0, delta=0.01, adjacency_B=1.0)
        with pytest.raises(ValidationError):
            SimulationConfig(system=network, privacy=stray, horizon_T=10, trials=1, seed=0)


class TestEdges:
    def test_single_step_horizon(self):
        res = simulate(case_config(trials=3, horizon=1))
        assert res.summary.burn_in == 0
        assert res.sq_err_prior.shape == (3, 1)

    def test_invalid_sizes_rejected(self):
        with pytest.raises(ValidationError):
            case_config(trials=0)
        with pytest.raises(ValidationError):
            case_config(horizon=0)


class TestViolationStats:
    def test_synthetic_inside(self):
        records = [SimulationRecord(k, 5.0, 5.0, 0.0, 10.0, 0.0, 10.0) for k in range(4)]
        stats = bound_violation_stats(records)
        assert stats == {"frac_steps_prior_outside": 0.0, "frac_steps_post_outside": 0.0}

    def test_synthetic_outside(self):
        records = [SimulationRecord(k, 50.0, -1.0, 0.0, 10.0, 0.0, 10.0) for k in range(4)]
        stats = bound_violation_stats(records)
        assert stats == {"frac_steps_prior_outside": 1.0, "frac_steps_post_outside": 1.0}

    def test_case_study_single_trial_is_mixed(self):
        res = simulate(case_config(trials=1, horizon=100))
        stats = bound_violation_stats(res.trial_records(0))
        assert 0.0 < stats["frac_steps_prior_outside"] < 1.0
        assert 0.0 < stats["frac_steps_post_outside"] < 1.0

    def test_result_and_records_agree(self):
        res = simulate(case_config(trials=4, horizon=30))
        flat = [r for t in range(4) for r in res.trial_records(t)]
        assert bound_violation_stats(res) == bound_violation_stats(flat)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            bound_violation_stats([])
