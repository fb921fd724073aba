"""Tests for the streaming Gibbs sampler and its trace."""

import math
from dataclasses import replace

import numpy as np
import pytest

import worksplit.gibbs as gibbs_mod
from worksplit.errors import MomentInfeasibleError, ParameterError
from worksplit.gibbs import (
    GibbsConfig,
    GibbsState,
    TracePoint,
    default_priors,
    gibbs_sweep,
    initial_state,
    read_trace_csv,
    run,
    write_trace_csv,
    write_trace_jsonl,
)
from worksplit.inference import Batch, BetaParams, NormalGammaParams
from worksplit.model import UnitParams
from worksplit.simulate import SplitPolicy, generate_trace

PRIOR = NormalGammaParams(0.0, 1.0, 1.0, 1.0)
EXPONENT_PRIOR = BetaParams(2.0, 2.0)


def make_batch(rng, n=20):
    f = rng.uniform(0.1, 0.9, n)
    t = f ** 0.9 * 30.0 + f ** 0.8 * 2.0 * rng.standard_normal(n)
    return Batch(f, t)


class TestGibbsConfig:
    def test_zero_max_batches_allowed(self):
        assert GibbsConfig(max_batches=0).max_batches == 0

    @pytest.mark.parametrize("kwargs", [
        {"batch_size": 0},
        {"inner_iterations": 0},
        {"max_batches": -1},
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ParameterError):
            GibbsConfig(**kwargs)


class TestGibbsState:
    def test_invariants(self):
        with pytest.raises(ParameterError):
            GibbsState(PRIOR, EXPONENT_PRIOR, EXPONENT_PRIOR,
                       mu_sample=1.0, lambda_sample=0.0,
                       alpha_sample=0.5, beta_sample=0.5)
        with pytest.raises(ParameterError):
            GibbsState(PRIOR, EXPONENT_PRIOR, EXPONENT_PRIOR,
                       mu_sample=1.0, lambda_sample=1.0,
                       alpha_sample=1.0, beta_sample=0.5)

    def test_sigma_is_inverse_root_precision(self):
        state = GibbsState(PRIOR, EXPONENT_PRIOR, EXPONENT_PRIOR,
                           mu_sample=1.0, lambda_sample=4.0,
                           alpha_sample=0.5, beta_sample=0.5)
        assert state.sigma_sample == 0.5


class TestGibbsSweep:
    def test_bit_identical_under_fixed_seed(self):
        batch = make_batch(np.random.default_rng(1))
        out = []
        for _ in range(2):
            rng = np.random.default_rng(7)
            state = initial_state(PRIOR, EXPONENT_PRIOR, EXPONENT_PRIOR, rng)
            out.append(gibbs_sweep(state, batch, rng))
        assert out[0] == out[1]

    def test_conjugate_sanity_at_full_share(self):
        rng = np.random.default_rng(23)
        t = rng.normal(12.0, 1.5, 10 ** 4)
        batch = Batch(np.ones(t.size), t)
        state = initial_state(PRIOR, EXPONENT_PRIOR, EXPONENT_PRIOR, rng)
        state = gibbs_sweep(state, batch, rng)
        posterior_sd = math.sqrt(1.0 / (state.ng_post.kappa0 * state.lambda_sample))
        assert abs(state.mu_sample - t.mean()) <= 4.0 * posterior_sd

    def test_sweep_outputs_stay_in_domain(self):
        rng = np.random.default_rng(3)
        batch = make_batch(rng)
        state = initial_state(PRIOR, EXPONENT_PRIOR, EXPONENT_PRIOR, rng)
        for _ in range(10):
            state = gibbs_sweep(state, batch, rng)
            assert state.lambda_sample > 0.0
            assert 0.0 < state.alpha_sample < 1.0
            assert 0.0 < state.beta_sample < 1.0

    def test_clamp_path_completes_and_logs(self, monkeypatch, caplog):
        rng = np.random.default_rng(3)
        batch = make_batch(rng)
        state = initial_state(PRIOR, EXPONENT_PRIOR, EXPONENT_PRIOR, rng)
        # Infeasible moments: variance above mean*(1-mean).
        monkeypatch.setattr(gibbs_mod, "posterior_moments", lambda ld, quad: (0.5, 0.4))
        with caplog.at_level("WARNING", logger="worksplit.gibbs"):
            swept = gibbs_sweep(state, batch, rng, clamp_moments=True)
        assert swept.clamp_count == 2
        assert any("clamping" in m for m in caplog.messages)

    def test_infeasible_moments_raise_without_clamp(self, monkeypatch):
        rng = np.random.default_rng(3)
        batch = make_batch(rng)
        state = initial_state(PRIOR, EXPONENT_PRIOR, EXPONENT_PRIOR, rng)
        monkeypatch.setattr(gibbs_mod, "posterior_moments", lambda ld, quad: (0.5, 0.4))
        with pytest.raises(MomentInfeasibleError):
            gibbs_sweep(state, batch, rng, clamp_moments=False)


class TestRun:
    def test_zero_batches_returns_priors_unchanged(self):
        cfg = GibbsConfig(max_batches=0)
        result = run([], cfg, ng_prior=PRIOR)
        assert result.trace == []
        assert result.state.ng is PRIOR
        assert not result.aborted

    def test_identical_inputs_give_identical_traces(self):
        records = generate_trace(100, SplitPolicy.uniform(0.1, 0.9),
                                 UnitParams(30.0, 2.0, 0.9, 0.8),
                                 np.random.default_rng(55))
        cfg = GibbsConfig(batch_size=20, inner_iterations=3, max_batches=5, rng_seed=9)
        a = run(records, cfg)
        b = run(records, cfg)
        assert a.trace == b.trace
        assert a.state == b.state

    def test_promoted_state_carries_no_hidden_memory(self):
        rng_data = np.random.default_rng(77)
        b1, b2 = make_batch(rng_data), make_batch(rng_data)
        sweep_rng = np.random.default_rng(5)
        state = initial_state(PRIOR, EXPONENT_PRIOR, EXPONENT_PRIOR, sweep_rng)
        for _ in range(3):
            state = gibbs_sweep(state, b1, sweep_rng)
        promoted = gibbs_mod._promote(state)

        fresh = GibbsState(
            ng=promoted.ng, alpha_prior=promoted.alpha_prior,
            beta_prior=promoted.beta_prior, mu_sample=promoted.mu_sample,
            lambda_sample=promoted.lambda_sample, alpha_sample=promoted.alpha_sample,
            beta_sample=promoted.beta_sample,
        )
        continued = gibbs_sweep(promoted, b2, np.random.default_rng(11))
        restarted = gibbs_sweep(fresh, b2, np.random.default_rng(11))
        assert continued.mu_sample == restarted.mu_sample
        assert continued.lambda_sample == restarted.lambda_sample
        assert continued.alpha_sample == restarted.alpha_sample
        assert continued.beta_sample == restarted.beta_sample
        assert continued.ng_post == restarted.ng_post

    def test_partial_final_batch_processed_when_large_enough(self):
        records = generate_trace(12, SplitPolicy.fixed(0.5), UnitParams(30.0, 2.0),
                                 np.random.default_rng(4))
        cfg = GibbsConfig(batch_size=5, inner_iterations=1, max_batches=10, rng_seed=1)
        result = run(records, cfg)
        assert [p.cumulative_observations for p in result.trace] == [5, 10, 12]
        assert result.discarded_observations == 0

    def test_partial_final_batch_discarded_when_single(self):
        records = generate_trace(11, SplitPolicy.fixed(0.5), UnitParams(30.0, 2.0),
                                 np.random.default_rng(4))
        cfg = GibbsConfig(batch_size=5, inner_iterations=1, max_batches=10, rng_seed=1)
        result = run(records, cfg)
        assert [p.cumulative_observations for p in result.trace] == [5, 10]
        assert result.discarded_observations == 1

    def test_default_prior_built_from_first_batch(self):
        records = generate_trace(40, SplitPolicy.uniform(0.1, 0.9),
                                 UnitParams(30.0, 2.0, 0.9, 0.8),
                                 np.random.default_rng(66))
        cfg = GibbsConfig(batch_size=20, inner_iterations=2, max_batches=2, rng_seed=3)
        result = run(records, cfg)
        # The location should be in the right ballpark of the full-load mean,
        # far from the zero placeholder.
        assert result.trace
        assert 5.0 < result.state.mu_sample < 60.0

    def test_trace_invariants_and_exposed_sigma(self):
        records = generate_trace(200, SplitPolicy.uniform(0.1, 0.9),
                                 UnitParams(30.0, 2.0, 0.9, 0.8),
                                 np.random.default_rng(8))
        cfg = GibbsConfig(batch_size=20, inner_iterations=3, max_batches=10, rng_seed=2)
        result = run(records, cfg)
        n_obs = [p.cumulative_observations for p in result.trace]
        assert n_obs == sorted(n_obs) and len(set(n_obs)) == len(n_obs)
        for p in result.trace:
            assert 0.0 < p.alpha < 1.0
            assert 0.0 < p.beta < 1.0
            assert p.sigma > 0.0
        assert result.state.sigma_sample == pytest.approx(
            math.sqrt(1.0 / result.state.lambda_sample))

    def test_synthetic_recovery_single_seed(self):
        truth = UnitParams(30.0, 2.0, 0.9, 0.8)
        records = generate_trace(1000, SplitPolicy.uniform(0.1, 0.9), truth,
                                 np.random.default_rng(10_000))
        cfg = GibbsConfig(batch_size=20, inner_iterations=10, max_batches=50, rng_seed=0)
        result = run(records, cfg, alpha_prior=BetaParams(3.0, 6.0),
                     beta_prior=BetaParams(3.0, 6.0), rng=np.random.default_rng(0))
        assert abs(result.state.mu_sample - 30.0) / 30.0 <= 0.10
        lls = [p.log_likelihood for p in result.trace]
        assert np.median(lls[-10:]) > np.median(lls[:10])


class TestDefaultPriors:
    def test_location_rescales_by_mean_share(self):
        batch = Batch([0.25, 0.25], [5.0, 7.0])
        prior = default_priors(batch, alpha_sample=0.5)
        assert prior.mu0 == pytest.approx(6.0 * 0.25 ** -0.5)
        assert (prior.kappa0, prior.nu0, prior.psi0) == (1.0, 1.0, 1.0)


class TestTraceSerialization:
    TRACE = [
        TracePoint(0, 20, -15.25, 29.5, 2.1, 0.85, 0.75),
        TracePoint(1, 40, -12.5, 30.1, 1.9, 0.88, 0.79),
    ]

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "trace.csv"
        write_trace_csv(self.TRACE, path)
        assert read_trace_csv(path) == self.TRACE

    def test_csv_header(self, tmp_path):
        path = tmp_path / "trace.csv"
        write_trace_csv(self.TRACE, path)
        header = path.read_text().splitlines()[0]
        assert header == "batch,n_obs,loglik,mu,sigma,alpha,beta"

    def test_jsonl_schema(self, tmp_path):
        import json

        path = tmp_path / "trace.jsonl"
        write_trace_jsonl(self.TRACE, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        rec = json.loads(lines[0])
        assert rec == {"batch": 0, "n_obs": 20, "loglik": -15.25, "mu": 29.5,
                       "sigma": 2.1, "alpha": 0.85, "beta": 0.75}
