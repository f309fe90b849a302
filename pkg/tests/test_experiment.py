import numpy as np
import pytest

from diffusion_lms.analysis import MsdTrace, detect_divergence, linear_deviation, steady_state_msd
from diffusion_lms.experiment import (
    EnsembleDivergence,
    ExperimentConfig,
    algorithm_spec,
    build_setup,
    denoise_speech,
    make_stream,
    run_ensemble,
    sweep_leakage,
    sweep_step_size,
)
from diffusion_lms.filters import run_filter
from diffusion_lms.signals import default_lowpass_system

SMALL = ExperimentConfig(nodes=8, radius=0.5, trials=3, horizon=120, steady_window=40)


class TestConfigMaterialization:
    def test_defaults_describe_the_headline_run(self):
        cfg = ExperimentConfig()
        assert cfg.nodes == 20 and cfg.taps == 5
        assert cfg.mu == 0.08 and cfg.gamma == 0.002
        assert cfg.trials == 50 and cfg.horizon == 1000
        assert cfg.snr_db == 0.0
        assert len(cfg.algorithms) == 4

    def test_variance_profile_is_seeded_and_pins_node_14(self):
        cfg = ExperimentConfig()
        setup_a = build_setup(cfg)
        setup_b = build_setup(cfg)
        assert np.array_equal(setup_a.variances, setup_b.variances)
        assert setup_a.variances[13] == 0.35  # node 14, 1-based
        assert ((setup_a.variances >= 0.1) & (setup_a.variances <= 1.0)).all()
        other = build_setup(ExperimentConfig(base_seed=4321))
        assert not np.array_equal(setup_a.variances, other.variances)

    def test_explicit_variances_and_coefficients(self):
        cfg = ExperimentConfig(
            nodes=3,
            regressor_variances=(0.2, 0.3, 0.4),
            coefficients=(1.0, -1.0),
            taps=2,
        )
        setup = build_setup(cfg)
        assert np.array_equal(setup.variances, [0.2, 0.3, 0.4])
        assert np.array_equal(setup.w_o, [1.0, -1.0])

    def test_algorithm_label_mapping(self):
        spec = algorithm_spec("atc_leaky_dlms", 0.08, 0.002)
        assert spec.ordering == "atc" and spec.gamma == 0.002
        spec = algorithm_spec("cta_dlms", 0.08, 0.002)
        assert spec.ordering == "cta" and spec.gamma == 0.0
        with pytest.raises(ValueError):
            algorithm_spec("fancy_dlms", 0.08, 0.002)


class TestRunEnsemble:
    def test_no_adaptation_gives_flat_trace_at_initial_msd(self):
        cfg = ExperimentConfig(
            nodes=5, radius=0.6, trials=1, horizon=1, mu=0.0, algorithms=("atc_dlms",), steady_window=1
        )
        trace = run_ensemble(cfg)["atc_dlms"]
        w_o = default_lowpass_system(cfg.taps)
        assert np.allclose(trace.per_iteration_db, 10 * np.log10(float(w_o @ w_o)), atol=1e-9)

    def test_deterministic_for_fixed_config(self):
        a = run_ensemble(SMALL)
        b = run_ensemble(SMALL)
        for label in SMALL.algorithms:
            assert np.array_equal(a[label].per_iteration_db, b[label].per_iteration_db)
            assert np.array_equal(a[label].per_node_db, b[label].per_node_db)

    def test_traces_do_not_depend_on_co_scheduled_algorithms(self):
        # paired-trial discipline: each algorithm consumes the same streams
        # whether or not others run alongside it
        from dataclasses import replace

        solo = run_ensemble(replace(SMALL, algorithms=("cta_leaky_dlms",)))
        joint = run_ensemble(SMALL)
        assert np.array_equal(
            solo["cta_leaky_dlms"].per_iteration_db, joint["cta_leaky_dlms"].per_iteration_db
        )

    def test_ensemble_averages_in_linear_domain(self):
        cfg = ExperimentConfig(
            nodes=6, radius=0.6, trials=4, horizon=60, algorithms=("atc_dlms",), steady_window=20
        )
        trace = run_ensemble(cfg)["atc_dlms"]
        setup = build_setup(cfg)
        spec = algorithm_spec("atc_dlms", cfg.mu, cfg.gamma)
        acc = np.zeros(cfg.horizon)
        for t in range(cfg.trials):
            stream = make_stream(cfg, setup, cfg.base_seed + t)
            snaps = run_filter(setup.topology, setup.weights, spec, stream)
            net, _ = linear_deviation(snaps[1:], setup.w_o)
            acc += net
        expected = 10 * np.log10(acc / cfg.trials)
        assert np.allclose(trace.per_iteration_db, expected, atol=0.0)
        assert trace.trials == 4 and trace.divergent_trials == 0

    def test_partially_divergent_trials_are_excluded_and_counted(self):
        cfg = ExperimentConfig(nodes=10, radius=0.5, trials=6, horizon=300, mu=1.6, steady_window=50)
        results = run_ensemble(cfg)
        setup = build_setup(cfg)
        for label, trace in results.items():
            assert isinstance(trace, MsdTrace)
            assert 0 < trace.divergent_trials < cfg.trials
            assert np.isfinite(trace.per_iteration_db).all()
            # recompute the survivor-only average independently
            spec = algorithm_spec(label, cfg.mu, cfg.gamma)
            acc, kept = np.zeros(cfg.horizon), 0
            for t in range(cfg.trials):
                stream = make_stream(cfg, setup, cfg.base_seed + t)
                snaps = run_filter(setup.topology, setup.weights, spec, stream)
                if detect_divergence(snaps[1:]).divergent:
                    continue
                net, _ = linear_deviation(snaps[1:], setup.w_o)
                acc += net
                kept += 1
            assert kept == cfg.trials - trace.divergent_trials
            assert np.allclose(trace.per_iteration_db, 10 * np.log10(acc / kept), atol=0.0)

    def test_wholly_divergent_algorithm_reports_failure(self):
        cfg = ExperimentConfig(nodes=10, radius=0.5, trials=3, horizon=200, mu=2.6, steady_window=50)
        results = run_ensemble(cfg)
        for label in cfg.algorithms:
            failure = results[label]
            assert isinstance(failure, EnsembleDivergence)
            assert failure.trials == 3
            assert failure.first_iteration is not None and failure.node is not None

    def test_steady_state_estimate_stabilizes_with_trial_count(self):
        # desk-scale check that more trials only refine the steady-state
        # readout at the expected 1/sqrt(trials) rate
        base = dict(nodes=8, radius=0.5, horizon=400, algorithms=("atc_dlms",), steady_window=100)
        few = run_ensemble(ExperimentConfig(**base, trials=200))["atc_dlms"]
        many = run_ensemble(ExperimentConfig(**base, trials=1000))["atc_dlms"]
        gap = abs(
            steady_state_msd(few, base["steady_window"]) - steady_state_msd(many, base["steady_window"])
        )
        assert gap < 0.5

    def test_edge_list_topology_round_trips_through_config(self, tmp_path):
        from diffusion_lms.network import build_random_geometric, save_edge_list

        topo = build_random_geometric(6, 0.5, 3)
        path = tmp_path / "net.txt"
        save_edge_list(topo, path)
        cfg = ExperimentConfig(
            nodes=6,
            topology="edge_list",
            edge_list_path=str(path),
            trials=2,
            horizon=40,
            algorithms=("atc_dlms",),
            steady_window=10,
        )
        assert build_setup(cfg).topology == topo
        trace = run_ensemble(cfg)["atc_dlms"]
        assert np.isfinite(trace.per_iteration_db).all()


class TestSweeps:
    def test_singleton_grid_matches_direct_run(self):
        points = sweep_step_size(SMALL, (SMALL.mu,))
        direct = run_ensemble(SMALL)
        for label, values in points.items():
            (mu, db), = values
            assert mu == SMALL.mu
            assert db == steady_state_msd(direct[label], SMALL.steady_window)

    def test_zero_leakage_entry_equals_plain_dlms(self):
        points = sweep_leakage(SMALL, (0.0,))
        for leaky, plain in (("atc_leaky_dlms", "atc_dlms"), ("cta_leaky_dlms", "cta_dlms")):
            (_, leaky_db), = points[leaky]
            (_, plain_db), = points[plain]
            assert abs(leaky_db - plain_db) < 1e-12

    def test_divergent_grid_points_reported_as_divergent(self):
        points = sweep_step_size(SMALL, (0.05, 2.6))
        for label, values in points.items():
            assert values[0][1] is not None
            assert values[1][1] is None

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            sweep_step_size(SMALL, ())
        with pytest.raises(ValueError):
            sweep_step_size(SMALL, (0.0,))
        with pytest.raises(ValueError):
            sweep_leakage(SMALL, (-0.1,))


class TestDenoise:
    def speech_cfg(self, **over):
        base = dict(
            nodes=8,
            radius=0.5,
            source="delay_line",
            sample_path="synthetic",
            horizon=800,
            algorithms=("atc_leaky_dlms",),
            steady_window=100,
        )
        base.update(over)
        return ExperimentConfig(**base)

    def test_outputs_are_consistent(self):
        cfg = self.speech_cfg()
        result = denoise_speech(cfg, 3)
        assert result.noisy.shape == (800,)
        assert np.array_equal(result.residual, result.noisy - result.filtered)
        assert np.isfinite(result.filtered).all()
        assert result.sample_rate is None

    def test_noiseless_residual_vanishes_after_convergence(self):
        # plain dLMS (the leaky variants keep a deliberate bias) with strong
        # excitation everywhere so every node converges within the run
        cfg = self.speech_cfg(
            noise_variance=0.0,
            algorithms=("atc_dlms",),
            horizon=2400,
            regressor_variances=(1.0,) * 8,
        )
        result = denoise_speech(cfg, 2)
        tail = slice(2000, None)
        signal_power = (result.clean[tail] ** 2).mean()
        residual_power = (result.residual[tail] ** 2).mean()
        assert residual_power < 1e-4 * signal_power

    def test_zero_input_gives_zero_filter_output(self, tmp_path):
        path = tmp_path / "silence.txt"
        path.write_text("\n".join(["0.0"] * 200) + "\n")
        cfg = self.speech_cfg(sample_path=str(path))
        result = denoise_speech(cfg, 1)
        assert np.array_equal(result.filtered, np.zeros(200))
        assert np.array_equal(result.noisy, result.residual)

    def test_node_out_of_range_rejected(self):
        cfg = self.speech_cfg()
        with pytest.raises(ValueError):
            denoise_speech(cfg, -1)
        with pytest.raises(ValueError):
            denoise_speech(cfg, 8)

    def test_requires_delay_line_source(self):
        with pytest.raises(ValueError):
            denoise_speech(SMALL, 0)
