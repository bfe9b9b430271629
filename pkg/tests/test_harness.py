"""Initial data, channel norms, decay fitting, campaign plumbing."""

import numpy as np
import pytest

from anisob.campaign import (
    REPORT_HEADER,
    build_box,
    default_channel_grid,
    format_report,
    linear_states,
    measure_channels,
    run_campaign,
    snapshot_times,
)
from anisob.configfile import DEFAULTS, parse_config_text
from anisob.errors import ConfigurationError, WindowError
from anisob.grid import BoxSpec, l2_norm_spectral, lp_norm_multi
from anisob.initial import InitialData, make_initial_data, x_surrogate
from anisob.linear import helmholtz_h, propagate_linear
from anisob.measure import Channel, channel_norm, channel_norms_bulk, measure_decay, wrap_time


@pytest.fixture(scope="module")
def data_box():
    return BoxSpec(32, 32, 32, 32.0, 32.0, 16.0)


class TestInitialData:
    def test_invalid_specs_rejected(self):
        with pytest.raises(ConfigurationError):
            InitialData(construction="plane-wave")
        with pytest.raises(ConfigurationError):
            InitialData(amplitude=-1.0)

    def test_support_must_fit_box(self, data_box):
        with pytest.raises(ConfigurationError):
            make_initial_data(InitialData(support_h=10.0), data_box)

    def test_zero_amplitude_gives_zero_state(self, data_box):
        state = make_initial_data(InitialData(amplitude=0.0, seed=3), data_box)
        assert all(np.abs(f.coeffs).max() == 0.0 for f in state.fields)

    @pytest.mark.parametrize("construction", ["modulated-bump", "random-band"])
    def test_state_properties(self, data_box, construction):
        spec = InitialData(construction, amplitude=1e-2, support_h=2.0, support_v=2.0, seed=5)
        state = make_initial_data(spec, data_box)
        assert state.max_relative_divergence() < 1e-10
        for f in state.fields:
            assert abs(f.coeffs[0, 0, 0]) < 1e-14  # mean zero
        assert x_surrogate(state) == pytest.approx(1e-2, rel=1e-10)

    def test_deterministic_from_seed(self, data_box):
        a = make_initial_data(InitialData(seed=9), data_box)
        b = make_initial_data(InitialData(seed=9), data_box)
        for fa, fb in zip(a.fields, b.fields):
            assert np.array_equal(fa.coeffs, fb.coeffs)
        c = make_initial_data(InitialData(seed=10), data_box)
        assert not np.array_equal(a.v1.coeffs, c.v1.coeffs)

    def test_amplitude_scaling_exact(self, data_box):
        small = make_initial_data(InitialData(amplitude=1e-3, seed=2), data_box)
        large = make_initial_data(InitialData(amplitude=1e-1, seed=2), data_box)
        ratio = x_surrogate(large) / x_surrogate(small)
        assert ratio == pytest.approx(100.0, rel=1e-10)

    def test_compact_support_tails(self):
        # needs a grid fine enough that spectral truncation (the only tail
        # source for a Gaussian envelope) sits below the target
        from anisob.grid import inverse_transform

        box = BoxSpec(48, 48, 48, 32.0, 32.0, 16.0)
        spec = InitialData(amplitude=1.0, support_h=3.5, support_v=2.0, seed=4)
        state = make_initial_data(spec, box)
        phys = inverse_transform(state.theta)
        peak = np.abs(phys).max()
        edge = max(
            np.abs(phys[0, :, :]).max(),
            np.abs(phys[:, 0, :]).max(),
            np.abs(phys[:, :, 0]).max(),
        )
        assert edge < 1e-12 * peak


class TestChannels:
    def test_component_validation(self):
        with pytest.raises(ValueError):
            Channel("vorticity")
        with pytest.raises(ValueError):
            Channel("v3", (0, 0, 1))
        with pytest.raises(ValueError):
            Channel("d3_v3", (1, 0, 0))
        with pytest.raises(ValueError):
            Channel("theta", (1, 1, 0))

    def test_decomposition_exact(self, data_box):
        state = make_initial_data(InitialData(seed=1), data_box)
        rot = helmholtz_h((state.v1, state.v2))
        curl1 = state.v1 - rot[0]
        scale = np.abs(state.v1.coeffs).max()
        assert np.abs(rot[0].coeffs + curl1.coeffs - state.v1.coeffs).max() < 1e-12 * scale

    def test_bulk_matches_single(self, data_box):
        state = make_initial_data(InitialData(seed=6), data_box)
        channels = [Channel("Ph_vh", (0, 0, 0), 2.0), Channel("theta", (1, 0, 0), np.inf)]
        bulk = channel_norms_bulk(state, channels)
        for ch in channels:
            assert bulk[ch] == pytest.approx(channel_norm(state, ch), rel=1e-12)

    def test_wrap_time(self):
        assert wrap_time(BoxSpec(16, 16, 16, 40.0, 40.0, 20.0)) == 10.0


class TestMeasureDecay:
    def _heat_states(self, box, times, support=(1.5, 1.25)):
        state = make_initial_data(
            InitialData(amplitude=1.0, support_h=support[0], support_v=support[1], seed=8), box
        )
        return [propagate_linear(state, float(t)) for t in times]

    def test_pure_heat_channel_slope(self):
        # the box must hold enough horizontal modes inside the heat cutoff
        # through the window, or lattice discreteness steepens the fit
        box = BoxSpec(96, 96, 16, 96.0, 96.0, 16.0)
        times = snapshot_times(4.0, 20.0, 12)
        states = self._heat_states(box, times, support=(3.5, 2.0))
        fit = measure_decay(states, Channel("Ph_vh", (0, 0, 0), 2.0), t0=4.0, t1=20.0)
        assert fit.slope == pytest.approx(-0.5, abs=0.1)
        assert fit.verdict == "PASS"

    def test_insufficient_window_raises(self):
        box = BoxSpec(16, 16, 16, 32.0, 32.0, 32.0)
        states = self._heat_states(box, [0.0, 6.0, 7.0])
        with pytest.raises(WindowError):
            measure_decay(states, Channel("v3"), t0=5.0, t1=10.0)

    def test_zero_state_inconclusive(self):
        box = BoxSpec(16, 16, 16, 32.0, 32.0, 32.0)
        zero = make_initial_data(InitialData(amplitude=0.0), box)
        states = [zero.with_time(t) for t in np.linspace(5.0, 15.0, 9)]
        fit = measure_decay(states, Channel("theta"), t0=5.0, t1=15.0)
        assert fit.verdict == "INCONCLUSIVE"


class TestCampaign:
    def _small_cfg(self, mode):
        cfg = dict(DEFAULTS)
        cfg.update(
            grid=(32, 32, 32),
            box=(32.0, 32.0, 16.0),
            amplitude=1e-2,
            dt=0.05,
            t_end=12.0,
            t0=3.0,
            mode=mode,
            support_h=2.0,
            support_v=2.0,
            seed=1,
        )
        return cfg

    def test_report_format(self):
        cfg = self._small_cfg("linear")
        result = run_campaign(cfg, p_values=(2.0,), snapshot_count=10)
        lines = result.report_csv.strip().split("\n")
        assert lines[0] == REPORT_HEADER
        assert len(lines) == 1 + len(result.fits)
        first = lines[1].split(",")
        assert first[0] in ("Ph_vh", "curlfree_vh", "v3", "theta", "d3_v3")
        assert first[-1] in ("PASS", "FAIL", "INCONCLUSIVE")

    def test_zero_amplitude_all_inconclusive(self):
        cfg = self._small_cfg("linear")
        cfg["amplitude"] = 0.0
        result = run_campaign(cfg, p_values=(2.0,), snapshot_count=10)
        assert all(f.verdict == "INCONCLUSIVE" for f in result.fits)
        assert result.exit_code == 0

    def test_campaign_deterministic(self):
        cfg = self._small_cfg("linear")
        a = run_campaign(cfg, p_values=(2.0, np.inf), snapshot_count=10)
        b = run_campaign(cfg, p_values=(2.0, np.inf), snapshot_count=10)
        assert a.report_csv == b.report_csv

    def test_nonlinear_campaign_runs(self):
        cfg = self._small_cfg("nonlinear")
        cfg["t_end"] = 8.0
        cfg["t0"] = 2.0
        result = run_campaign(cfg, p_values=(2.0,), snapshot_count=10)
        assert result.regime == "nonlinear"
        assert result.exit_code in (0, 1)
        assert "nonlinear campaign" in result.summary

    def test_empty_window_rejected(self):
        cfg = self._small_cfg("linear")
        cfg["t0"] = 50.0
        with pytest.raises(ConfigurationError):
            run_campaign(cfg)

    def test_channel_grid_contents(self):
        grid = default_channel_grid((2.0, np.inf))
        labels = {c.label for c in grid}
        assert "v3[000]p2" in labels and "theta[001]pinf" in labels
        assert not any(c.component == "v3" and c.alpha[2] for c in grid)


class TestConfigFile:
    def test_parse_and_defaults(self):
        text = """
        # comment
        grid = 48 48 24
        box = 40 40 20
        dt = 0.02
        mode = linear
        seed = 3
        """
        cfg = parse_config_text(text)
        assert cfg["grid"] == (48, 48, 24)
        assert cfg["box"] == (40.0, 40.0, 20.0)
        assert cfg["dt"] == 0.02
        assert cfg["mode"] == "linear"
        assert cfg["dealias"] == DEFAULTS["dealias"]

    def test_bad_keys_and_values(self):
        with pytest.raises(ConfigurationError):
            parse_config_text("gird = 16 16 16")
        with pytest.raises(ConfigurationError):
            parse_config_text("grid = 16 16")
        with pytest.raises(ConfigurationError):
            parse_config_text("mode = wavy")
        with pytest.raises(ConfigurationError):
            parse_config_text("dt black")
