"""Experiment orchestration: runs, channel grids, decay reports.

A campaign realizes one regime (exact linear propagation, or the nonlinear
solver) on seeded initial data, measures every channel of the decay-rate
table inside the wrap-aware window, and emits a deterministic ``report.csv``
(one fitted channel per row) plus a human summary.  Verdicts are one-sided:
the theory proves upper bounds, so PASS means decay at least as fast as
predicted, within slack.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .grid import BoxSpec
from .initial import InitialData, make_initial_data, x_surrogate
from .linear import propagate_linear, theoretical_exponent
from .measure import (
    DEFAULT_P_VALUES,
    Channel,
    DecayFit,
    NORM_FLOOR,
    channel_norms_bulk,
    fit_loglog,
    wrap_time,
)
from .solver import SolverConfig, run

REPORT_HEADER = "channel,alpha_h,alpha_3,p,t0,t1,slope,theory,verdict"


def build_box(cfg):
    (nx, ny, nz) = cfg["grid"]
    (lx, ly, lz) = cfg["box"]
    return BoxSpec(nx, ny, nz, lx, ly, lz)


def build_data_spec(cfg):
    return InitialData(
        construction=cfg["construction"],
        amplitude=cfg["amplitude"],
        support_h=cfg["support_h"],
        support_v=cfg["support_v"],
        seed=cfg["seed"],
    )


def default_channel_grid(p_values=DEFAULT_P_VALUES):
    channels = []
    for component in ("Ph_vh", "curlfree_vh", "theta"):
        alphas = ((0, 0, 0), (1, 0, 0), (0, 0, 1))
        for alpha in alphas:
            for p in p_values:
                channels.append(Channel(component, alpha, p))
    for alpha in ((0, 0, 0), (1, 0, 0)):
        for p in p_values:
            channels.append(Channel("v3", alpha, p))
    for p in p_values:
        channels.append(Channel("d3_v3", (0, 0, 0), p))
    return channels


def mandatory_channels(p_values=(2.0,)):
    return [Channel(c, (0, 0, 0), p) for c in ("Ph_vh", "curlfree_vh", "v3", "theta", "d3_v3") for p in p_values]


def snapshot_times(t0, t1, count=24, lead_in=4):
    """Log-spaced sample times inside [t0, t1] plus a short transient lead-in."""
    lead = np.linspace(0.0, t0, lead_in, endpoint=False)
    window = np.expm1(np.linspace(np.log1p(t0), np.log1p(t1), count))
    return np.concatenate([lead, window])


def linear_states(state0, times):
    return [propagate_linear(state0, float(t)) for t in times]


def fit_series(times, values, channel, t0, t1, regime, epsilon, pass_slack=0.15, min_samples=8):
    sel = [(t, v) for t, v in zip(times, values) if t0 - 1e-9 <= t <= t1 + 1e-9]
    theory = theoretical_exponent(channel.component, channel.alpha_h, channel.p, regime, epsilon)
    if len(sel) < min_samples:
        raise ConfigurationError(f"window [{t0}, {t1}] has {len(sel)} samples; need {min_samples}")
    ts = [t for t, _ in sel]
    vs = [v for _, v in sel]
    if min(vs) <= NORM_FLOOR:
        return DecayFit(channel, t0, t1, float("nan"), 0.0, 0.0, theory, "INCONCLUSIVE", len(sel))
    slope, stderr, resid = fit_loglog(ts, vs)
    verdict = "PASS" if slope <= theory + pass_slack else "FAIL"
    return DecayFit(channel, t0, t1, slope, stderr, resid, theory, verdict, len(sel))


def measure_channels(states, channels, t0, t1, regime, epsilon):
    """Fit every channel from bulk-evaluated norm series."""
    times = [s.time for s in states]
    series = {ch: [] for ch in channels}
    for state in states:
        norms = channel_norms_bulk(state, channels)
        for ch in channels:
            series[ch].append(norms[ch])
    return [fit_series(times, series[ch], ch, t0, t1, regime, epsilon) for ch in channels]


def _fmt(value):
    if value != value:  # NaN
        return "nan"
    if value == np.inf:
        return "inf"
    return f"{value:.10g}"


def format_report(fits):
    buf = io.StringIO()
    buf.write(REPORT_HEADER + "\n")
    for fit in fits:
        ch = fit.channel
        buf.write(
            ",".join(
                [
                    ch.component,
                    str(ch.alpha_h),
                    str(ch.alpha[2]),
                    "inf" if ch.p == np.inf else f"{ch.p:g}",
                    _fmt(fit.t0),
                    _fmt(fit.t1),
                    _fmt(fit.slope),
                    _fmt(fit.theory),
                    fit.verdict,
                ]
            )
            + "\n"
        )
    return buf.getvalue()


def write_norms_csv(path, states, channels):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,channel,p,alpha,value\n")
        for state in states:
            norms = channel_norms_bulk(state, channels)
            for ch in channels:
                alpha = "".join(str(a) for a in ch.alpha)
                p = "inf" if ch.p == np.inf else f"{ch.p:g}"
                fh.write(f"{_fmt(state.time)},{ch.component},{p},{alpha},{_fmt(norms[ch])}\n")


@dataclass
class CampaignResult:
    regime: str
    fits: list
    report_csv: str
    summary: str
    exit_code: int
    data_norm: float
    window: tuple


def run_campaign(cfg, p_values=DEFAULT_P_VALUES, channels=None, snapshot_count=24):
    """Execute one campaign per the parsed configuration dictionary."""
    box = build_box(cfg)
    data_spec = build_data_spec(cfg)
    state0 = make_initial_data(data_spec, box)
    regime = "linear" if cfg["mode"] == "linear" else "nonlinear"
    t0 = cfg["t0"]
    t1 = min(wrap_time(box), cfg["t_end"])
    if t1 <= t0:
        raise ConfigurationError(f"window [{t0}, {t1}] is empty; enlarge the box or t_end")
    channels = channels or default_channel_grid(p_values)

    if regime == "linear":
        states = linear_states(state0, snapshot_times(t0, t1, snapshot_count))
    else:
        stride = max(1, int(round((t1 - t0) / (snapshot_count * cfg["dt"]))))
        solver_cfg = SolverConfig(
            dt=cfg["dt"],
            t_end=cfg["t_end"],
            dealias=cfg["dealias"],
            scheme=cfg["scheme"],
            snapshot_stride=stride,
            nonlinear=True,
        )
        states = run(state0, solver_cfg).states

    fits = measure_channels(states, channels, t0, t1, regime, cfg["epsilon"])
    mandatory = {(c.component, c.alpha, c.p) for c in mandatory_channels()}
    failures = [
        f for f in fits
        if (f.channel.component, f.channel.alpha, f.channel.p) in mandatory and f.verdict == "FAIL"
    ]
    counts = {v: sum(1 for f in fits if f.verdict == v) for v in ("PASS", "FAIL", "INCONCLUSIVE")}
    summary = (
        f"{regime} campaign: {counts['PASS']} PASS, {counts['FAIL']} FAIL, "
        f"{counts['INCONCLUSIVE']} INCONCLUSIVE over window [{t0:g}, {t1:g}]; "
        f"data norm {x_surrogate(state0):.6g}; mandatory failures: {len(failures)}"
    )
    return CampaignResult(
        regime=regime,
        fits=fits,
        report_csv=format_report(fits),
        summary=summary,
        exit_code=1 if failures else 0,
        data_norm=x_surrogate(state0),
        window=(t0, t1),
    )
