"""Figure rendering for the report commands (one PNG next to each CSV)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 10,
    "axes.grid": True,
    "grid.alpha": 0.35,
    "grid.linestyle": "--",
    "legend.fontsize": 8,
    "legend.framealpha": 0.9,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "figure.figsize": (5.0, 3.6),
    "savefig.dpi": 200,
    "savefig.bbox": "tight",
}

_STRATEGY_STYLE = {
    "mmse-sic": dict(color="tab:blue", marker="o"),
    "transmit-diversity": dict(color="tab:red", marker="s"),
    "non-mimo": dict(color="tab:green", marker="^"),
    "optimal-sm": dict(color="tab:purple", marker="d"),
}


def _new_axes():
    plt.rcParams.update(_STYLE)
    return plt.subplots()


def save_figure(fig, path):
    fig.savefig(path)
    plt.close(fig)


def _by_key(rows, key):
    groups = {}
    for row in rows:
        groups.setdefault(row[key], []).append(row)
    return groups


def _rate_axes(rows, x_key, y_key, x_label, y_label):
    fig, ax = _new_axes()
    for name, group in _by_key(rows, "strategy").items():
        xs = [r[x_key] for r in group]
        ys = [r[y_key] for r in group]
        ax.plot(xs, ys, label=name, **_STRATEGY_STYLE.get(name, {}))
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.legend()
    return fig


def plot_flat_sweep(rows, path):
    fig = _rate_axes(rows, "snr_db", "r_eps", "SNR (dB)",
                     "1%-outage spectral efficiency (bits/s/Hz)")
    fig.axes[0].set_title("Frequency-flat Rayleigh, no H-ARQ")
    save_figure(fig, path)


def plot_rich_sweep(rows, path):
    fig = _rate_axes(rows, "snr_db", "effective_rate", "SNR (dB)",
                     "effective rate (bits/s/Hz)")
    fig.axes[0].set_title("Selective channel with incremental-redundancy H-ARQ")
    save_figure(fig, path)


def plot_speed_sweep(rows, path):
    fig = _rate_axes(rows, "velocity_kmh", "effective_rate", "velocity (km/h)",
                     "effective rate (bits/s/Hz)")
    fig.axes[0].set_title(f"Effective rate vs. velocity at {rows[0]['snr_db']:g} dB")
    save_figure(fig, path)


def plot_ergodic_compare(rows, path):
    fig, ax = _new_axes()
    for name, group in _by_key(rows, "strategy").items():
        style = _STRATEGY_STYLE.get(name, {})
        xs = [r["snr_db"] for r in group]
        ax.plot(xs, [r["r_eps"] for r in group], label=f"{name} (1% outage)",
                color=style.get("color"))
        ax.plot(xs, [r["ergodic_rate"] for r in group], "o", mfc="none",
                label=f"{name} (ergodic)", color=style.get("color"))
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("rate (bits/s/Hz)")
    ax.legend()
    save_figure(fig, path)


def plot_uncoded_ser(rows, path):
    fig, ax = _new_axes()
    for name, group in _by_key(rows, "scheme").items():
        kept = [(r["snr_db"], r["ser"]) for r in group if r["ser"] > 0]
        ax.semilogy([x for x, _ in kept], [y for _, y in kept], marker="o", label=name)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("symbol error probability")
    ax.legend()
    save_figure(fig, path)


def plot_dmt(rows, path):
    fig, ax = _new_axes()
    xs = [r["multiplexing_gain"] for r in rows]
    ys = [r["diversity_order"] for r in rows]
    ax.plot(xs, ys, "o-")
    ax.set_xlabel("multiplexing gain r")
    ax.set_ylabel("diversity order d(r)")
    ax.set_title(f"{rows[0]['n_t']}x{rows[0]['n_r']} diversity-multiplexing tradeoff")
    save_figure(fig, path)


def _db(values):
    return 20.0 * np.log10(np.maximum(np.asarray(values, dtype=float), 1e-12))


def plot_channel_stats(rows, path):
    groups = _by_key(rows, "metric")
    plt.rcParams.update(_STYLE)
    fig, axes = plt.subplots(2, 2, figsize=(9, 6.4))
    (ax_tone, ax_time), (ax_dopp, ax_freq) = axes

    tone = groups.get("tone_trace", [])
    ax_tone.plot([r["x"] for r in tone], _db([r["value"] for r in tone]), lw=0.8)
    marks = groups.get("tone_trace_mark", [])
    ax_tone.plot([r["x"] for r in marks], _db([r["value"] for r in marks]), "o", mfc="none")
    ax_tone.set_xlabel("tone index")
    ax_tone.set_ylabel("|H| (dB)")
    ax_tone.set_title("fading across tones")

    trace = groups.get("time_trace", [])
    ax_time.plot([r["x"] for r in trace], _db([r["value"] for r in trace]), lw=0.8)
    marks = groups.get("time_trace_mark", [])
    ax_time.plot([r["x"] for r in marks], _db([r["value"] for r in marks]), "o", mfc="none")
    ax_time.set_xlabel("time (ms)")
    ax_time.set_ylabel("|H| (dB)")
    ax_time.set_title("fading across H-ARQ rounds")

    dopp = groups.get("doppler_autocorr", [])
    ax_dopp.plot([r["x"] for r in dopp], [r["value"] for r in dopp], marker=".")
    ax_dopp.axhline(0.0, color="k", lw=0.6)
    ax_dopp.set_xlabel("lag (ms)")
    ax_dopp.set_ylabel("autocorrelation")
    ax_dopp.set_title("Doppler autocorrelation")

    freq = groups.get("freq_corr", [])
    ax_freq.plot([r["x"] for r in freq], [r["value"] for r in freq], marker=".",
                 label="empirical")
    ax_freq.plot([r["x"] for r in freq], [r["reference"] for r in freq], "k--",
                 label="profile closed form")
    ax_freq.set_xlabel("tone separation (MHz)")
    ax_freq.set_ylabel("|frequency correlation|")
    ax_freq.legend()

    fig.tight_layout()
    save_figure(fig, path)
