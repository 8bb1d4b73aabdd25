"""The three figure types, rendered deterministically from run artifacts."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reader import RunDir

# fixed style and a fixed hash salt so repeated renders are byte-identical
_STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "rsv-plotkit",
}

_META = {"png": {"Software": "rsv-plotkit"}, "svg": {"Date": None}}


def _save(fig, out_path: Path) -> Path:
    fmt = out_path.suffix.lstrip(".")
    fig.savefig(out_path, format=fmt, metadata=_META.get(fmt, {}))
    plt.close(fig)
    return out_path


def plot_riccati(run_dir: str | Path, out_path: str | Path) -> Path:
    """-1/min P+ against t, with the fitted Riccati line and its slope."""
    rd = RunDir(run_dir)
    ledger = rd.ledger()
    verdict = rd.verdict()
    t = ledger["t"]
    min_pp = ledger["min_P_plus"]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        neg = min_pp < 0
        if np.any(neg):
            ax.plot(t[neg], -1.0 / min_pp[neg], ".", ms=3, color="#1f77b4",
                    label="-1 / min P+")
        if verdict.get("mode") == "P_plus_blowup":
            slope = float(verdict["slope_fit"])
            t_bu = float(verdict["t_blowup_extrapolated"])
            line_t = np.linspace(float(t[0]), t_bu, 100)
            ax.plot(line_t, slope * (t_bu - line_t), "-", color="#d62728",
                    label=f"fit: slope {slope:.4f}")
            ax.axvline(t_bu, color="#d62728", ls=":", lw=0.8)
            ax.annotate(f"slope = {slope:.4f}\nt_blowup = {t_bu:.4f}",
                        xy=(0.05, 0.05), xycoords="axes fraction")
        else:
            ax.annotate("no blow-up", xy=(0.5, 0.5), xycoords="axes fraction",
                        ha="center", fontsize=14, color="#555555")
        ax.set_xlabel("t")
        ax.set_ylabel("-1 / min P+")
        ax.set_title(f"Riccati trend ({verdict.get('mode', 'unknown')})")
        ax.legend(loc="upper right", fontsize=7)
        return _save(fig, Path(out_path))


def plot_profile(run_dir: str | Path, out_path: str | Path) -> Path:
    """Log-log |P+| against |x - x0| with the fitted line and reference slopes."""
    rd = RunDir(run_dir)
    out_path = Path(out_path)
    if not rd.has_profile() or rd.verdict().get("mode") != "P_plus_blowup":
        with plt.rc_context(_STYLE):
            fig, ax = plt.subplots(figsize=(5, 3.5))
            ax.annotate("no blow-up detected\n(no profile to fit)",
                        xy=(0.5, 0.5), xycoords="axes fraction",
                        ha="center", fontsize=13, color="#555555")
            ax.set_xticks([])
            ax.set_yticks([])
            return _save(fig, out_path)
    profile = rd.profile()
    exponent = float(profile["exponent"])
    slope = float(profile["slope"])
    b_fit = float(profile["b_fit"])
    x0 = float(profile["x0"])
    t_fit = float(profile["t_fit"])
    lo, hi = (float(v) for v in profile["window"])
    snap = rd.snapshot_nearest(t_fit)
    r = np.abs(snap["x"] - x0)
    mask = (r > 0) & (np.abs(snap["P_plus"]) > 0)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.loglog(r[mask], np.abs(snap["P_plus"][mask]), ".", ms=3,
                  color="#1f77b4", label="|P+| samples")
        line_r = np.geomspace(max(lo, 1e-300), hi, 50)
        ax.loglog(line_r, b_fit * abs(exponent) * line_r ** slope, "-",
                  color="#d62728", label=f"fit: exponent {exponent:.3f}")
        mid = np.sqrt(lo * hi)
        anchor = b_fit * abs(exponent) * mid ** slope
        for ref, style in ((-2.0 / 5.0, "--"), (-2.0 / 3.0, ":")):
            ax.loglog(line_r, anchor * (line_r / mid) ** ref, style,
                      color="#2ca02c", lw=0.9, label=f"reference slope {ref:.3f}")
        ax.annotate(f"exponent = {exponent:.4f}\nr$^2$ = {float(profile['r_squared']):.4f}",
                    xy=(0.05, 0.05), xycoords="axes fraction")
        ax.set_xlabel("|x - x0|")
        ax.set_ylabel("|P+|")
        ax.set_title(f"blow-up profile at t = {t_fit:.4f}")
        ax.legend(loc="upper right", fontsize=7)
        return _save(fig, out_path)


def plot_ledger(run_dir: str | Path, out_path: str | Path) -> Path:
    """Multi-panel time series: energy drift, M(t) and min P+, min h, ||Q||."""
    rd = RunDir(run_dir)
    ledger = rd.ledger()
    t = ledger["t"]
    eps = float(rd.config["params"]["epsilon"])
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(4, 1, figsize=(6, 8), sharex=True)
        axes[0].plot(t, ledger["conservation_residual"], color="#1f77b4")
        axes[0].set_ylabel("energy drift")
        axes[1].plot(t, ledger["M_t"], color="#2ca02c", label="M(t)")
        axes[1].plot(t, ledger["min_P_plus"], color="#1f77b4", label="min P+")
        axes[1].set_ylabel("slopes")
        axes[1].legend(loc="lower left", fontsize=7)
        axes[2].plot(t, ledger["min_h"], color="#1f77b4")
        axes[2].set_ylabel("min h")
        axes[3].plot(t, ledger["Q_inf_norm"], color="#1f77b4", label="||Q||")
        if eps > 0 and len(t) > 0:
            bound = (
                16.0 / eps**1.5
                * (float(np.max(ledger["max_h"])) ** 2
                   / float(np.min(ledger["min_h"])) ** 6)
                * float(ledger["E_star"][0])
            )
            axes[3].axhline(bound, color="#d62728", ls="--",
                            label=f"energy bound {bound:.3g}")
        axes[3].set_ylabel("||Q||")
        axes[3].set_xlabel("t")
        axes[3].legend(loc="upper left", fontsize=7)
        fig.align_ylabels(axes)
        return _save(fig, Path(out_path))
