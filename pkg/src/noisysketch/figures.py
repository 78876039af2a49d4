"""Matplotlib rendering of experiment reports.

One PNG per report, written next to the delimited outputs.  Figures are
rendered on the Agg backend with fixed metadata so repeated runs of the
same experiment produce identical bytes.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_PNG_METADATA = {"Software": "noisysketch"}
_POINT_STYLE = dict(s=10, color="tab:blue", alpha=0.7, linewidths=0)


def _scatter_trials(ax, report, ys, ylabel):
    ax.scatter([r.trial_index for r in report.records], ys, **_POINT_STYLE)
    ax.set_xlabel("trial")
    ax.set_ylabel(ylabel)


def _render_distortion(ax, report):
    name = report.config["name"]
    _scatter_trials(ax, report, [r.distortion for r in report.records],
                    "squared-norm ratio")
    if name in ("fig1", "fig2"):
        ax.axhline(report.comparators["expected_mean"], color="tab:red", lw=1,
                   label=f"expected {report.comparators['expected_mean']:.3g}")
    else:
        ax.axhline(report.comparators["band_lo"], color="tab:red", lw=1, ls="--",
                   label="acceptance band")
        ax.axhline(report.comparators["band_hi"], color="tab:red", lw=1, ls="--")
    rate = report.aggregates.get("success_rate")
    title = f"{name}: mean={report.aggregates['mean']:.3f}"
    if rate is not None:
        title += f", success={rate:.3f}"
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)


def _render_appendix(ax, report):
    xs = [math.sqrt(math.log(n) / n) for n in report.config["grid_n"]]
    ys = [r.nu_noisy for r in report.records]
    ax.loglog(xs, ys, "o", color="tab:blue", ms=4)
    slope = report.aggregates["slope"]
    # fitted power law through the data midpoint
    logx = [math.log(x) for x in xs]
    logy = [math.log(y) for y in ys]
    x0 = sum(logx) / len(logx)
    y0 = sum(logy) / len(logy)
    fit = [math.exp(y0 + slope * (lx - x0)) for lx in logx]
    ax.loglog(xs, fit, color="tab:red", lw=1, label=f"slope {slope:.3f}")
    ax.set_xlabel("sqrt(log(n)/n)")
    ax.set_ylabel("non-uniformity of corrupted signal")
    ax.set_title(f"appendix_nu: slope={slope:.3f}")
    ax.legend(loc="best", fontsize=8)


def _render_coverage(ax, report):
    name = report.config["name"]
    if name == "interval_coverage":
        _scatter_trials(ax, report, [r.noisy_norm_sq for r in report.records],
                        "corrupted squared norm")
        ax.axhline(report.comparators["interval_lo"], color="tab:red", lw=1, ls="--",
                   label="interval")
        ax.axhline(report.comparators["interval_hi"], color="tab:red", lw=1, ls="--")
    else:
        _scatter_trials(ax, report, [r.nu_noisy for r in report.records],
                        "corrupted non-uniformity")
        ax.axhline(report.comparators["nu_bound"], color="tab:red", lw=1, ls="--",
                   label="bound")
    ax.set_title(
        f"{name}: coverage={report.aggregates['success_rate']:.4f} "
        f"(bound {report.comparators['coverage_lower_bound']:.4f})"
    )
    ax.legend(loc="best", fontsize=8)


def render_report(report, path) -> str:
    """Render the report's figure to ``path`` (PNG); returns the path."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    name = report.config["name"]
    if name == "appendix_nu":
        _render_appendix(ax, report)
    elif name in ("interval_coverage", "nu_coverage"):
        _render_coverage(ax, report)
    else:
        _render_distortion(ax, report)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_METADATA)
    plt.close(fig)
    return path
