"""Figure rendering for scan and verification outputs.

Each renderer takes the already-computed records and writes a PNG next
to the delimited output; nothing here feeds back into the numerics.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = [
    "render_rate_figure",
    "render_gamma_figure",
    "render_mc_figure",
]


def _group_by_misalignment(points):
    groups = {}
    for point in points:
        groups.setdefault(point.e_d, []).append(point)
    return sorted(groups.items())


def render_rate_figure(points, out_path, title):
    """Log-scale rate versus distance, one line per misalignment value;
    baselines, when present, are dashed."""
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for e_d, group in _group_by_misalignment(points):
        xs = [p.distance_km for p in group if p.feasible]
        ys = [p.result.rate for p in group if p.feasible]
        if not xs:
            continue
        line, = ax.plot(xs, ys, marker="o", markersize=3,
                        label=f"$e_d$ = {e_d:g}")
        base = [(p.distance_km, p.baseline.rate) for p in group
                if p.baseline is not None]
        if base:
            ax.plot(*zip(*base), linestyle="--", color=line.get_color(),
                    alpha=0.7, label=f"$e_d$ = {e_d:g} (no pairing)")
    ax.set_yscale("log")
    ax.set_xlabel("distance (km)")
    ax.set_ylabel("signature rate (per pulse)")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_gamma_figure(points, out_path, title):
    """Improvement ratio versus distance per misalignment value."""
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for e_d, group in _group_by_misalignment(points):
        xy = [(p.distance_km, p.gamma) for p in group
              if p.gamma is not None]
        if xy:
            ax.plot(*zip(*xy), marker="o", markersize=3,
                    label=f"$e_d$ = {e_d:g}")
    ax.set_xlabel("distance (km)")
    ax.set_ylabel("rate improvement $\\gamma$")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_mc_figure(records, out_path, title):
    """Empirical versus analytic iteration statistics with 3-sigma bars.

    ``records`` are dicts with keys setting, quantity, empirical,
    analytic and sigma.
    """
    fig, ax = plt.subplots(figsize=(8.0, 5.0))
    labels = []
    for idx, rec in enumerate(records):
        labels.append(f"{rec['quantity']}\n#{rec['setting']}")
        ax.errorbar(idx, rec["empirical"], yerr=3.0 * rec["sigma"],
                    fmt="o", color="tab:blue", capsize=3)
        ax.plot(idx, rec["analytic"], marker="_", markersize=14,
                color="tab:red")
    ax.set_xticks(range(len(records)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("value")
    ax.set_title(title + "  (dots: empirical ±3σ, dashes: analytic)")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)