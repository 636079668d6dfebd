"""Figure rendering for sweep and reproduction outputs.

Every report CSV gets a companion PNG next to it; the CSV stays the
primary data product.  Uses the Agg backend so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = [
    "plot_capacity_curves",
    "plot_mse_curves",
    "plot_ber_curves",
    "plot_reference_comparison",
]

_KIND_STYLE = {
    "island": dict(color="tab:blue", marker="o"),
    "doppler_slab": dict(color="tab:orange", marker="s"),
    "delay_slab": dict(color="tab:green", marker="^"),
}


def _style(kind: str) -> dict:
    return _KIND_STYLE.get(kind, dict(color="tab:gray", marker="."))


def plot_capacity_curves(rows: list[dict], path: str, title: str = "") -> None:
    """Capacity lower bound vs power split, one curve per allocation kind."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    kinds = sorted({r["kind"] for r in rows})
    for kind in kinds:
        pts = sorted((r for r in rows if r["kind"] == kind), key=lambda r: r["alpha"])
        a = [r["alpha"] for r in pts]
        c = [r["cap_lb_mean_bps_hz"] for r in pts]
        e = [r["cap_lb_stderr"] for r in pts]
        st = _style(kind)
        ax.errorbar(a, c, yerr=e, label=kind, ms=4, lw=1.3, capsize=2, **st)
        star = pts[0].get("alpha_star")
        if star not in (None, ""):
            ax.axvline(float(star), color=st["color"], ls=":", lw=1.0)
    ax.set_xlabel(r"power split $\alpha$ (data share)")
    ax.set_ylabel("capacity lower bound [bits/s/Hz]")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_mse_curves(rows: list[dict], path: str, title: str = "") -> None:
    """Tap-estimation MSE vs frame SNR: closed form (lines) and empirical (marks)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for kind in sorted({r["kind"] for r in rows}):
        pts = sorted((r for r in rows if r["kind"] == kind),
                     key=lambda r: r["snr_tx_db"])
        snr = [r["snr_tx_db"] for r in pts]
        st = _style(kind)
        ax.semilogy(snr, [r["mse_closed"] for r in pts], color=st["color"],
                    lw=1.3, label=f"{kind} (closed form)")
        ax.semilogy(snr, [r["mse_empirical"] for r in pts], ls="none",
                    marker=st["marker"], color=st["color"], ms=5,
                    label=f"{kind} (empirical)")
    ax.set_xlabel("frame SNR [dB]")
    ax.set_ylabel("channel tap MSE")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_ber_curves(rows: list[dict], path: str, x_key: str = "alpha",
                    title: str = "") -> None:
    """BER with confidence band vs the swept variable."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    floor = 1e-7  # keeps zero-error points on the log axis
    for kind in sorted({r["kind"] for r in rows}):
        pts = sorted((r for r in rows if r["kind"] == kind), key=lambda r: r[x_key])
        x = [r[x_key] for r in pts]
        b = [max(r["ber"], floor) for r in pts]
        lo = [max(r["ci_low"], floor) for r in pts]
        hi = [max(r["ci_high"], floor) for r in pts]
        st = _style(kind)
        ax.semilogy(x, b, marker=st["marker"], color=st["color"], lw=1.3, label=kind)
        ax.fill_between(x, lo, hi, color=st["color"], alpha=0.2)
    ax.set_xlabel(x_key)
    ax.set_ylabel("bit error rate")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_reference_comparison(rows: list[dict], path: str, title: str = "") -> None:
    """Computed vs reference values with tolerance-sized error bars."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    labels = [r["quantity"] for r in rows]
    computed = [r["computed"] for r in rows]
    reference = [r["reference"] for r in rows]
    tol = [r["tol"] for r in rows]
    pos = range(len(rows))
    ax.errorbar(pos, reference, yerr=tol, fmt="_", color="tab:gray", ms=14,
                capsize=4, label="reference ± tol")
    ok = [r["passed"] for r in rows]
    ax.scatter(pos, computed, c=["tab:green" if p else "tab:red" for p in ok],
               zorder=3, s=18, label="computed")
    ax.set_xticks(list(pos))
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
