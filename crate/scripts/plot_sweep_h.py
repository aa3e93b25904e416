"""Plot V<H_ki> against h from a sweep-h or sweep-3d results CSV.

usage: python scripts/plot_sweep_h.py reference.csv [out.png]
"""
import sys

import matplotlib.pyplot as plt
import pandas as pd


def main():
    df = pd.read_csv(sys.argv[1])
    out = sys.argv[2] if len(sys.argv) > 2 else "sweep_h.png"
    fig, axes = plt.subplots(1, df["alpha"].nunique(), figsize=(11, 4), squeeze=False, sharey=True)
    for ax, (alpha, group) in zip(axes[0], df.groupby("alpha")):
        for c, curve in group.groupby("C"):
            ax.plot(curve["h"], curve["analytic_total"], label=f"C = {c}")
            if curve["mc_mean"].notna().any():
                ax.errorbar(curve["h"], curve["mc_mean"], yerr=curve["mc_stderr"], fmt="k.", ms=3)
        ax.set_xscale("log")
        ax.set_title(f"alpha = {alpha}")
        ax.set_xlabel("h")
        ax.legend()
    axes[0][0].set_ylabel("V<H_ki>")
    fig.tight_layout()
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    main()
