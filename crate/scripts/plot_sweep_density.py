"""Plot P(all external nodes connected) against density from a
sweep-density results CSV.

usage: python scripts/plot_sweep_density.py five_holes.csv [out.png]
"""
import sys

import matplotlib.pyplot as plt
import pandas as pd


def main():
    df = pd.read_csv(sys.argv[1])
    out = sys.argv[2] if len(sys.argv) > 2 else "sweep_density.png"
    fig, ax = plt.subplots(figsize=(6, 4))
    for (alpha, c), curve in df.groupby(["alpha", "C"]):
        ax.plot(curve["rho"], curve["analytic_total"], label=f"alpha = {alpha}, C = {c}")
    mc = df[df["C"] == df["C"].max()]
    if mc["mc_mean"].notna().any():
        ax.errorbar(mc["rho"], mc["mc_mean"], yerr=mc["mc_stderr"], fmt="k.", ms=3, label="Monte Carlo")
    ax.set_xlabel("rho")
    ax.set_ylabel("P(all external nodes connected)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    main()
