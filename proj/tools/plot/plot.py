#!/usr/bin/env python3
"""Plots the CSV tables written by `hetq`. Usage: plot.py TABLE.csv [OUT.png]"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

LAYOUTS = {
    "ql_sweep": ("eps", ["QL_lisf", "QL_fsf"], "QL(eps)"),
    "density": ("x", ["pdf"], "density"),
    "cost_curve": ("x", ["cost"], "cost"),
    "coupled": ("t", ["D_hom", "D_het"], "departures"),
    "fairness": ("bin_lo", ["eta_hat", "eta_theory"], "idle share"),
}


def main(argv):
    if len(argv) < 2:
        print(__doc__)
        return 2
    table = pd.read_csv(argv[1])
    out = argv[2] if len(argv) > 2 else argv[1].rsplit(".", 1)[0] + ".png"
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, (x, ys, label) in LAYOUTS.items():
        if set([x, *ys]) <= set(table.columns):
            for y in ys:
                ax.plot(table[x], table[y], label=y, drawstyle="steps-post" if name == "fairness" else "default")
            ax.set_xlabel(x)
            ax.set_ylabel(label)
            break
    else:
        if "ratio" in table.columns:
            table.boxplot(column="ratio", by="r", ax=ax)
        else:
            x = table.columns[0]
            for y in table.columns[1:]:
                ax.plot(table[x], table[y], label=y)
            ax.set_xlabel(x)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
