"""Plot the CSV written by `driftbias surface`.

    driftbias surface --sigma 0.3 --T 1 > surface.csv
    python3 scripts/plot_surface.py surface.csv surface.png
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main(src, dst):
    df = pd.read_csv(src)
    df = df[df["flag"] == "ok"]
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    for ax, column in zip(axes, ["expectation", "bias"]):
        grid = df.pivot(index="C", columns="mu", values=column)
        mesh = ax.pcolormesh(grid.columns, grid.index, grid.values, shading="auto")
        fig.colorbar(mesh, ax=ax)
        ax.set_xlabel("mu")
        ax.set_ylabel("C")
        ax.set_title(column)
    fig.tight_layout()
    fig.savefig(dst, dpi=120)


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit("usage: plot_surface.py <surface.csv> <out.png>")
    main(sys.argv[1], sys.argv[2])
