"""Render the CSV output of ``fit-kernel`` and ``simulate`` as figures.

Usage:
    python scripts/plot_figures.py out/nonmonotone_fits out/shared_driver [--save figures/]
"""

import argparse
import glob
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def read(path: str) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", na_values=["NA"])


def plot_kernels(fit_dir: str, ax) -> None:
    curves = read(os.path.join(fit_dir, "kernel_curves.csv"))
    ax.plot(curves["t"], curves["phi"], color="black", label="phi")
    for column in [c for c in curves.columns if c.startswith("phi_n")]:
        ax.plot(curves["t"], curves[column], linestyle="--", label=column.replace("phi_", ""))
    ax.axhline(0.0, color="grey", linewidth=0.5)
    ax.set_xlabel("t")
    ax.legend()


def plot_paths(sim_dir: str, ax_x, ax_lambda) -> None:
    points = read(os.path.join(sim_dir, "poisson_points.csv"))
    ax_lambda.scatter(points["t"], points["theta"], s=2, color="grey", alpha=0.4, label="candidates")
    for path_file in sorted(glob.glob(os.path.join(sim_dir, "path_*.csv"))):
        label = os.path.basename(path_file)[len("path_"):-len(".csv")]
        path = read(path_file)
        ax_x.step(path["t"], path["x"], where="post", label=label)
        ax_lambda.step(path["t"], path["lambda"], where="post", label=label)
    ax_x.set_ylabel("X")
    ax_lambda.set_ylabel("lambda")
    ax_lambda.set_xlabel("t")
    ax_x.legend()


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("fit_dir")
    parser.add_argument("sim_dir")
    parser.add_argument("--save", default="figures")
    args = parser.parse_args()
    os.makedirs(args.save, exist_ok=True)

    fig, ax = plt.subplots(figsize=(7, 4))
    plot_kernels(args.fit_dir, ax)
    fig.savefig(os.path.join(args.save, "kernels.png"), dpi=150, bbox_inches="tight")

    fig, (ax_x, ax_lambda) = plt.subplots(2, 1, sharex=True, figsize=(9, 6))
    plot_paths(args.sim_dir, ax_x, ax_lambda)
    fig.savefig(os.path.join(args.save, "paths.png"), dpi=150, bbox_inches="tight")


if __name__ == "__main__":
    main()
