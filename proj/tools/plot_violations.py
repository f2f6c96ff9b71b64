"""Bar chart of per-limit violation fractions from `hostcap validate --out-csv`."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv")
    parser.add_argument("--out", default="violations.png")
    args = parser.parse_args()

    table = pd.read_csv(args.csv)
    labels = [f"{kind} {index}" for kind, index in zip(table["constraint"], table["index"])]
    colors = ["tab:blue" if ok else "tab:red" for ok in table["within"].astype(bool)]

    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(table)), 4))
    ax.bar(range(len(table)), table["fraction"], color=colors)
    ax.step(range(len(table)), table["bound"], where="mid", color="black", linewidth=1, label="bound")
    ax.set_xticks(range(len(table)))
    ax.set_xticklabels(labels, rotation=90, fontsize=7)
    ax.set_ylabel("fraction of scenarios")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
