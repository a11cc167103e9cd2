#!/usr/bin/env python3
"""Plot the CSVs written by `latsched bench-runtime` and `latsched bench-rho`."""
import argparse
import csv
from collections import defaultdict
from statistics import mean

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def rows(path):
    with open(path, newline="") as f:
        return [r for r in csv.DictReader(f) if not r["error"]]


def plot_runtime(path, out):
    cells = defaultdict(list)
    for r in rows(path):
        cells[(float(r["density"]), int(r["n"]))].append(float(r["runtime_us"]))
    fig, ax = plt.subplots()
    for d in sorted({d for d, _ in cells}):
        ns = sorted(n for dd, n in cells if dd == d)
        ax.plot(ns, [mean(cells[(d, n)]) for n in ns], marker="o", label=f"density {d}")
    ax.set_xlabel("tasks")
    ax.set_ylabel("mean analysis time (us)")
    ax.legend()
    fig.savefig(out, bbox_inches="tight")


def plot_rho(path, out):
    by_procs = defaultdict(list)
    for r in rows(path):
        key = "m" if r["at_m"] == "true" else r["procs"]
        by_procs[key] += [float(r["rho1"]), float(r["rho2"])]
    keys = sorted(by_procs, key=lambda k: (k != "m", -int(k) if k != "m" else 0))
    fig, ax = plt.subplots()
    ax.boxplot([by_procs[k] for k in keys])
    ax.set_xticks(range(1, len(keys) + 1), [f"{k} procs" if k != "m" else "m procs" for k in keys])
    ax.set_ylabel("optimum / lower bound")
    fig.savefig(out, bbox_inches="tight")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--runtime", help="bench-runtime CSV")
    p.add_argument("--rho", help="bench-rho CSV")
    p.add_argument("--prefix", default="bench")
    args = p.parse_args()
    if args.runtime:
        plot_runtime(args.runtime, f"{args.prefix}_runtime.png")
    if args.rho:
        plot_rho(args.rho, f"{args.prefix}_rho.png")


if __name__ == "__main__":
    main()
