"""Figures written next to the lab's TSV/JSON reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import binary_entropy


def _save(fig, path):
    fig.tight_layout()
    # no timestamp in PNG metadata so reruns give identical files
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_gamma(path, mark=None):
    deltas = np.linspace(0, 1, 401)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(deltas, [1 - binary_entropy((1 - d) / 2) for d in deltas], color="k")
    if mark is not None:
        ax.plot([mark[0]], [mark[1]], "o", color="tab:red")
        ax.annotate(f"{mark[1]:.6f}", mark, textcoords="offset points", xytext=(6, -12))
    ax.set_xlabel(r"rate $\delta$")
    ax.set_ylabel(r"$\gamma(\delta)$")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    _save(fig, path)


def plot_bounds(rows, path):
    """rows: dicts with n, delta, relative_gap."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for delta in sorted({r["delta"] for r in rows}):
        pts = sorted((r["n"], r["relative_gap"]) for r in rows if r["delta"] == delta)
        ax.plot(*zip(*pts), "o-", label=rf"$\delta$={delta}")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("relative gap (bits / $2^n$)")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_complexity(rows, path):
    """rows: ExperimentRow-like tuples (n, kind, seed, table_bytes, proxy)."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    styles = {"random": ("tab:blue", "o"), "structured": ("tab:orange", "s")}
    for kind, (color, marker) in styles.items():
        pts = [(r.n, r.proxy) for r in rows if r.kind == kind]
        if pts:
            ax.scatter(*zip(*pts), color=color, marker=marker, label=kind, s=18)
    random_rows = [r for r in rows if r.kind == "random"]
    if random_rows:
        n0 = min(r.n for r in random_rows)
        base = np.mean([r.proxy for r in random_rows if r.n == n0])
        ns = sorted({r.n for r in random_rows})
        ax.plot(ns, [base * 2.0 ** (n - n0) for n in ns], ":", color="grey", label=r"$\propto 2^n$")
    ax.set_yscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel("compressed decode table (bytes, proxy)")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_rates(rows, entropy, path):
    """rows: (block_len, rate) pairs."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ls, rates = zip(*rows)
    ax.plot(ls, rates, "o-", color="k", label="block codec")
    ax.axhline(entropy, color="tab:red", ls="--", label="entropy")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("block length")
    ax.set_ylabel("bits per letter")
    ax.legend(frameon=False)
    _save(fig, path)
