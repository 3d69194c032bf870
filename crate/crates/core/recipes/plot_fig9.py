"""Histogram grid (rows: alpha, columns: mobility) from histogram_*.csv files."""
import pathlib
import re
import sys

import matplotlib.pyplot as plt
import pandas as pd

root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "results/fig9")
pattern = re.compile(r"histogram_mu(?P<mu>[^_]+)_n(?P<n>\d+)_alpha(?P<alpha>\d+)_p(?P<p>.+)\.csv")
runs = []
for path in root.glob("histogram_*.csv"):
    m = pattern.fullmatch(path.name)
    if m:
        runs.append((float(m["mu"]), int(m["n"]), int(m["alpha"]), pd.read_csv(path)))
mus = sorted({r[0] for r in runs})
alphas = sorted({r[2] for r in runs})
fig, axes = plt.subplots(len(alphas), len(mus), figsize=(3.5 * len(mus), 2.8 * len(alphas)), squeeze=False)
style = {30: ("red", "-"), 70: ("blue", "--")}
for mu, n, alpha, h in runs:
    ax = axes[alphas.index(alpha)][mus.index(mu)]
    color, ls = style.get(n, ("black", ":"))
    ax.plot(h["count"], h["occurrences"], color=color, linestyle=ls, label=f"n={n}")
    ax.set_title(f"alpha={alpha}, mu={mu}")
axes[0][0].legend()
fig.tight_layout()
fig.savefig("fig9.png", dpi=150)
