"""Mean new infections against mobility from an aggregate.csv."""
import sys

import matplotlib.pyplot as plt
import pandas as pd

df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "results/fig8/aggregate.csv")
pops = sorted(df.n.unique())
alphas = sorted(df.alpha.unique())
fig, axes = plt.subplots(len(alphas), len(pops), figsize=(4 * len(pops), 3 * len(alphas)), sharex=True)
for i, alpha in enumerate(alphas):
    for j, n in enumerate(pops):
        ax = axes[i][j]
        for p, g in df[(df.alpha == alpha) & (df.n == n)].groupby("patch_contamination_prob"):
            ax.plot(g.mu, g.mean_new_infections, marker="o", label=f"p={p}")
        ax.set_title(f"n={n}, alpha={alpha}")
        ax.set_xlabel("mobility")
        ax.set_ylabel("mean new infections")
axes[0][0].legend()
fig.tight_layout()
fig.savefig("fig8.png", dpi=150)
