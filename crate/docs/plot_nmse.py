"""Plot CSV output of `jointcsit iters` or `jointcsit sweep-t`.

Usage:
    python docs/plot_nmse.py iters.csv  [out.png]
    python docs/plot_nmse.py sweep.csv  [out.png]
"""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt


def main(path, out=None):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        sys.exit("empty CSV")
    if "iteration" in rows[0]:
        x_key, y_key, x_label = "iteration", "mean_nmse", "iteration"
    else:
        x_key, y_key, x_label = "T", "mean_final_nmse", "channel uses T"

    curves = defaultdict(lambda: ([], []))
    for r in rows:
        xs, ys = curves[r["method"]]
        xs.append(int(r[x_key]))
        ys.append(float(r[y_key]))

    fig, ax = plt.subplots(figsize=(6, 4))
    for method, (xs, ys) in curves.items():
        ax.semilogy(xs, ys, label=method, marker=None if x_key == "iteration" else "o")
    ax.set_xlabel(x_label)
    ax.set_ylabel("NMSE")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    if out:
        fig.savefig(out, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2] if len(sys.argv) > 2 else None)
