"""Sweep cell width and train speed across all five schemes.

Runs the harness programmatically (the CLI wraps the same calls), writes
the versioned CSV, reshapes it into per-figure series files, and plots
the energy-vs-cell-width comparison when matplotlib is available.
"""

import numpy as np

from railpower import reference_config
from railpower.configio import HarnessOptions
from railpower.harness import SweepSpec, emit_plot_data, sweep, write_csv

cfg = reference_config()
options = HarnessOptions()

rows = sweep(cfg, options, SweepSpec(param="d_l",
                                     values=(140, 160, 180, 200, 220, 240)))
rows += sweep(cfg, options, SweepSpec(param="v",
                                      values=(250, 270, 290, 310, 330, 350)))
write_csv(rows, "sweeps.csv")
print("wrote sweeps.csv")

print("\nenergy [J] vs cell width:")
print(f"{'d_l [m]':>8}" + "".join(f"{s:>11}" for s in
                                  ("constant", "random", "average", "csi",
                                   "optimized")))
for value in (140, 160, 180, 200, 220, 240):
    cells = [f"{value:>8}"]
    for scheme in ("constant", "random", "average", "csi", "optimized"):
        r = next(r for r in rows
                 if r.kind == "mean" and r.param == "d_l"
                 and r.value == value and r.scheme == scheme)
        cells.append(f"{r.energy_j:>11.2f}")
    print("".join(cells))

for figure in ("E-vs-dl", "EE-vs-dl", "E-vs-v", "EE-vs-v"):
    for path in emit_plot_data("sweeps.csv", figure, "plot_data"):
        print(f"wrote {path}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = np.loadtxt("plot_data/E-vs-dl.dat")
    names = open("plot_data/E-vs-dl.dat").readline().lstrip("# ").split()[1:]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for col, name in enumerate(names, start=1):
        ax.plot(data[:, 0], data[:, col], marker="o", label=name)
    ax.set_xlabel("cell width [m]")
    ax.set_ylabel("energy [J]")
    ax.set_title("Traversal energy vs cell width")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig("energy_vs_dl.png", dpi=150)
    print("wrote energy_vs_dl.png")
except ImportError:
    print("matplotlib not available, skipping the plot")
