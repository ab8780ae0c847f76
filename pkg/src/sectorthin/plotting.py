"""Stand-alone matplotlib scripts written next to the data they plot."""

CUTS_SCRIPT = '''\
"""Overlay of the thinned and tapered pattern cuts in this directory."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent


def load(name):
    with open(here / name, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["angle_deg"]) for r in rows], [float(r["magnitude_db"]) for r in rows]


fig, ax = plt.subplots(figsize=(8, 4.5))
for name, label, style in (("cut_thinned.csv", "Thinned", "-"),
                           ("cut_tapered.csv", "Tapered", "--")):
    if (here / name).exists():
        ax.plot(*load(name), style, label=label, lw=1)
ax.set_xlabel("theta (deg)")
ax.set_ylabel("normalized pattern (dB)")
ax.set_ylim(-60, 2)
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(here / "cuts.png", dpi=150)
'''

SWEEP_SCRIPT = '''\
"""Sidelobe level and half-power beamwidth against element count."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
with open(here / "summary.csv", newline="") as fh:
    rows = [r for r in csv.DictReader(fh) if r["status"] == "ok"]

n = [int(r["n_total"]) for r in rows]
sll = [float(r["sll_db"]) for r in rows]
hpbw = [float(r["hpbw_deg"]) for r in rows]

fig, ax1 = plt.subplots(figsize=(7, 4.5))
ax1.plot(n, sll, "o-", color="tab:blue")
ax1.set_xlabel("number of elements N")
ax1.set_ylabel("SLL (dB)", color="tab:blue")
ax2 = ax1.twinx()
ax2.plot(n, hpbw, "s--", color="tab:red")
ax2.set_ylabel("HPBW (deg)", color="tab:red")
ax1.grid(True, alpha=0.3)
fig.tight_layout()
fig.savefig(here / "sweep.png", dpi=150)
'''
