"""An arborescence: a growing grid, each stage collapsing onto the one before.

Stage k is the [0,k] x [0,k] corner of a 6x6 grid.  For every k we certify
that stage k collapses onto stage k-1, and record how much work the
certificate took.  The work grows linearly with the number of faces added.
"""
import numpy as np

from arborescence import grid_filtration

filt = grid_filtration(6)
print(f"all stages certified: {bool(filt.verify())}\n")
print(f"{'stage':>5} {'faces':>6} {'added':>6} {'steps':>6} {'ops':>5}")
for s in filt.stats:
    print(f"{s['stage']:>5} {s['faces']:>6} {s['added']:>6} {s['steps']:>6} {s['ops']:>5}")
added = [s["added"] for s in filt.stats]
ops = [s["ops"] for s in filt.stats]
slope = np.polyfit(np.log(added), np.log(ops), 1)[0]
print(f"\nlog-log slope of work against added faces: {slope:.2f}")
