"""
Cross-checking against brute force
==================================

On small problems the anchors can be found exhaustively: a column is an
extreme ray of the data cone iff it is not a non-negative combination of
the others. Each test is one NNLS problem. Here we compare the solver with
that enumeration on a few random instances, including ones with more
anchors than rows.
"""
import numpy as np

from proxnmf import generate_instance, run_solver
from proxnmf.oracle import brute_force_extreme_rays, nnls

# a single NNLS problem: is column 20 inside the cone of the first 15?
inst = generate_instance(12, 30, 15, "c3", seed=0)
w, res = nnls(inst.Xn[:, :15], inst.Xn[:, 20])
print("column 20: residual %.1e, %d rays used" % (res, np.count_nonzero(w > 1e-12)))

for m, n, r, regime in [(15, 10, 4, "c1"), (8, 20, 5, "c2"), (6, 25, 9, "c3")]:
    inst = generate_instance(m, n, r, regime, seed=1)
    brute = brute_force_extreme_rays(inst.Xn)
    found = run_solver(inst.Xn).anchors
    print(f"{m:2d}x{n:2d} r={r} {regime}: oracle {brute.tolist()}")
    print(f"{'':13s} solver {found.tolist()}  match={np.array_equal(brute, found)}")
