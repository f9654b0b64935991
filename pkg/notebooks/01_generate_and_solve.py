"""
Finding anchor columns without knowing how many there are
=========================================================

A separable matrix has a handful of columns (the anchors) that generate
all the others as non-negative combinations. This script draws one such
matrix, hands it to the solver with no hint about the anchor count, and
checks what comes back.
"""
import numpy as np

from proxnmf import SolverConfig, denormalize, generate_instance, run_solver
from proxnmf.oracle import reconstruction_residual

# 25 x 100 with 15 planted anchors; columns 0..14 are the anchors
inst = generate_instance(25, 100, 15, "c2", seed=3)
print("data", inst.X_orig.shape, "planted anchors", inst.true_anchors.size)

# the solver works on the column-normalized matrix
res = run_solver(inst.Xn, SolverConfig(epsilon=1e-5))
print("converged", res.converged, "after", res.iterations, "iterations")
print("found", res.anchors.size, "anchors:", res.anchors.tolist())
print("same as planted:", np.array_equal(res.anchors, inst.true_anchors))

# the diagonal of C is the certificate: ones on anchors, zeros elsewhere
d = res.diag_values
print("diag on anchors  min %.4f" % d[res.anchors].min())
print("diag off anchors max %.4f" % np.delete(d, res.anchors).max())
print("gap", round(res.diag_gap, 4))

# weights live on the normalized scale; map back to the raw columns
W = denormalize(res.anchors, res.W, inst.scales)
print("relative reconstruction error %.1e"
      % reconstruction_residual(inst.X_orig, res.anchors, W))

# the price vector is arbitrary; another seed gives the same anchors
other = run_solver(inst.Xn, SolverConfig(epsilon=1e-5, seed=11))
print("anchors with another price vector agree:",
      np.array_equal(other.anchors, res.anchors))
