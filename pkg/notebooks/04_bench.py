"""
Accuracy table and the anchor-count sweep
=========================================

Reruns the three small synthetic rows (five seeds each) and the sweep over
r = 2, 10 and 30 at m = 20. The solver settings are identical across every
row; only the data changes. Set PROXNMF_JOBS to use several processes, and
pass ``medium`` on the command line for the slower rows.
"""
import sys

from proxnmf.bench import default_jobs, format_table, run_bench, select_rows

rows = select_rows(sys.argv[1] if len(sys.argv) > 1 else "small,rsweep")
result = run_bench(rows, seeds=5, jobs=default_jobs())
print(format_table(result), end="")

# per-seed detail for the sweep
for cell in result["cells"]:
    if cell["row"].startswith("rsweep"):
        print(cell["row"], "seed", cell["seed"], "found", cell["found"],
              "iters", cell["iterations"])
