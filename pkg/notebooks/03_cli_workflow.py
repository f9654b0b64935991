"""
The command line round trip
===========================

generate -> factorize -> verify, driven from Python through ``main`` so
the script runs anywhere the package is installed. The same steps from a
shell are::

    proxnmf generate --m 100 --n 75 --r 25 --seed 4 --out inst
    proxnmf factorize inst/X.csv --meta inst/meta.json --out run
    proxnmf verify inst/X.csv run/report.json --meta inst/meta.json
"""
import json
import os
import tempfile

from proxnmf.cli import main

work = tempfile.mkdtemp(prefix="proxnmf-")
inst, run = os.path.join(work, "inst"), os.path.join(work, "run")

main(["generate", "--m", "100", "--n", "75", "--r", "25", "--seed", "4", "--out", inst])
print(sorted(os.listdir(inst)))

code = main(["factorize", os.path.join(inst, "X.csv"),
             "--meta", os.path.join(inst, "meta.json"), "--out", run])
print("factorize exit code", code, sorted(os.listdir(run)))

with open(os.path.join(run, "report.json")) as fh:
    report = json.load(fh)
print("accuracy", report["accuracy"], "false positives", report["false_positives"])
print("first anchors (1-based)", report["anchors_found"][:5])

# verify recomputes feasibility, reconstruction and the brute-force oracle
code = main(["verify", os.path.join(inst, "X.csv"), os.path.join(run, "report.json"),
             "--meta", os.path.join(inst, "meta.json")])
print("verify exit code", code)

# a corrupted report is caught
report["anchors_found"][0] = 40
bad = os.path.join(work, "bad.json")
with open(bad, "w") as fh:
    json.dump(report, fh)
code = main(["verify", os.path.join(inst, "X.csv"), bad,
             "--weights", os.path.join(run, "W.csv")])
print("verify on corrupted report exit code", code)
