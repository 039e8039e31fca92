"""The command-line round trip: data, runs, charts, reports.

Everything the library does is reachable from the `teachsim` command:
generate a dataset CSV, run an experiment described by an INI config,
plot traces to SVG, and summarize runs as a table.  Every run drops a
manifest that pins the fully resolved configuration, so `run --config
manifest.ini` reproduces the trace byte for byte.  This script drives
the same entry points in-process.

Run from the repo root:  python3 demos/05_cli_workflow.py
"""

import os

from teachsim.cli import main

OUT = os.path.join(os.path.dirname(__file__), "out", "cli")
os.makedirs(OUT, exist_ok=True)

config_path = os.path.join(OUT, "experiment.ini")
with open(config_path, "w") as fh:
    fh.write(
        "[run]\n"
        "seed = 42\n"
        "iterations = 200\n"
        "[dataset]\n"
        "task = classification\n"
        "d = 20\n"
        "n = 300\n"
        "[learner]\n"
        "eta = 0.01\n"
        "[teacher]\n"
        "kind = active\n"
        "stop_tol = 0\n"
        "[map]\n"
        "kind = unitary\n"
        "[mode]\n"
        "kind = rescalable_pool\n")

print("== datagen: materialize the dataset as CSV ==")
main(["datagen", "--config", config_path,
      "--out", os.path.join(OUT, "data.csv")])

print("\n== run: one experiment, trace + manifest ==")
run_dir = os.path.join(OUT, "run")
main(["run", "--config", config_path, "--out", run_dir])

print("\n== run again, straight from the manifest ==")
rerun_dir = os.path.join(OUT, "rerun")
main(["run", "--config", os.path.join(run_dir, "manifest.ini"),
      "--out", rerun_dir])
a = open(os.path.join(run_dir, "trace.csv"), "rb").read()
b = open(os.path.join(rerun_dir, "trace.csv"), "rb").read()
print(f"traces byte-identical: {a == b}")

print("\n== a three-seed sweep in one call ==")
main(["run", "--config", config_path, "--out",
      os.path.join(OUT, "sweep"), "--seeds", "0..2"])

print("\n== plot and report ==")
main(["plot", os.path.join(run_dir, "trace.csv"),
      "--out", os.path.join(OUT, "trace.svg"),
      "--metric", "param_dist", "--log-y",
      "--title", "active teacher, unitary map"])
main(["report", os.path.join(run_dir, "trace.csv"),
      os.path.join(OUT, "sweep", "seed_0", "trace.csv"),
      os.path.join(OUT, "sweep", "seed_1", "trace.csv")])
