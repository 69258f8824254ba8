"""End-to-end pipeline: run the shipped experiment presets through the CLI,
then (optionally) render the figures with the TypeScript companion.

Run:  python demos/05_experiment_pipeline.py [outdir]
"""

import pathlib
import subprocess
import sys

out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(parents=True, exist_ok=True)

jobs = [
    ["stereomc", "run", "--preset", "sps-vs-rwm-gauss", "--out", str(out / "traceplots")],
    ["stereomc", "run", "--preset", "sbps-student-trace", "--out", str(out / "sbps")],
    ["stereomc", "tuning", "--preset", "tuning-table", "--out", str(out / "tuning")],
    ["stereomc", "run", "--preset", "latitude-approx", "--out", str(out / "latitudes")],
]
for cmd in jobs:
    print("$", " ".join(cmd))
    subprocess.run(cmd, check=True)

print(
    f"""
CSV outputs are under {out}/.  To render the figures:

    cd figs && npm run build
    node dist/src/main.js --kind traceplot_acf \\
        --in trace={out}/traceplots/trace_sps.csv \\
        --in acf={out}/traceplots/acf_sps.csv --out {out}/fig_trace.svg
    node dist/src/main.js --kind gk --in gk={out}/tuning/gk.csv --out {out}/fig_gk.svg
"""
)
