"""Config-driven runs: spectral summary, simulation files, a sweep and a figure.

Everything the command line writes is deterministic, so two runs of the same
config produce byte-identical files. Output goes to the directory given as the
first argument (default: ./demo_output).
"""

import sys
from pathlib import Path

from plastibite.cli import main

configs = Path(__file__).resolve().parent.parent / "configs"
out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")

main(["spectral", "--config", str(configs / "supercritical.ini"), "--out", str(out / "spectral")])
main(["simulate", "--config", str(configs / "supercritical.ini"), "--out", str(out / "sim")])
main(["steady", "--config", str(configs / "subcritical.ini"), "--out", str(out / "steady"),
      "--criticalize"])
main(["sweep", "--config", str(configs / "sweep_beta.ini"), "--out", str(out / "sweep")])
main(["render", str(out / "steady" / "steady.csv"), "--out", str(out / "steady.svg"),
      "--a-max", "9"])
print((out / "sweep" / "sweep.csv").read_text())
