"""Driving the command-line tool on a JSON network description.

Writes a two-bus network file, then runs each subcommand through the
installed ``gridcert`` entry point and prints the exit code and report.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

bus = {"M": 1.0, "D": 0.1, "tau": 0.5,
       "controller": {"type": "idroop", "K": 0.65, "Knu": 1.3, "Kdelta": 8.0}}
network = {
    "buses": [{"id": "1", **bus}, {"id": "2", **bus}],
    "lines": [{"from": "1", "to": "2", "B": 1.0}],
    "h": {"omega0": 30.0},
    "sim": {"dt": 0.005, "t_end": 40.0, "disturbance": {"1": -1.0}},
}

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "net.json"
    path.write_text(json.dumps(network, indent=2))
    runs = [
        ["certify", str(path)],
        ["min-gamma", str(path), "--bus", "1"],
        ["global-check", str(path)],
        ["simulate", str(path), "--out", str(Path(tmp) / "traj.csv")],
        ["freqresp", str(path), "--bus", "1", "--out", str(Path(tmp) / "bode.csv")],
        ["first-order", "1.37", "1", "0.08", "30", "--gamma", "0.19"],
    ]
    for argv in runs:
        proc = subprocess.run([sys.executable, "-m", "gridcert.cli", *argv],
                              capture_output=True, text=True)
        print("$ gridcert", " ".join(argv))
        print(f"exit code {proc.returncode}")
        report = json.loads(proc.stdout) if proc.stdout.strip() else {}
        print(json.dumps({k: v for k, v in report.items() if k not in ("grid", "buses")},
                         indent=2)[:600])
        print()
