import subprocess
import sys
from pathlib import Path

import pytest


def run_solver(outdir: Path, **settings) -> Path:
    """Invoke the solver CLI in a subprocess; the CSV files are the interface."""
    args = [sys.executable, "-m", "baroflow.cli", "run",
            "--output.dir", str(outdir)]
    for key, value in settings.items():
        args += [f"--{key}", str(value)]
    proc = subprocess.run(args, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return outdir


@pytest.fixture(scope="session")
def short_run(tmp_path_factory) -> Path:
    """A brief reference run at M=50 with snapshots at both ends."""
    out = tmp_path_factory.mktemp("run_m50")
    return run_solver(out, **{"mesh.M": 50, "time.tau": 0.01, "time.T": 0.05,
                              "output.snapshot_times": "0,0.05"})


@pytest.fixture(scope="session")
def projection_run_m100(tmp_path_factory) -> Path:
    """Projection-only run at M=100 (snapshot of the initial state)."""
    out = tmp_path_factory.mktemp("run_m100")
    return run_solver(out, **{"mesh.M": 100, "time.tau": 0.01, "time.T": 0,
                              "output.snapshot_times": "0"})


@pytest.fixture(scope="session")
def decoupled_run(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("run_dec")
    return run_solver(out, **{"mesh.M": 50, "time.tau": 0.01, "time.T": 0.05,
                              "scheme.kind": "decoupled", "scheme.K": 2,
                              "output.snapshot_times": "0,0.05"})
