import json
import shutil
import subprocess

import pytest


def _run_virtdyn(args):
    """Exercise the primary package strictly through its CLI."""
    result = subprocess.run(
        ["virtdyn", *args], capture_output=True, text=True, timeout=600
    )
    assert result.returncode == 0, f"virtdyn {args} failed: {result.stderr}"


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """Golden CSV outputs of one seeded run of every experiment."""
    if shutil.which("virtdyn") is None:
        pytest.skip("virtdyn CLI not installed")
    root = tmp_path_factory.mktemp("artifacts")

    _run_virtdyn(
        ["decoupling", "--seed", "7", "--samples", "1500", "--out", str(root / "decoupling")]
    )
    _run_virtdyn(
        [
            "conditioning",
            "--seed", "7",
            "--samples", "150",
            "--gamma", "1", "10", "100", "1000",
            "--alpha", "0.001", "0.01", "0.1", "1.1",
            "--out", str(root / "conditioning"),
        ]
    )
    _run_virtdyn(
        ["singular-pass", "--seed", "7", "--samples", "201", "--out", str(root / "singular-pass")]
    )
    _run_virtdyn(
        [
            "global-singular",
            "--seed", "7",
            "--samples", "40",
            "--gamma", "1", "100", "10000",
            "--alpha", "0.001", "0.1", "1.0",
            "--out", str(root / "global-singular"),
        ]
    )
    timing_cfg = root / "timing_cfg.json"
    timing_cfg.write_text(json.dumps({"timing_warmup": 100}))
    _run_virtdyn(
        [
            "timing",
            "--config", str(timing_cfg),
            "--seed", "7",
            "--samples", "1500",
            "--out", str(root / "timing"),
        ]
    )
    return root
