import json
import sys
from pathlib import Path

import pytest

HELPERS = Path(__file__).parent / "helpers"
TOY_BRIDGE = HELPERS / "toy_bridge.py"

# The worked K=2 fixture: factual scores 0.2, each single change 0.3 / 0.4,
# both changes 0.9. Threshold 0.5 flips only on the full set.
TABLE_SCORES = {"00": 0.2, "01": 0.3, "10": 0.4, "11": 0.9}
# Same but the second change alone already crosses the threshold.
REDUCIBLE_SCORES = {"00": 0.2, "01": 0.3, "10": 0.6, "11": 0.9}
# First change alone hurts: its attribution comes out negative.
NEGATIVE_SCORES = {"00": 0.4, "01": 0.1, "10": 0.45, "11": 0.6}

FACTUAL_OBJ = {"feature_names": ["age", "plan"], "values": [0.0, "basic"]}
COUNTERFACTUAL_OBJ = {"feature_names": ["age", "plan"], "values": [1.0, "pro"]}


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path


@pytest.fixture
def table_files(tmp_path):
    """Paths for the worked K=2 case: factual, counterfactual, table model."""
    return {
        "factual": write_json(tmp_path / "factual.json", FACTUAL_OBJ),
        "counterfactual": write_json(tmp_path / "counterfactual.json", COUNTERFACTUAL_OBJ),
        "model": write_json(
            tmp_path / "table.json",
            {
                "factual": FACTUAL_OBJ["values"],
                "counterfactual": COUNTERFACTUAL_OBJ["values"],
                "scores": TABLE_SCORES,
            },
        ),
        "dir": tmp_path,
    }


def bridge_command(mode: str = "ok", weights: str = "", bias: float = 0.0,
                   delay: float | None = None) -> str:
    parts = [sys.executable, str(TOY_BRIDGE), "--mode", mode, "--bias", str(bias)]
    if weights:
        parts += ["--weights", weights]
    if delay is not None:
        parts += ["--delay", str(delay)]
    return " ".join(parts)
