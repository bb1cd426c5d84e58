"""JSON Schemas for every command's output document."""
from __future__ import annotations

import json
from importlib import resources

COMMAND_SCHEMAS = {
    "gen": "gen",
    "classify": "classify",
    "expect": "expect",
    "simulate": "simulate",
    "enumerate": "enumerate",
    "verify-bounds": "verify_bounds",
    "monotonicity": "monotonicity",
    "replay": "replay",
    "sweep": "sweep",
}


def load_schema(name: str) -> dict:
    """Schema by file stem (``"landscape"``) or by command name (``"verify-bounds"``)."""
    stem = COMMAND_SCHEMAS.get(name, name)
    return json.loads(resources.files(__name__).joinpath(f"{stem}.json").read_text(encoding="utf-8"))
