"""
Artifact writers. CSV goes through pandas with full float precision, JSON is
sorted and indented, and every run gets a manifest without timestamps so
re-runs are byte-identical.
"""
import json
import logging
import math
import os
from typing import Any, Iterable, Optional

import pandas as pd

from runner.config import config

logger = logging.getLogger(__name__)


def _clean(value: Any) -> Any:
    """Floats rounded to 17 significant digits; nan/inf become None (valid JSON)."""
    if isinstance(value, float):
        return float(f"{value:.17g}") if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


class ArtifactWriter:
    """Collects the files written for one command run."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files: list[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _record(self, name: str) -> str:
        if name not in self.files:
            self.files.append(name)
        return self.path(name)

    def csv(self, name: str, rows: Iterable[dict], columns: Optional[list[str]] = None) -> str:
        path = self._record(name)
        frame = pd.DataFrame(list(rows), columns=columns)
        frame.to_csv(path, index=False, float_format=config.FLOAT_FORMAT, lineterminator="\n")
        logger.debug("wrote %s (%d rows)", path, len(frame))
        return path

    def json(self, name: str, payload: Any) -> str:
        path = self._record(name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_clean(payload), f, indent=2, sort_keys=True)
            f.write("\n")
        return path

    def figure(self, name: str, fig) -> Optional[str]:
        if not config.SVG_ENABLED:
            return None
        from runner.plotting import save_svg

        path = self._record(name)
        save_svg(fig, path)
        return path

    def manifest(self, command: str, scenario: dict, seed: Optional[int], tolerance: float, status: dict) -> str:
        names = sorted(self.files)
        return self.json("manifest.json", {
            "command": command,
            "scenario": scenario,
            "seed": seed,
            "tolerance": tolerance,
            "status": status,
            "artifacts": names,
        })
