"""Run directory storage: JSON, CSV and chart files under one root."""
import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

import pandas as pd
import structlog

from dstlab.config import settings

logger = structlog.get_logger()

CONFIG_FILE = "config.resolved.json"
METRICS_FILE = "metrics.csv"
BIAS_REPORT_FILE = "bias_report.json"
SUMMARY_FILE = "summary.json"
AGGREGATE_FILE = "aggregate.json"
CHARTS_DIR = "charts"
MISSING_VALUE = "n/a"


class RunStorage:
    """Service for reading and writing the artifacts of one run directory."""

    def __init__(self, run_dir: Optional[Union[str, Path]] = None):
        self.run_dir = Path(run_dir) if run_dir is not None else Path(settings.output_root)
        self._initialized = False

    def prepare(self, charts: bool = True) -> Path:
        """Create the run directory (and its charts folder) if needed."""
        if not self._initialized:
            try:
                self.run_dir.mkdir(parents=True, exist_ok=True)
                if charts:
                    self.charts_dir.mkdir(exist_ok=True)
                self._initialized = True
                logger.debug("Run directory ready", run_dir=str(self.run_dir))
            except OSError as e:
                logger.error("Failed to create run directory", run_dir=str(self.run_dir), error=str(e))
                raise
        return self.run_dir

    @property
    def charts_dir(self) -> Path:
        return self.run_dir / CHARTS_DIR

    def path(self, name: str) -> Path:
        return self.run_dir / name

    def exists(self, name: str) -> bool:
        return self.path(name).exists()

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        """Write ``payload`` as sorted, indented JSON.

        Args:
            name: File name relative to the run directory
            payload: JSON-serializable mapping

        Returns:
            Path of the written file
        """
        self.prepare()
        target = self.path(name)
        try:
            target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        except (OSError, TypeError, ValueError) as e:
            logger.error("Failed to write JSON artifact", path=str(target), error=str(e))
            raise
        logger.debug("Artifact written", path=str(target))
        return target

    def read_json(self, name: str) -> Dict[str, Any]:
        return json.loads(self.path(name).read_text())

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        """Write ``frame`` without index; missing values appear as ``n/a``."""
        self.prepare()
        target = self.path(name)
        try:
            frame.to_csv(target, index=False, na_rep=MISSING_VALUE, lineterminator="\n")
        except OSError as e:
            logger.error("Failed to write CSV artifact", path=str(target), error=str(e))
            raise
        logger.debug("Artifact written", path=str(target), rows=len(frame))
        return target

    def read_csv(self, name: str) -> pd.DataFrame:
        return pd.read_csv(self.path(name), na_values=[MISSING_VALUE])
