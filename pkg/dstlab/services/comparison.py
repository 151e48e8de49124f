"""Side-by-side comparison of finished runs."""
from pathlib import Path
from typing import Dict, List, Sequence, Union

import pandas as pd
import structlog

from dstlab.exceptions import ComparisonError
from dstlab.services.charts import overlay_charts
from dstlab.services.storage import METRICS_FILE, SUMMARY_FILE, RunStorage

logger = structlog.get_logger()

COMPARISON_FILE = "comparison.csv"


def _run_label(storage: RunStorage, taken: Dict[str, pd.DataFrame]) -> str:
    label = storage.run_dir.name
    if storage.exists(SUMMARY_FILE):
        summary = storage.read_json(SUMMARY_FILE)
        label = f"{summary['algorithm']}:{storage.run_dir.name}"
    suffix = 2
    unique = label
    while unique in taken:
        unique = f"{label}#{suffix}"
        suffix += 1
    return unique


def load_metrics(run_dirs: Sequence[Union[str, Path]]) -> Dict[str, pd.DataFrame]:
    """Read every run's metrics.csv.

    Every run needs the first run's column set; column order may differ and
    is normalised to the first run's.
    """
    frames: Dict[str, pd.DataFrame] = {}
    reference: List[str] = []
    for run_dir in run_dirs:
        storage = RunStorage(run_dir)
        frame = storage.read_csv(METRICS_FILE)
        columns = list(frame.columns)
        if not frames:
            reference = columns
        elif set(columns) != set(reference):
            missing = sorted(set(reference) - set(columns))
            extra = sorted(set(columns) - set(reference))
            logger.error("Metrics header mismatch", run_dir=str(run_dir), missing=missing, extra=extra)
            raise ComparisonError(f"metrics header of {run_dir} differs from the first run", missing, extra)
        frames[_run_label(storage, frames)] = frame[reference]
    return frames


def final_table(frames: Dict[str, pd.DataFrame]) -> pd.DataFrame:
    """Last eval row of each run, one row per run."""
    rows = [frame.iloc[-1].rename(label) for label, frame in frames.items() if not frame.empty]
    table = pd.DataFrame(rows)
    table.index.name = "run"
    return table.reset_index()


def compare(run_dirs: Sequence[Union[str, Path]], out: Union[str, Path],
            charts: bool = True) -> Path:
    if len(run_dirs) < 2:
        raise ComparisonError(f"compare needs at least 2 runs, got {len(run_dirs)}")
    frames = load_metrics(run_dirs)
    storage = RunStorage(out)
    storage.prepare(charts=False)
    path = storage.write_csv(COMPARISON_FILE, final_table(frames))
    if charts:
        overlay_charts(frames, storage.run_dir)
    logger.info("Comparison written", runs=len(frames), out=str(storage.run_dir))
    return path
