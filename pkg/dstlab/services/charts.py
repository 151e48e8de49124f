"""SVG line charts of metrics.csv columns.

Charts are rendered with the Agg backend, a fixed SVG hash salt and no date
metadata so identical data gives byte-identical files.
"""
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import structlog  # noqa: E402

logger = structlog.get_logger()

CHART_STYLE = {
    "svg.hashsalt": "dstlab",
    "svg.fonttype": "none",
    "figure.figsize": (6.0, 3.6),
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "legend.fontsize": 8,
}

CHART_TITLES = {
    "acc": "Eval accuracy",
    "worst10": "Worst-10 class accuracy",
    "worst20": "Worst-20 class accuracy",
    "imbalance_ratio": "Class imbalance ratio",
    "pl_quantity": "Pseudo-label quantity",
    "pl_quality": "Pseudo-label quality",
    "loss_sup": "Supervised loss",
    "loss_pseudo": "Pseudo-label loss",
    "loss_adv": "Adversarial term",
    "worst_disagreement": "Worst-head disagreement",
    "lr": "Learning rate",
}

RUN_CHART_METRICS = ("acc", "pl_quantity", "pl_quality", "imbalance_ratio", "loss_adv",
                     "worst_disagreement")
OVERLAY_METRICS = ("acc", "pl_quantity", "pl_quality", "imbalance_ratio", "loss_adv")


def _plottable(values: pd.Series) -> np.ndarray:
    data = pd.to_numeric(values, errors="coerce").to_numpy(dtype=np.float64)
    return np.where(np.isfinite(data), data, np.nan)


def line_chart(path: Path, series: Dict[str, pd.DataFrame], metric: str) -> Path:
    """One line per labeled frame: ``step`` on x, ``metric`` on y."""
    with plt.rc_context(CHART_STYLE):
        fig, ax = plt.subplots()
        for label, frame in series.items():
            ax.plot(frame["step"].to_numpy(), _plottable(frame[metric]), label=label)
        ax.set_xlabel("step")
        ax.set_ylabel(metric)
        ax.set_title(CHART_TITLES.get(metric, metric))
        if len(series) > 1:
            ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def run_charts(frame: pd.DataFrame, charts_dir: Path, label: str = "run",
               metrics: Sequence[str] = RUN_CHART_METRICS) -> List[Path]:
    charts_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for metric in metrics:
        if metric in frame.columns:
            written.append(line_chart(charts_dir / f"{metric}.svg", {label: frame}, metric))
    logger.debug("Charts written", charts_dir=str(charts_dir), count=len(written))
    return written


def overlay_charts(frames: Dict[str, pd.DataFrame], out_dir: Path,
                   metrics: Iterable[str] = OVERLAY_METRICS) -> List[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    return [line_chart(out_dir / f"{metric}.svg", frames, metric) for metric in metrics]
