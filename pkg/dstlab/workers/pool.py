"""Multi-seed sweeps: one independent run per (labels-per-class, seed) job."""
import multiprocessing
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import structlog

from dstlab.config import settings
from dstlab.logging_setup import configure_logging
from dstlab.schemas.report import RunReport, aggregate
from dstlab.schemas.run_config import load_run_config
from dstlab.services.storage import AGGREGATE_FILE, RunStorage

logger = structlog.get_logger()


@dataclass(frozen=True)
class SweepJob:
    config_path: str
    seed: int
    run_dir: str
    k_per_class: Optional[int] = None


def seed_dir(out_dir: Path, seed: int, k_per_class: Optional[int] = None) -> Path:
    base = out_dir / f"k{k_per_class}" if k_per_class is not None else out_dir
    return base / f"seed_{seed}"


def plan_jobs(config_path: Union[str, Path], seeds: Sequence[int], out_dir: Path,
              labels_per_class: Optional[Sequence[int]] = None) -> List[SweepJob]:
    amounts = list(labels_per_class) if labels_per_class else [None]
    return [SweepJob(str(config_path), seed, str(seed_dir(out_dir, seed, k)), k)
            for k in amounts for seed in seeds]


def run_job(job: SweepJob) -> dict:
    """Worker entry point. Failures come back as data so siblings keep running."""
    from dstlab.services.runner import execute_run

    configure_logging()
    try:
        config = load_run_config(job.config_path)
        overrides = {"seed": job.seed}
        if job.k_per_class is not None:
            overrides["split.k_per_class"] = job.k_per_class
        report = execute_run(config.with_overrides(**overrides), job.run_dir)
        return {"seed": job.seed, "k_per_class": job.k_per_class,
                "report": report.model_dump(mode="json")}
    except Exception as e:
        logger.error("Sweep job failed", seed=job.seed, k_per_class=job.k_per_class, error=str(e))
        return {"seed": job.seed, "k_per_class": job.k_per_class, "error": f"{type(e).__name__}: {e}"}


def _group_payload(results: List[dict]) -> dict:
    reports = [RunReport.model_validate(r["report"]) for r in results if "report" in r]
    completed = [r for r in reports if r.status == "completed"]
    failures = [{"seed": r["seed"], "error": r["error"]} for r in results if "error" in r]
    failures += [{"seed": r.seed, "error": r.error} for r in reports if r.status != "completed"]
    return {
        "seeds": [r["seed"] for r in results],
        "completed": len(completed),
        "partial": bool(failures),
        "failures": failures,
        "metrics": {name: agg.model_dump(mode="json") for name, agg in aggregate(completed).items()},
    }


def sweep(config_path: Union[str, Path], seeds: Sequence[int], jobs: int = 1,
          out_dir: Optional[Union[str, Path]] = None,
          labels_per_class: Optional[Sequence[int]] = None) -> dict:
    """Run every seed (for every labeled amount) and write ``aggregate.json``.

    Runs share nothing but the config file, so the per-seed artifacts are the
    same whether jobs run inline or in ``jobs`` spawned processes.
    """
    config = load_run_config(config_path)
    out_dir = Path(out_dir) if out_dir is not None else Path(settings.output_root) / config.name
    planned = plan_jobs(config_path, seeds, out_dir, labels_per_class)
    logger.info("Starting sweep", config=str(config_path), seeds=list(seeds), jobs=jobs,
                labels_per_class=list(labels_per_class or []), runs=len(planned))

    if jobs <= 1:
        results = [run_job(job) for job in planned]
    else:
        with multiprocessing.get_context("spawn").Pool(processes=jobs) as pool:
            results = pool.map(run_job, planned)

    payload = {"name": config.name, "algorithm": config.algorithm.label, "config": str(config_path)}
    if labels_per_class:
        groups = {f"k{k}": _group_payload([r for r in results if r["k_per_class"] == k])
                  for k in labels_per_class}
        payload["by_labels_per_class"] = groups
        payload["partial"] = any(group["partial"] for group in groups.values())
    else:
        payload.update(_group_payload(results))

    storage = RunStorage(out_dir)
    storage.prepare(charts=False)
    storage.write_json(AGGREGATE_FILE, payload)
    logger.info("Sweep finished", out_dir=str(out_dir), partial=payload["partial"])
    return payload
