from .pool import SweepJob, plan_jobs, run_job, seed_dir, sweep

__all__ = ["SweepJob", "plan_jobs", "run_job", "seed_dir", "sweep"]
