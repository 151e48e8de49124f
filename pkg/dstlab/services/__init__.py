# Services module
from .comparison import compare
from .runner import execute_run, run
from .storage import RunStorage

__all__ = ["RunStorage", "compare", "execute_run", "run"]
