"""Exception hierarchy shared by every dstlab module."""
from typing import Iterable, Optional


class DstLabError(Exception):
    """Base class for errors raised by dstlab."""


class ConfigError(DstLabError):
    """Invalid configuration value or settings combination."""

    def __init__(self, message: str, errors: Optional[Iterable[str]] = None):
        self.errors = list(errors or [])
        if self.errors:
            message = f"{message}: " + "; ".join(self.errors)
        super().__init__(message)


class DimensionError(DstLabError):
    """Operand shapes do not line up."""


class ContractError(DstLabError):
    """A documented precondition of an API call was violated."""


class TargetIndexError(DstLabError, IndexError):
    """Class target outside the logit width."""


class ParseError(DstLabError):
    """Malformed input file."""

    def __init__(self, message: str, *, path: Optional[str] = None,
                 line: Optional[int] = None, offset: Optional[int] = None):
        self.path = path
        self.line = line
        self.offset = offset
        where = []
        if path:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"offset {offset}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class SplitError(DstLabError):
    """The requested SSL split cannot be drawn from the dataset."""

    def __init__(self, message: str, class_index: Optional[int] = None):
        self.class_index = class_index
        super().__init__(message)


class MetricsError(DstLabError):
    """A metric is undefined for the given inputs."""


class NonFiniteLossError(DstLabError):
    """Training produced a NaN or infinite loss."""

    def __init__(self, step: int, component: str, value: float):
        self.step = step
        self.component = component
        self.value = value
        super().__init__(f"non-finite {component}={value} at step {step}")


class ComparisonError(DstLabError):
    """Run directories cannot be compared."""

    def __init__(self, message: str, missing: Iterable[str] = (), extra: Iterable[str] = ()):
        self.missing = sorted(missing)
        self.extra = sorted(extra)
        super().__init__(f"{message} (missing={self.missing}, extra={self.extra})")
