"""Round spans for algorithms that train in rounds."""
from dataclasses import dataclass
from typing import List

from dstlab.exceptions import ConfigError


@dataclass(frozen=True)
class RoundSpan:
    index: int
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start

    def __contains__(self, step: int) -> bool:
        return self.start <= step < self.end


def round_schedule(total_steps: int, rounds: int) -> List[RoundSpan]:
    """``total_steps // rounds`` steps per round, remainder added to the last."""
    if rounds < 1:
        raise ConfigError(f"rounds must be >= 1, got {rounds}")
    per_round = total_steps // rounds
    if per_round < 1:
        raise ConfigError(f"{total_steps} steps cannot be split into {rounds} rounds")
    spans = [RoundSpan(i, i * per_round, (i + 1) * per_round) for i in range(rounds)]
    spans[-1] = RoundSpan(rounds - 1, spans[-1].start, total_steps)
    return spans
