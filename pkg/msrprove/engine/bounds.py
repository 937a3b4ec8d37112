from __future__ import annotations

from dataclasses import asdict, dataclass

from msrprove.config import DEFAULT_ADV_DEPTH, DEFAULT_MAX_EVENTS, DEFAULT_MAX_FRESH


@dataclass(frozen=True)
class Bounds:
    """Exploration limits. ``max_events`` counts rule instances only."""

    max_events: int = DEFAULT_MAX_EVENTS
    max_fresh: int = DEFAULT_MAX_FRESH
    adv_depth: int = DEFAULT_ADV_DEPTH

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    def __str__(self) -> str:
        return f"max-events={self.max_events}, max-fresh={self.max_fresh}, adv-depth={self.adv_depth}"
