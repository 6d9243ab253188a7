from __future__ import annotations

from dataclasses import dataclass

from .log import ACTIVITY, RESOURCE, TIMESTAMP, EventLog

OPERATION_TYPES = ("sup", "add", "sub", "con", "swa", "gen", "cry")
LEVELS = ("case", "event")

# Targets used in signatures for the standard perspectives, and the XES keys
# they stand for. "trace" is the mandatory case attribute holding the events.
STANDARD_TARGETS = {
    "activity": ACTIVITY,
    "time": TIMESTAMP,
    "resource": RESOURCE,
    "trace": None,
}


@dataclass(frozen=True)
class AnonymizerSignature:
    """``(operation_type, level, target)`` describing an anonymizer without its conditions."""

    operation_type: str
    level: str
    target: str

    def __post_init__(self) -> None:
        if self.operation_type not in OPERATION_TYPES:
            raise ValueError(f"operation type must be one of {', '.join(OPERATION_TYPES)}; got {self.operation_type!r}")
        if self.level not in LEVELS:
            raise ValueError(f"level must be 'case' or 'event'; got {self.level!r}")
        if not isinstance(self.target, str) or not self.target:
            raise ValueError("target must be a non-empty string")

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.operation_type, self.level, self.target)

    def check_target(self, log: EventLog) -> None:
        """Raise if the target is neither case/event, a standard perspective, nor a name of ``log``."""
        if self.target in LEVELS or self.target in STANDARD_TARGETS:
            return
        if self.target not in log.attribute_names:
            raise ValueError(f"signature target {self.target!r} is not an attribute of the log")

    def __str__(self) -> str:
        return f"({self.operation_type},{self.level},{self.target})"
