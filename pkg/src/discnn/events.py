"""Switch events of the limited integrators.

A switch is a coordinate moving between the three partition sets: ``plus``
(active, integrating), ``zero`` (pinned at zero with a negative input) and
``neg`` (negative, recovering at constant rate).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Literal

PartitionSet = Literal["plus", "zero", "neg"]

PARTITION_SETS: tuple[PartitionSet, ...] = ("plus", "zero", "neg")

# Label codes used in partition arrays; index into PARTITION_SETS.
PLUS, ZERO, NEG = 0, 1, 2


@dataclass(frozen=True)
class SwitchEvent:
    time: float
    index: int
    from_set: PartitionSet
    to_set: PartitionSet

    def __post_init__(self) -> None:
        if self.from_set == self.to_set:
            raise ValueError(f"switch event for index {self.index} does not change set")

    def as_row(self) -> dict[str, object]:
        """Flatten for CSV export (columns t, index, from, to)."""
        d = asdict(self)
        return {"t": d["time"], "index": d["index"], "from": d["from_set"], "to": d["to_set"]}


def label_name(code: int) -> PartitionSet:
    return PARTITION_SETS[code]
