"""Randomized two-group assignment.

Balanced split of a seeded shuffle rather than independent coin flips, so
group sizes never differ by more than one — what a small-n comparison
needs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Sequence

from ..errors import MicaError

GROUP_TOOL = "P_Mica"
GROUP_CONTROL = "P_Direct"


class DuplicateRosterId(MicaError):
    pass


@dataclass(frozen=True)
class Assignment:
    seed: int
    roster: tuple[str, ...]
    groups: dict[str, str]  # id -> P_Mica | P_Direct

    def group_ids(self, group: str) -> tuple[str, ...]:
        return tuple(pid for pid in self.roster if self.groups[pid] == group)

    def to_wire(self) -> dict:
        return {"seed": self.seed, "roster": list(self.roster), "groups": dict(self.groups)}

    @classmethod
    def from_wire(cls, data: dict) -> "Assignment":
        return cls(seed=data["seed"], roster=tuple(data["roster"]), groups=dict(data["groups"]))

    def to_json(self) -> str:
        return json.dumps(self.to_wire(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Assignment":
        return cls.from_wire(json.loads(text))


def assign_groups(roster: Sequence[str], seed: int) -> Assignment:
    """Seeded pseudorandom permutation; first half (rounded up) goes to P_Mica.

    Fully reproducible from (seed, roster order).
    """
    if not roster:
        raise ValueError("roster must be non-empty")
    seen: set[str] = set()
    for pid in roster:
        if pid in seen:
            raise DuplicateRosterId(f"roster id '{pid}' appears twice")
        seen.add(pid)

    shuffled = list(roster)
    random.Random(seed).shuffle(shuffled)
    cut = (len(shuffled) + 1) // 2
    groups = {pid: GROUP_TOOL for pid in shuffled[:cut]}
    groups.update({pid: GROUP_CONTROL for pid in shuffled[cut:]})
    return Assignment(seed=seed, roster=tuple(roster), groups=groups)
