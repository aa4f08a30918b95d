"""Answer-path enumeration over a validated script.

Used by coverage tooling and tests: every enumerated path, replayed through
the interview engine, must reach the end of the script.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import MicaError
from .model import DialogScript, END, QuestionNode, RangeCond


class CycleDetected(MicaError):
    def __init__(self, node_id: str):
        super().__init__(f"routing can revisit node '{node_id}'")
        self.node_id = node_id


@dataclass(frozen=True)
class PathEnumeration:
    paths: tuple[tuple[tuple[str, str], ...], ...]  # each path: ((node_id, answer), ...)
    truncated: bool


def _candidate_answers(node: QuestionNode) -> list[tuple[str, bool | int | str]]:
    """Representative (text, normalized) answers per node.

    Numeric domains are sampled at the range endpoints and at every route
    condition boundary, which is enough to exercise each distinct route.
    """
    if node.kind == "yesno":
        return [("yes", True), ("no", False)]
    if node.kind == "choice":
        return [(o.label, o.label) for o in node.options]
    if node.kind == "numeric":
        lo, hi = node.numeric_range or (0, 0)
        points = {lo, hi}
        for route in node.routes:
            if isinstance(route.cond, RangeCond):
                # both edges of the condition plus the values just outside it,
                # so regions covered only by a later default get sampled too
                points.update((route.cond.lo - 1, route.cond.lo, route.cond.hi, route.cond.hi + 1))
        values = sorted(v for v in points if lo <= v <= hi)
        return [(str(v), v) for v in values]
    return [("sample text", "sample text")]


def enumerate_paths(script: DialogScript, max_paths: int) -> PathEnumeration:
    """Depth-first enumeration of answer sequences that reach `end`.

    Stops after `max_paths` paths and marks the result truncated. Raises
    :class:`CycleDetected` if any explored route revisits a node, which the
    language forbids.
    """
    if max_paths < 1:
        raise ValueError("max_paths must be positive")
    paths: list[tuple[tuple[str, str], ...]] = []
    truncated = False

    def walk(node_id: str, trail: tuple[tuple[str, str], ...], on_path: frozenset[str]) -> bool:
        """Returns False once the path budget is exhausted."""
        nonlocal truncated
        if node_id in on_path:
            raise CycleDetected(node_id)
        node = script.node(node_id)
        for text, value in _candidate_answers(node):
            target = None
            for route in node.routes:
                if route.matches(value):
                    target = route.target
                    break
            if target is None:
                # not exhaustive; validation reports this, skip the value here
                continue
            step = trail + ((node_id, text),)
            if target == END:
                if len(paths) >= max_paths:
                    truncated = True
                    return False
                paths.append(step)
            else:
                if not walk(target, step, on_path | {node_id}):
                    return False
        return True

    walk(script.start, (), frozenset())
    return PathEnumeration(paths=tuple(paths), truncated=truncated)
