"""Semantic validation of parsed dialog scripts.

Every defect becomes an :class:`Issue` in the returned report rather than an
exception, so tooling can show all problems at once. A script with an empty
error list is safe to execute: every route target exists, every node is
reachable and acyclic, every answer domain is fully routed, score bands
partition the achievable totals, and rule expressions only reference facts
some question or intercept can produce.
"""

from __future__ import annotations

from .model import (
    AgeAtom,
    DialogScript,
    FactAtom,
    Issue,
    LabelCond,
    QuestionNode,
    RangeCond,
    RiskCountAtom,
    ScoreBandAtom,
    ScoreRule,
    ValidationReport,
    YesNoCond,
    atoms_in,
    END,
)


class _Collector:
    def __init__(self) -> None:
        self.errors: list[Issue] = []
        self.warnings: list[Issue] = []

    def error(self, code: str, location: str, message: str) -> None:
        self.errors.append(Issue(code=code, location=location, message=message))

    def warn(self, code: str, location: str, message: str) -> None:
        self.warnings.append(Issue(code=code, location=location, message=message))


def validate_script(script: DialogScript) -> ValidationReport:
    out = _Collector()
    nodes = script.all_nodes()
    node_ids = [q.id for q in nodes]

    _check_duplicate_ids(script, node_ids, out)
    known = set(node_ids)

    if script.start not in known:
        out.error("dangling_start", "script start", f"start node '{script.start}' does not exist")

    for node in nodes:
        _check_node_shape(node, out)
        _check_routes(node, known, out)

    _check_reachability(script, known, out)
    _check_cycles(script, known, out)
    _check_fact_writers(script, out)

    for rule in script.scores:
        _check_score_rule(script, rule, out)

    producible = script.producible_fact_keys()
    score_bands = {r.id: {b.name for b in r.bands} for r in script.scores}

    for flag in script.flags:
        loc = f"flag {flag.id}"
        for atom in atoms_in(flag.expr):
            if isinstance(atom, FactAtom) and atom.key not in producible:
                out.error("flag_unknown_fact", loc, f"no question or intercept produces fact '{atom.key}'")
            elif isinstance(atom, RiskCountAtom) and atom.min_count < 1:
                out.error("bad_riskcount", loc, "riskcount threshold must be >= 1")
            elif isinstance(atom, (ScoreBandAtom, AgeAtom)):
                out.error("flag_bad_atom", loc, "flags may only use fact(...) and riskcount predicates")

    for profile in script.profiles:
        loc = f"profile {profile.id}"
        for atom in atoms_in(profile.expr):
            if isinstance(atom, FactAtom) and atom.key not in producible:
                out.error("profile_unknown_fact", loc, f"no question or intercept produces fact '{atom.key}'")
            elif isinstance(atom, RiskCountAtom) and atom.min_count < 1:
                out.error("bad_riskcount", loc, "riskcount threshold must be >= 1")
            elif isinstance(atom, ScoreBandAtom):
                if atom.score_id not in score_bands:
                    out.error("unknown_scoreband", loc, f"no score rule named '{atom.score_id}'")
                elif atom.band not in score_bands[atom.score_id]:
                    out.error(
                        "unknown_scoreband",
                        loc,
                        f"score '{atom.score_id}' has no band '{atom.band}'",
                    )

    for intercept in script.intercepts:
        loc = f"intercept {intercept.id}"
        seen: set[str] = set()
        for kw in intercept.keywords:
            if not kw.strip():
                out.error("empty_keyword", loc, "keywords must be non-empty")
            elif kw != kw.lower():
                out.error("keyword_not_lowercase", loc, f"keyword '{kw}' must be lowercase")
            elif kw in seen:
                out.error("duplicate_keyword", loc, f"keyword '{kw}' appears twice")
            seen.add(kw)

    return ValidationReport(errors=tuple(out.errors), warnings=tuple(out.warnings))


# --- structural checks -----------------------------------------------------------


def _check_duplicate_ids(script: DialogScript, node_ids: list[str], out: _Collector) -> None:
    seen: set[str] = set()
    for nid in node_ids:
        if nid in seen:
            out.error("duplicate_id", f"question {nid}", f"node id '{nid}' declared more than once")
        seen.add(nid)
    top: set[str] = set()
    for kind, ids in (
        ("section", [s.id for s in script.sections]),
        ("score", [r.id for r in script.scores]),
        ("flag", [f.id for f in script.flags]),
        ("profile", [p.id for p in script.profiles]),
        ("intercept", [i.id for i in script.intercepts]),
    ):
        for rid in ids:
            if rid in top:
                out.error("duplicate_id", f"{kind} {rid}", f"id '{rid}' declared more than once")
            top.add(rid)


def _check_node_shape(node: QuestionNode, out: _Collector) -> None:
    loc = f"question {node.id}"
    if not node.prompt.strip():
        out.error("missing_prompt", loc, "prompt must be non-empty")
    if not node.help.strip():
        out.error("missing_help", loc, "help text must be non-empty")
    if node.kind == "choice":
        if len(node.options) < 2:
            out.error("bad_choice_options", loc, "choice questions need at least 2 options")
        labels: set[str] = set()
        for opt in node.options:
            low = opt.label.lower()
            if low in labels:
                out.error("duplicate_option", loc, f"option '{opt.label}' appears twice")
            labels.add(low)
            if opt.weight is not None and opt.weight < 0:
                out.error("bad_weight", loc, f"option '{opt.label}' has a negative weight")
    elif node.options:
        out.error("options_on_nonchoice", loc, f"{node.kind} questions cannot declare options")
    if node.kind == "numeric":
        lo, hi = node.numeric_range or (0, -1)
        if lo > hi:
            out.error("bad_numeric_range", loc, f"numeric range {lo}..{hi} is empty")


def _check_routes(node: QuestionNode, known: set[str], out: _Collector) -> None:
    loc = f"question {node.id}"
    for i, route in enumerate(node.routes, start=1):
        if route.target != END and route.target not in known:
            out.error(
                "dangling_target",
                f"{loc} route {i}",
                f"goto target '{route.target}' does not exist",
            )

    # condition/kind compatibility, then first-match coverage of the answer domain
    if node.kind == "yesno":
        remaining = {True, False}
        for i, route in enumerate(node.routes, start=1):
            rloc = f"{loc} route {i}"
            if route.cond is None:
                if not remaining:
                    out.warn("route_shadowed", rloc, "default route can never fire")
                remaining = set()
            elif isinstance(route.cond, YesNoCond):
                if route.cond.value not in remaining:
                    out.warn("route_shadowed", rloc, "condition already covered by earlier routes")
                remaining.discard(route.cond.value)
            else:
                out.error("route_type_mismatch", rloc, "yesno questions route on yes/no only")
        if remaining:
            missing = " and ".join("yes" if v else "no" for v in sorted(remaining, reverse=True))
            out.error("routes_not_exhaustive", loc, f"no route covers answer {missing}")

    elif node.kind == "choice":
        labels = {o.label.lower() for o in node.options}
        remaining = set(labels)
        for i, route in enumerate(node.routes, start=1):
            rloc = f"{loc} route {i}"
            if route.cond is None:
                if not remaining:
                    out.warn("route_shadowed", rloc, "default route can never fire")
                remaining = set()
            elif isinstance(route.cond, LabelCond):
                low = route.cond.label.lower()
                if low not in labels:
                    out.error("route_label_unknown", rloc, f"'{route.cond.label}' is not an option of {node.id}")
                elif low not in remaining:
                    out.warn("route_shadowed", rloc, "condition already covered by earlier routes")
                remaining.discard(low)
            else:
                out.error("route_type_mismatch", rloc, "choice questions route on option labels only")
        if remaining:
            out.error(
                "routes_not_exhaustive",
                loc,
                "no route covers option(s): " + ", ".join(sorted(remaining)),
            )

    elif node.kind == "numeric":
        lo, hi = node.numeric_range or (0, 0)
        remaining: list[tuple[int, int]] = [(lo, hi)] if lo <= hi else []
        for i, route in enumerate(node.routes, start=1):
            rloc = f"{loc} route {i}"
            if route.cond is None:
                if not remaining:
                    out.warn("route_shadowed", rloc, "default route can never fire")
                remaining = []
            elif isinstance(route.cond, RangeCond):
                if route.cond.lo > route.cond.hi:
                    out.error("bad_numeric_range", rloc, f"route range {route.cond.lo}..{route.cond.hi} is empty")
                    continue
                new_remaining = _subtract(remaining, (route.cond.lo, route.cond.hi))
                if new_remaining == remaining:
                    out.warn("route_shadowed", rloc, "condition already covered by earlier routes")
                remaining = new_remaining
            else:
                out.error("route_type_mismatch", rloc, "numeric questions route on INT..INT subranges only")
        if remaining:
            gaps = ", ".join(f"{a}..{b}" for a, b in remaining)
            out.error("routes_not_exhaustive", loc, f"no route covers value(s) {gaps}")

    else:  # text
        covered = False
        for i, route in enumerate(node.routes, start=1):
            rloc = f"{loc} route {i}"
            if route.cond is None:
                if covered:
                    out.warn("route_shadowed", rloc, "default route can never fire")
                covered = True
            else:
                out.error("route_type_mismatch", rloc, "text questions take a single unconditional route")
        if not covered:
            out.error("routes_not_exhaustive", loc, "text questions need an unconditional route")


def _subtract(intervals: list[tuple[int, int]], cut: tuple[int, int]) -> list[tuple[int, int]]:
    """Remove a closed integer interval from a sorted disjoint interval list."""
    clo, chi = cut
    result: list[tuple[int, int]] = []
    for lo, hi in intervals:
        if chi < lo or clo > hi:
            result.append((lo, hi))
            continue
        if lo < clo:
            result.append((lo, clo - 1))
        if chi < hi:
            result.append((chi + 1, hi))
    return result


def _route_graph(script: DialogScript, known: set[str]) -> dict[str, list[str]]:
    return {
        q.id: [r.target for r in q.routes if r.target != END and r.target in known]
        for q in script.all_nodes()
    }


def _check_reachability(script: DialogScript, known: set[str], out: _Collector) -> None:
    if script.start not in known:
        return
    graph = _route_graph(script, known)
    seen = {script.start}
    stack = [script.start]
    while stack:
        for target in graph[stack.pop()]:
            if target not in seen:
                seen.add(target)
                stack.append(target)
    for node in script.all_nodes():
        if node.id not in seen:
            out.error("unreachable_node", f"question {node.id}", "not reachable from the start node")


def _check_cycles(script: DialogScript, known: set[str], out: _Collector) -> None:
    graph = _route_graph(script, known)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {nid: WHITE for nid in graph}
    reported: set[str] = set()

    def visit(nid: str) -> None:
        color[nid] = GRAY
        for target in graph[nid]:
            if color[target] == GRAY:
                if target not in reported:
                    reported.add(target)
                    out.error("cycle", f"question {target}", f"routing can revisit '{target}'")
            elif color[target] == WHITE:
                visit(target)
        color[nid] = BLACK

    for nid in graph:
        if color[nid] == WHITE:
            visit(nid)


def _check_fact_writers(script: DialogScript, out: _Collector) -> None:
    known = {q.id for q in script.all_nodes()}
    graph = _route_graph(script, known)

    def descendants(nid: str) -> set[str]:
        seen: set[str] = set()
        stack = list(graph.get(nid, ()))
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(graph.get(cur, ()))
        return seen

    writers: dict[str, list[str]] = {}
    for node in script.all_nodes():
        if node.fact_name:
            writers.setdefault(node.fact_name, []).append(node.id)
    for key, nids in writers.items():
        if len(nids) < 2:
            continue
        for nid in nids:
            below = descendants(nid)
            for other in nids:
                if other != nid and other in below:
                    out.error(
                        "fact_rewrite",
                        f"question {other}",
                        f"fact '{key}' is already written by '{nid}' earlier on the same path",
                    )

    list_keys = {i.record_fact: i.id for i in script.intercepts}
    for node in script.all_nodes():
        if node.fact_name and node.fact_name in list_keys:
            out.error(
                "fact_kind_conflict",
                f"question {node.id}",
                f"fact '{node.fact_name}' is also a list fact recorded by intercept "
                f"'{list_keys[node.fact_name]}'",
            )


def _check_score_rule(script: DialogScript, rule: ScoreRule, out: _Collector) -> None:
    loc = f"score {rule.id}"
    ok = True
    seen_q: set[str] = set()
    for qid in rule.question_ids:
        if qid in seen_q:
            out.error("score_duplicate_question", loc, f"question '{qid}' listed twice")
            ok = False
            continue
        seen_q.add(qid)
        if not script.has_node(qid):
            out.error("score_unknown_question", loc, f"question '{qid}' does not exist")
            ok = False
            continue
        node = script.node(qid)
        if node.kind != "choice" or not node.options or any(o.weight is None for o in node.options):
            out.error(
                "score_unweighted_question",
                loc,
                f"question '{qid}' must be a choice question with a weight on every option",
            )
            ok = False
        elif not node.fact_name:
            out.error(
                "score_question_unset",
                loc,
                f"question '{qid}' needs a 'set' tag so its answer can be scored",
            )
            ok = False
    if not ok:
        return

    achievable_lo = sum(min(o.weight for o in script.node(q).options) for q in rule.question_ids)
    achievable_hi = sum(max(o.weight for o in script.node(q).options) for q in rule.question_ids)

    names: set[str] = set()
    intervals: list[tuple[int, int, str]] = []
    for band in rule.bands:
        if band.name in names:
            out.error("duplicate_band", loc, f"band '{band.name}' declared twice")
        names.add(band.name)
        if band.op == "between" and band.b is not None and band.a > band.b:
            out.error("bad_band", loc, f"band '{band.name}' has an empty interval")
            continue
        blo, bhi = band.bounds(achievable_lo, achievable_hi)
        blo, bhi = max(blo, achievable_lo), min(bhi, achievable_hi)
        if blo > bhi:
            out.warn(
                "band_outside_range",
                loc,
                f"band '{band.name}' covers no achievable total "
                f"(achievable range is {achievable_lo}..{achievable_hi})",
            )
            continue
        intervals.append((blo, bhi, band.name))

    intervals.sort()
    cursor = achievable_lo
    prev_name = None
    for blo, bhi, name in intervals:
        if blo < cursor:
            out.error("bands_overlap", loc, f"bands '{prev_name}' and '{name}' both cover total {blo}")
        elif blo > cursor:
            out.error("bands_gap", loc, f"no band covers totals {cursor}..{blo - 1}")
        cursor = max(cursor, bhi + 1)
        prev_name = name
    if cursor <= achievable_hi:
        out.error("bands_gap", loc, f"no band covers totals {cursor}..{achievable_hi}")
