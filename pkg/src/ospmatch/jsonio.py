"""JSON formats for priorities, profiles, matchings, subdomains, and trees.

Applicants are named by lowercase tokens (default ``a, b, c, ...``) and
positions by the numerals ``1..n``; everything internal is a 0-based
index, so name mapping happens only here.  Parsing validates permutation
structure and raises :class:`FormatError` with a pointered message.
"""
from __future__ import annotations

import re
import string
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .core import (
    Matching,
    PreferenceProfile,
    PrioritySet,
    Ranking,
    all_rankings,
    ranking_id,
)
from .mechanism import Internal, Leaf, MechanismTree, Node
from .witness import Improvement, Subdomain, WitnessReport

_NAME_RE = re.compile(r"[a-z][a-z0-9]*\Z")


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class Names:
    applicants: tuple[str, ...]
    positions: tuple[str, ...]

    def applicant_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.applicants)}

    def position_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.positions)}


def default_names(n: int) -> Names:
    if n > 26:
        raise FormatError("default names cover at most 26 applicants")
    return Names(
        tuple(string.ascii_lowercase[:n]),
        tuple(str(i + 1) for i in range(n)),
    )


def _expect_mapping(doc: Any, what: str) -> Mapping[str, Any]:
    if not isinstance(doc, Mapping):
        raise FormatError(f"{what}: expected a JSON object")
    return doc


def _expect_n(doc: Mapping[str, Any], what: str) -> int:
    n = doc.get("n")
    if not isinstance(n, int) or n < 1:
        raise FormatError(f"{what}: field 'n' must be a positive integer")
    return n


def _ranking_from_names(
    row: Any, index: Mapping[str, int], where: str
) -> Ranking:
    if not isinstance(row, Sequence) or isinstance(row, str):
        raise FormatError(f"{where}: expected a list of names")
    seen = []
    for token in row:
        if token not in index:
            raise FormatError(f"{where}: unknown name {token!r}")
        seen.append(index[token])
    if sorted(seen) != list(range(len(index))):
        raise FormatError(f"{where}: not a permutation of all {len(index)} names")
    return tuple(seen)


def parse_priorities(doc: Any) -> tuple[PrioritySet, Names]:
    doc = _expect_mapping(doc, "priorities")
    n = _expect_n(doc, "priorities")
    rows = doc.get("priorities")
    if not isinstance(rows, Sequence) or len(rows) != n:
        raise FormatError("priorities: field 'priorities' must list one row per position")
    first = rows[0]
    if not isinstance(first, Sequence) or isinstance(first, str):
        raise FormatError("priorities[0]: expected a list of applicant names")
    tokens = sorted(set(first))
    if len(tokens) != n:
        raise FormatError("priorities[0]: needs n distinct applicant names")
    for token in tokens:
        if not isinstance(token, str) or not _NAME_RE.match(token):
            raise FormatError(f"priorities: applicant name {token!r} is not a lowercase token")
    names = Names(tuple(tokens), tuple(str(i + 1) for i in range(n)))
    index = names.applicant_index()
    rankings = tuple(
        _ranking_from_names(row, index, f"priorities[{i}]") for i, row in enumerate(rows)
    )
    return PrioritySet.from_rankings(rankings), names


def priorities_to_doc(q: PrioritySet, names: Names | None = None) -> dict[str, Any]:
    names = names or default_names(q.n)
    return {
        "n": q.n,
        "priorities": [
            [names.applicants[a] for a in order.ranking] for order in q.lists
        ],
    }


def parse_profile(doc: Any, names: Names | None = None) -> tuple[PreferenceProfile, Names]:
    doc = _expect_mapping(doc, "preferences")
    n = _expect_n(doc, "preferences")
    rows = doc.get("preferences")
    if not isinstance(rows, Sequence) or len(rows) != n:
        raise FormatError("preferences: field 'preferences' must list one row per applicant")
    names = names or default_names(n)
    if len(names.positions) != n:
        raise FormatError("preferences: size differs from the named market")
    index = names.position_index()
    rankings = tuple(
        _ranking_from_names(row, index, f"preferences[{i}]") for i, row in enumerate(rows)
    )
    return PreferenceProfile.from_rankings(rankings), names


def profile_to_doc(p: PreferenceProfile, names: Names | None = None) -> dict[str, Any]:
    names = names or default_names(p.n)
    return {
        "n": p.n,
        "preferences": [
            [names.positions[x] for x in order.ranking] for order in p.prefs
        ],
    }


def matching_to_doc(mu: Matching, names: Names | None = None) -> dict[str, Any]:
    names = names or default_names(mu.n)
    return {
        "matching": {
            names.applicants[a]: names.positions[mu.position_of(a)]
            for a in range(mu.n)
        }
    }


def subdomain_to_doc(subdomain: Subdomain, names: Names | None = None) -> dict[str, Any]:
    names = names or default_names(subdomain.n)
    return {
        "n": subdomain.n,
        "types": {
            names.applicants[i]: [
                [names.positions[x] for x in ranking] for ranking in type_list
            ]
            for i, type_list in enumerate(subdomain.type_lists)
        },
    }


def parse_subdomain(doc: Any, names: Names | None = None) -> tuple[Subdomain, Names]:
    doc = _expect_mapping(doc, "subdomain")
    n = _expect_n(doc, "subdomain")
    names = names or default_names(n)
    types = doc.get("types")
    if not isinstance(types, Mapping) or set(types) != set(names.applicants):
        raise FormatError("subdomain: field 'types' must map every applicant name")
    index = names.position_index()
    type_lists = tuple(
        tuple(
            _ranking_from_names(row, index, f"types[{name}][{j}]")
            for j, row in enumerate(types[name])
        )
        for name in names.applicants
    )
    try:
        return Subdomain(type_lists), names
    except ValueError as exc:
        raise FormatError(f"subdomain: {exc}") from exc


def improvement_to_doc(imp: Improvement, names: Names) -> dict[str, Any]:
    def prof(rankings: tuple[Ranking, ...]) -> list[list[str]]:
        return [[names.positions[x] for x in r] for r in rankings]

    return {
        "applicant": names.applicants[imp.applicant],
        "truth": [names.positions[x] for x in imp.truth],
        "lie": [names.positions[x] for x in imp.lie],
        "truth_profile": prof(imp.truth_profile),
        "lie_profile": prof(imp.lie_profile),
        "truth_position": names.positions[imp.truth_position],
        "lie_position": names.positions[imp.lie_position],
    }


def witness_report_to_doc(report: WitnessReport, names: Names) -> dict[str, Any]:
    return {
        "ok": report.ok,
        "improvements": [improvement_to_doc(i, names) for i in report.improvements],
    }


# ---------------------------------------------------------------------------
# Mechanism trees: nodes serialized in preorder with explicit child type-id
# lists; type ids index into the owning applicant's universe list.
# ---------------------------------------------------------------------------

def tree_to_doc(tree: MechanismTree, names: Names | None = None) -> dict[str, Any]:
    names = names or default_names(tree.n)
    rankings = all_rankings(tree.n)
    universes = [
        [[names.positions[x] for x in rankings[t]] for t in universe]
        for universe in tree.universes
    ]
    local = [
        {t: j for j, t in enumerate(universe)} for universe in tree.universes
    ]
    order = list(tree.nodes())
    ids = {id(node): i for i, node in order}
    nodes: list[dict[str, Any]] = []
    for _, node in order:
        if isinstance(node, Leaf):
            nodes.append({
                "matching": {
                    names.applicants[a]: names.positions[x]
                    for a, x in enumerate(node.matching)
                }
            })
        else:
            nodes.append({
                "player": names.applicants[node.player],
                "children": [
                    {
                        "types": [local[node.player][t] for t in types],
                        "node": ids[id(child)],
                    }
                    for types, child in node.children
                ],
            })
    return {
        "n": tree.n,
        "applicants": list(names.applicants),
        "positions": list(names.positions),
        "universes": universes,
        "nodes": nodes,
    }


def parse_tree(doc: Any) -> tuple[MechanismTree, Names]:
    doc = _expect_mapping(doc, "tree")
    n = _expect_n(doc, "tree")
    applicants = doc.get("applicants")
    positions = doc.get("positions")
    if (
        not isinstance(applicants, Sequence)
        or not isinstance(positions, Sequence)
        or len(applicants) != n
        or len(positions) != n
    ):
        raise FormatError("tree: 'applicants' and 'positions' must name n entries each")
    names = Names(tuple(applicants), tuple(positions))
    pos_index = names.position_index()
    raw_universes = doc.get("universes")
    if not isinstance(raw_universes, Sequence) or len(raw_universes) != n:
        raise FormatError("tree: 'universes' must list one type list per applicant")
    # "types" entries index into the universe lists as given; the in-memory
    # tree keeps universes sorted by lexicographic ranking id.
    given: list[tuple[int, ...]] = []
    universes: list[tuple[int, ...]] = []
    for i, universe in enumerate(raw_universes):
        ids = [
            ranking_id(_ranking_from_names(row, pos_index, f"universes[{i}][{j}]"))
            for j, row in enumerate(universe)
        ]
        if len(set(ids)) != len(ids) or not ids:
            raise FormatError(f"universes[{i}]: empty or repeats an order")
        given.append(tuple(ids))
        universes.append(tuple(sorted(ids)))
    records = doc.get("nodes")
    if not isinstance(records, Sequence) or not records:
        raise FormatError("tree: 'nodes' must be a nonempty list")
    app_index = names.applicant_index()
    visited: set[int] = set()

    def build(idx: int) -> Node:
        if not isinstance(idx, int) or not 0 <= idx < len(records):
            raise FormatError(f"tree: node reference {idx!r} out of range")
        if idx in visited:
            raise FormatError(f"tree: node {idx} referenced twice")
        visited.add(idx)
        record = _expect_mapping(records[idx], f"nodes[{idx}]")
        if "matching" in record:
            mapping = record["matching"]
            if not isinstance(mapping, Mapping) or set(mapping) != set(names.applicants):
                raise FormatError(f"nodes[{idx}]: matching must assign every applicant")
            try:
                matching = tuple(
                    pos_index[mapping[name]] for name in names.applicants
                )
            except KeyError as exc:
                raise FormatError(f"nodes[{idx}]: unknown position {exc}") from exc
            if sorted(matching) != list(range(n)):
                raise FormatError(f"nodes[{idx}]: matching is not a bijection")
            return Leaf(matching)
        player_name = record.get("player")
        if player_name not in app_index:
            raise FormatError(f"nodes[{idx}]: unknown player {player_name!r}")
        player = app_index[player_name]
        children_doc = record.get("children")
        if not isinstance(children_doc, Sequence) or not children_doc:
            raise FormatError(f"nodes[{idx}]: internal node needs children")
        children = []
        for child in children_doc:
            child = _expect_mapping(child, f"nodes[{idx}].children")
            local_ids = child.get("types")
            if not isinstance(local_ids, Sequence) or not local_ids:
                raise FormatError(f"nodes[{idx}]: child needs a type list")
            try:
                types = tuple(sorted(given[player][j] for j in local_ids))
            except (TypeError, IndexError) as exc:
                raise FormatError(f"nodes[{idx}]: bad type index") from exc
            children.append((types, build(child.get("node"))))
        return Internal(player, tuple(children))

    root = build(0)
    if len(visited) != len(records):
        raise FormatError("tree: some nodes are unreachable from the root")
    return MechanismTree(n, tuple(universes), root), names
