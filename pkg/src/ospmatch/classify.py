"""Priority-structure predicates: cyclicity, block partitions, the
two-adjacent-alternating pattern, limited-cyclic classification, and the
forbidden-pattern restriction scanner."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Sequence

from .core import (
    PrioritySet,
    Ranking,
    Restriction,
    canonical_table,
    restrict_table,
    restrictions,
)

# The irreducible non-implementable priority tables, keyed by the letter of
# the subfigure they appear under.  Letter "b" covers three concrete tables
# that are *not* relabelings of one another (the two repeated lists pin the
# applicant labels); the other letters each name a single relabeling class.
def _tbl(*rows: str) -> tuple[Ranking, ...]:
    return tuple(tuple("abcd".index(c) for c in row) for row in rows)


FORBIDDEN_TABLES: tuple[tuple[str, tuple[Ranking, ...]], ...] = (
    ("a", _tbl("abc", "bca", "cab")),
    ("b", _tbl("abc", "abc", "cab")),
    ("b", _tbl("abc", "abc", "cba")),
    ("b", _tbl("abc", "abc", "bca")),
    ("c", _tbl("abc", "acb", "cba")),
    ("d", _tbl("abc", "bac", "cba")),
    ("e", _tbl("abcd", "abdc", "acbd", "bacd")),
)


@lru_cache(maxsize=1)
def forbidden_patterns() -> tuple[tuple[str, tuple[Ranking, ...]], ...]:
    """(letter, canonical table) pairs; canonical tables pairwise distinct."""
    out = tuple((letter, canonical_table(table)) for letter, table in FORBIDDEN_TABLES)
    assert len({tbl for _, tbl in out}) == len(out)
    return out


@lru_cache(maxsize=1)
def _forbidden_lookup() -> dict[tuple[Ranking, ...], str]:
    return {table: letter for letter, table in forbidden_patterns()}


@dataclass(frozen=True)
class TaaLabeling:
    """Witness that a table is two-adjacent-alternating: the applicant
    order a_1..a_k, the positions carrying the shared list x, and the two
    positions carrying the flipped lists u and v."""

    applicant_order: tuple[int, ...]
    x_positions: tuple[int, ...]
    u_position: int
    v_position: int


@dataclass(frozen=True)
class Classification:
    verdict: str  # "limited-cyclic" | "not-limited-cyclic"
    blocks: tuple[tuple[int, ...], ...] | None = None
    block_labelings: tuple[tuple[int, TaaLabeling], ...] | None = None
    witness: tuple[Restriction, str] | None = None

    @property
    def limited_cyclic(self) -> bool:
        return self.verdict == "limited-cyclic"


def is_cyclic(q: PrioritySet) -> bool:
    """Ergin cyclicity: some position ranks a above b above c while another
    ranks c above a."""
    tables = q.rank_table()
    n = q.n
    for a in range(n):
        for c in range(n):
            if a == c:
                continue
            if not any(ranks[c] - ranks[a] >= 2 for ranks in tables):
                continue
            if any(ranks[c] < ranks[a] for ranks in tables):
                return True
    return False


def _tops(lists: Sequence[Ranking]) -> set[int]:
    return {lst[0] for lst in lists}


def acyclic_partition(q: PrioritySet) -> list[set[int]] | None:
    """Ordered partition into blocks of size <= 2 with unanimous dominance
    between blocks, built by peeling the top one or two applicants; None
    when the priorities are cyclic."""
    lists = list(q.rankings)
    blocks: list[set[int]] = []
    while lists and lists[0]:
        tops = _tops(lists)
        if len(tops) > 2:
            return None
        if len(tops) == 2 and any(set(lst[:2]) != tops for lst in lists):
            return None
        blocks.append(tops)
        lists = [tuple(x for x in lst if x not in tops) for lst in lists]
    return blocks


def flip_adjacent(seq: Sequence[int]) -> tuple[int, ...]:
    """Swap consecutive pairs, leaving a trailing unpaired element alone."""
    out = list(seq)
    for i in range(0, len(out) - 1, 2):
        out[i], out[i + 1] = out[i + 1], out[i]
    return tuple(out)


def taa_patterns(base: Sequence[int]) -> tuple[Ranking, Ranking, Ranking]:
    """The (x, u, v) lists generated by the applicant order ``base``."""
    x = tuple(base)
    u = (x[0],) + flip_adjacent(x[1:])
    v = flip_adjacent(x)
    return x, u, v


def _match_taa(lists: Sequence[Ranking], base: Sequence[int]) -> TaaLabeling | None:
    x, u, v = taa_patterns(base)
    x_positions, u_positions, v_positions = [], [], []
    for pos, lst in enumerate(lists):
        if lst == x:
            x_positions.append(pos)
        elif lst == u:
            u_positions.append(pos)
        elif lst == v:
            v_positions.append(pos)
        else:
            return None
    if len(u_positions) != 1 or len(v_positions) != 1:
        return None
    if len(x_positions) != len(lists) - 2:
        return None
    return TaaLabeling(tuple(base), tuple(x_positions), u_positions[0], v_positions[0])


def taa_labeling_table(lists: Sequence[Ranking]) -> TaaLabeling | None:
    """Two-adjacent-alternating detection on a raw table of ``l`` lists over
    k applicants.  Searches every applicant labeling for k <= 7; for larger
    k the labeling is read off the repeated majority list directly.  Both
    routes decide the same predicate (cross-checked in tests)."""
    lists = tuple(tuple(lst) for lst in lists)
    k = len(lists[0])
    if len(lists) < 3 or k < 3:
        raise ValueError("two-adjacent-alternating needs >= 3 lists over >= 3 applicants")
    if k <= 7:
        for base in permutations(range(k)):
            found = _match_taa(lists, base)
            if found is not None:
                return found
        return None
    return _taa_by_fingerprint(lists)


def _taa_by_fingerprint(lists: Sequence[Ranking]) -> TaaLabeling | None:
    # x must appear exactly l-2 times, so candidate bases are the lists
    # with that multiplicity; each candidate pins a_1..a_k and hence u, v.
    target = len(lists) - 2
    counts: dict[Ranking, int] = {}
    for lst in lists:
        counts[lst] = counts.get(lst, 0) + 1
    for candidate, count in counts.items():
        if count != target:
            continue
        found = _match_taa(lists, candidate)
        if found is not None:
            return found
    return None


def is_two_adjacent_alternating(q: PrioritySet) -> TaaLabeling | None:
    return taa_labeling_table(q.rankings)


def dominance_blocks(lists: Sequence[Ranking]) -> list[tuple[int, ...]]:
    """Finest ordered partition with unanimous dominance between blocks.

    Applicants are taken in the first list's order; a boundary is cut
    exactly where every earlier applicant beats every later one on all
    lists.  Any pair some two positions disagree on therefore shares a
    block, and the result does not depend on which list anchors the order.
    """
    lists = tuple(tuple(lst) for lst in lists)
    k = len(lists[0])
    order = lists[0]
    rank_tables = []
    for lst in lists:
        ranks = [0] * k
        for spot, item in enumerate(lst):
            ranks[item] = spot
        rank_tables.append(ranks)

    def dominates(a: int, b: int) -> bool:
        return all(ranks[a] < ranks[b] for ranks in rank_tables)

    blocks: list[tuple[int, ...]] = []
    start = 0
    for end in range(1, k + 1):
        if end < k and not all(
            dominates(order[i], order[j])
            for i in range(start, end)
            for j in range(end, k)
        ):
            continue
        blocks.append(tuple(sorted(order[start:end])))
        start = end
    return blocks


def classify(q: PrioritySet) -> Classification:
    """Decide limited cyclicity via the finest dominance partition, checking
    that every block of three or more applicants restricts to a
    two-adjacent-alternating table over all positions."""
    lists = q.rankings
    blocks = tuple(dominance_blocks(lists))
    labelings: list[tuple[int, TaaLabeling]] = []
    for i, block in enumerate(blocks):
        if len(block) < 3:
            continue
        restricted = restrict_table(lists, block, range(q.n))
        found = taa_labeling_table(restricted)
        if found is None:
            witness = scan_forbidden(q)
            return Classification("not-limited-cyclic", witness=witness)
        # report the labeling in original applicant / position indices
        labelings.append((
            i,
            TaaLabeling(
                tuple(block[a] for a in found.applicant_order),
                found.x_positions,
                found.u_position,
                found.v_position,
            ),
        ))
    return Classification("limited-cyclic", blocks=blocks,
                          block_labelings=tuple(labelings))


@lru_cache(maxsize=200_000)
def _canonical_cached(lists: tuple[Ranking, ...]) -> tuple[Ranking, ...]:
    return canonical_table(lists)


def scan_forbidden(q: PrioritySet) -> tuple[Restriction, str] | None:
    """First restriction of size 3 or 4 that is a forbidden pattern up to
    relabeling, or None.  Sizes beyond 4 never need scanning: the pattern
    list is complete at those sizes."""
    lookup = _forbidden_lookup()
    lists = q.rankings
    for m in (3, 4):
        if m > q.n:
            break
        for r in restrictions(q.n, m):
            table = restrict_table(lists, r.applicants, r.positions)
            letter = lookup.get(_canonical_cached(table))
            if letter is not None:
                return r, letter
    return None
