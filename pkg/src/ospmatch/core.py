"""Core domain types for one-sided matching markets with fixed priorities.

Applicants and positions are 0-based indices internally.  Human-facing
names (``a, b, c, ...`` for applicants, ``1, 2, 3, ...`` for positions)
are applied only at the I/O boundary (see :mod:`ospmatch.jsonio`).

All types here are immutable and hashable; every operation is a pure
function, so everything is safe to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterator, Sequence

Ranking = tuple[int, ...]


def _check_permutation(ranking: Sequence[int], n: int) -> None:
    if len(ranking) != n or sorted(ranking) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {ranking!r}")


@lru_cache(maxsize=None)
def all_rankings(n: int) -> tuple[Ranking, ...]:
    """All n! rankings of 0..n-1 in lexicographic order."""
    return tuple(permutations(range(n)))


@lru_cache(maxsize=None)
def _ranking_index(n: int) -> dict[Ranking, int]:
    return {r: i for i, r in enumerate(all_rankings(n))}


def ranking_id(ranking: Ranking) -> int:
    """Lexicographic rank of a ranking among all rankings of its length."""
    return _ranking_index(len(ranking))[tuple(ranking)]


@dataclass(frozen=True)
class Order:
    """A strict total order over 0..n-1, best first.

    ``prefers(x, y)`` is True iff x appears strictly before y.
    """

    ranking: Ranking

    def __post_init__(self) -> None:
        ranking = tuple(self.ranking)
        _check_permutation(ranking, len(ranking))
        object.__setattr__(self, "ranking", ranking)
        inverse = [0] * len(ranking)
        for spot, item in enumerate(ranking):
            inverse[item] = spot
        object.__setattr__(self, "_rank", tuple(inverse))

    @property
    def n(self) -> int:
        return len(self.ranking)

    def rank_of(self, item: int) -> int:
        return self._rank[item]  # type: ignore[attr-defined]

    def prefers(self, x: int, y: int) -> bool:
        return self.rank_of(x) < self.rank_of(y)

    def top(self) -> int:
        return self.ranking[0]

    def best_of(self, items) -> int:
        """Favorite element among ``items`` (must be nonempty)."""
        for item in self.ranking:
            if item in items:
                return item
        raise ValueError("no item of the order lies in the given set")


@dataclass(frozen=True)
class PrioritySet:
    """One strict ranking of the n applicants per position."""

    lists: tuple[Order, ...]

    def __post_init__(self) -> None:
        lists = tuple(
            o if isinstance(o, Order) else Order(tuple(o)) for o in self.lists
        )
        object.__setattr__(self, "lists", lists)
        n = len(lists)
        if n == 0:
            raise ValueError("a market needs at least one position")
        for order in lists:
            if order.n != n:
                raise ValueError("priority lists must rank all n applicants")

    @classmethod
    def from_rankings(cls, rankings: Sequence[Sequence[int]]) -> "PrioritySet":
        return cls(tuple(Order(tuple(r)) for r in rankings))

    @property
    def n(self) -> int:
        return len(self.lists)

    @property
    def rankings(self) -> tuple[Ranking, ...]:
        return tuple(o.ranking for o in self.lists)

    def rank_table(self) -> tuple[tuple[int, ...], ...]:
        """rank_table()[position][applicant] -> priority index (0 = best)."""
        return tuple(o._rank for o in self.lists)  # type: ignore[attr-defined]


@dataclass(frozen=True)
class PreferenceProfile:
    """One strict ranking of the n positions per applicant."""

    prefs: tuple[Order, ...]

    def __post_init__(self) -> None:
        prefs = tuple(
            o if isinstance(o, Order) else Order(tuple(o)) for o in self.prefs
        )
        object.__setattr__(self, "prefs", prefs)
        n = len(prefs)
        if n == 0:
            raise ValueError("a market needs at least one applicant")
        for order in prefs:
            if order.n != n:
                raise ValueError("preference lists must rank all n positions")

    @classmethod
    def from_rankings(cls, rankings: Sequence[Sequence[int]]) -> "PreferenceProfile":
        return cls(tuple(Order(tuple(r)) for r in rankings))

    @property
    def n(self) -> int:
        return len(self.prefs)

    @property
    def rankings(self) -> tuple[Ranking, ...]:
        return tuple(o.ranking for o in self.prefs)


@dataclass(frozen=True)
class Matching:
    """A bijection between applicants and positions."""

    applicant_to_position: Ranking

    def __post_init__(self) -> None:
        a2p = tuple(self.applicant_to_position)
        _check_permutation(a2p, len(a2p))
        object.__setattr__(self, "applicant_to_position", a2p)
        p2a = [0] * len(a2p)
        for applicant, position in enumerate(a2p):
            p2a[position] = applicant
        object.__setattr__(self, "position_to_applicant", tuple(p2a))

    @property
    def n(self) -> int:
        return len(self.applicant_to_position)

    def position_of(self, applicant: int) -> int:
        return self.applicant_to_position[applicant]

    def applicant_at(self, position: int) -> int:
        return self.position_to_applicant[position]  # type: ignore[attr-defined]


@dataclass(frozen=True)
class Restriction:
    """Equal-size subsets of applicants (S) and positions (T)."""

    applicants: tuple[int, ...]
    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        s = tuple(sorted(set(self.applicants)))
        t = tuple(sorted(set(self.positions)))
        if len(s) != len(self.applicants) or len(t) != len(self.positions):
            raise ValueError("restriction subsets must not repeat indices")
        if len(s) != len(t) or not s:
            raise ValueError("restriction needs equal-size nonempty subsets")
        object.__setattr__(self, "applicants", s)
        object.__setattr__(self, "positions", t)

    @property
    def m(self) -> int:
        return len(self.applicants)


# ---------------------------------------------------------------------------
# Raw-table helpers.  The hot paths (exhaustive sweeps) work on plain tuples
# of rankings rather than on the dataclasses above.
# ---------------------------------------------------------------------------

def restrict_ranking(ranking: Ranking, keep: Sequence[int]) -> Ranking:
    """Filter a ranking to ``keep`` and relabel by sorted order to 0..m-1."""
    relabel = {item: i for i, item in enumerate(sorted(keep))}
    return tuple(relabel[x] for x in ranking if x in relabel)


def restrict_table(
    lists: Sequence[Ranking], applicants: Sequence[int], positions: Sequence[int]
) -> tuple[Ranking, ...]:
    return tuple(restrict_ranking(lists[t], applicants) for t in sorted(positions))


def relabel_table(
    lists: Sequence[Ranking],
    applicant_map: Sequence[int],
    position_map: Sequence[int] | None = None,
) -> tuple[Ranking, ...]:
    """Apply a relabeling: applicant x becomes applicant_map[x]; the list of
    position i moves to slot position_map[i] (identity if omitted)."""
    relabeled = [tuple(applicant_map[x] for x in lst) for lst in lists]
    if position_map is None:
        return tuple(relabeled)
    out: list[Ranking] = [()] * len(lists)
    for i, lst in enumerate(relabeled):
        out[position_map[i]] = lst
    return tuple(out)


def canonical_table(lists: Sequence[Ranking]) -> tuple[Ranking, ...]:
    """Least representative of a priority table under relabeling.

    Positions count as an unordered multiset of lists, so the result is
    minimized over every applicant relabeling with the lists sorted
    lexicographically.  Two tables are relabel-equivalent iff their
    canonical tables are equal.
    """
    lists = tuple(tuple(lst) for lst in lists)
    k = len(lists[0])
    best: tuple[Ranking, ...] | None = None
    for sigma in permutations(range(k)):
        candidate = tuple(sorted(tuple(sigma[x] for x in lst) for lst in lists))
        if best is None or candidate < best:
            best = candidate
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Spec operations on the dataclass layer.
# ---------------------------------------------------------------------------

def restrict(q: PrioritySet, r: Restriction) -> PrioritySet:
    """Priorities induced on r.applicants x r.positions, with indices
    relabeled order-preservingly to 0..m-1."""
    if r.applicants[-1] >= q.n or r.positions[-1] >= q.n:
        raise ValueError("restriction indices out of range for this market")
    return PrioritySet.from_rankings(
        restrict_table(q.rankings, r.applicants, r.positions)
    )


def canonical_form(q: PrioritySet) -> PrioritySet:
    return PrioritySet.from_rankings(canonical_table(q.rankings))


def relabel(
    q: PrioritySet,
    applicant_map: Sequence[int],
    position_map: Sequence[int] | None = None,
) -> PrioritySet:
    return PrioritySet.from_rankings(
        relabel_table(q.rankings, applicant_map, position_map)
    )


def priority_set_count(n: int) -> int:
    return math.factorial(n) ** n


def priority_set_from_index(n: int, index: int) -> PrioritySet:
    """The index-th set of enumerate_priority_sets(n); position 0 is the
    most significant digit in base n!."""
    base = math.factorial(n)
    if not 0 <= index < base**n:
        raise ValueError("enumeration index out of range")
    rankings = all_rankings(n)
    digits = []
    for _ in range(n):
        index, d = divmod(index, base)
        digits.append(d)
    return PrioritySet.from_rankings(rankings[d] for d in reversed(digits))


def enumerate_priority_sets(
    n: int, start: int = 0, stop: int | None = None
) -> Iterator[PrioritySet]:
    """Yield all (n!)^n priority sets exactly once, in a fixed order.

    The stream is restartable: ``start``/``stop`` select an index range,
    which is how exhaustive sweeps shard work across threads.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    total = priority_set_count(n)
    stop = total if stop is None else min(stop, total)
    for index in range(start, stop):
        yield priority_set_from_index(n, index)


def restrictions(n: "int | PrioritySet", m: int) -> Iterator[Restriction]:
    """All C(n,m)^2 restrictions of an n-market to size m, in a fixed order
    (applicant subsets outermost, both in ascending combination order).
    Accepts the market size or a priority set."""
    if isinstance(n, PrioritySet):
        n = n.n
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    for s in combinations(range(n), m):
        for t in combinations(range(n), m):
            yield Restriction(s, t)
