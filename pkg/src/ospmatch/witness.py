"""Negative certificates: restricted type spaces on which deferred
acceptance provably admits no OSP implementation.

A witness subdomain gives each applicant one to three full preference
orders.  It certifies non-implementability when, for every applicant with
two types, some lie beats some truth (against possibly different
opponents), and for every applicant with three types, every truth is
beaten by some lie.  The bundled fixtures are the worked case analyses
for each forbidden pattern.
"""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from typing import Sequence

from .core import PrioritySet, Ranking, relabel_table
from .da import da_match


@dataclass(frozen=True)
class Subdomain:
    """Per-applicant lists of full preference orders (1 to 3 each)."""

    type_lists: tuple[tuple[Ranking, ...], ...]

    def __post_init__(self) -> None:
        lists = tuple(tuple(tuple(r) for r in ts) for ts in self.type_lists)
        object.__setattr__(self, "type_lists", lists)
        n = len(lists)
        for i, ts in enumerate(lists):
            if not 1 <= len(ts) <= 3:
                raise ValueError(f"applicant {i} needs 1 to 3 types, got {len(ts)}")
            if len(set(ts)) != len(ts):
                raise ValueError(f"applicant {i} repeats a type")
            for r in ts:
                if sorted(r) != list(range(n)):
                    raise ValueError(f"applicant {i} holds a malformed order {r}")
        if all(len(ts) == 1 for ts in lists):
            raise ValueError("some applicant must hold more than one type")

    @property
    def n(self) -> int:
        return len(self.type_lists)


@dataclass(frozen=True)
class Improvement:
    """One realized strict gain: under ``truth`` the applicant would get
    ``truth_position`` against one opponent profile, while lying with
    ``lie`` against another yields the strictly better ``lie_position``."""

    applicant: int
    truth: Ranking
    lie: Ranking
    truth_profile: tuple[Ranking, ...]
    lie_profile: tuple[Ranking, ...]
    truth_position: int
    lie_position: int


@dataclass(frozen=True)
class WitnessReport:
    ok: bool
    improvements: tuple[Improvement, ...]
    failed_applicant: int | None = None
    failed_truth: Ranking | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_witness(q: PrioritySet, subdomain: Subdomain) -> WitnessReport:
    """Exhaustively test both witness conditions against DA under q."""
    if subdomain.n != q.n:
        raise ValueError("subdomain size does not match the priorities")
    ranks = q.rank_table()
    lists = subdomain.type_lists
    outcome_cache: dict[tuple[Ranking, ...], Ranking] = {}

    def outcome(profile: tuple[Ranking, ...]) -> Ranking:
        got = outcome_cache.get(profile)
        if got is None:
            got = da_match(ranks, profile)
            outcome_cache[profile] = got
        return got

    others_cache: dict[int, tuple[tuple[Ranking, ...], ...]] = {}

    def others(i: int) -> tuple[tuple[Ranking, ...], ...]:
        got = others_cache.get(i)
        if got is None:
            got = tuple(product(*(lists[j] for j in range(q.n) if j != i)))
            others_cache[i] = got
        return got

    def assemble(i: int, own: Ranking, rest: Sequence[Ranking]) -> tuple[Ranking, ...]:
        return tuple(rest[:i]) + (own,) + tuple(rest[i:])

    def beat(i: int, truth: Ranking) -> Improvement | None:
        # a lie beats the truth iff the best lie outcome improves on the
        # worst truthful outcome, each over all opponent combinations
        rank_of = {pos: spot for spot, pos in enumerate(truth)}
        worst_rank = -1
        worst_profile: tuple[Ranking, ...] | None = None
        for rest in others(i):
            profile = assemble(i, truth, rest)
            rank = rank_of[outcome(profile)[i]]
            if rank > worst_rank:
                worst_rank, worst_profile = rank, profile
        assert worst_profile is not None
        for lie in lists[i]:
            if lie == truth:
                continue
            for rest in others(i):
                profile = assemble(i, lie, rest)
                got = outcome(profile)[i]
                if rank_of[got] < worst_rank:
                    return Improvement(i, truth, lie, worst_profile, profile,
                                       truth[worst_rank], got)
        return None

    improvements: list[Improvement] = []
    for i, ts in enumerate(lists):
        if len(ts) == 1:
            continue
        required = ts if len(ts) == 3 else None
        if required is None:
            found = next(
                (imp for truth in ts if (imp := beat(i, truth)) is not None), None
            )
            if found is None:
                return WitnessReport(False, tuple(improvements), i)
            improvements.append(found)
        else:
            for truth in required:
                found = beat(i, truth)
                if found is None:
                    return WitnessReport(False, tuple(improvements), i, truth)
                improvements.append(found)
    return WitnessReport(True, tuple(improvements))


# ---------------------------------------------------------------------------
# Randomized search
# ---------------------------------------------------------------------------

_SIZE_CHOICES = (1, 2, 2, 2, 3, 3, 3)


def _sample_subdomain(rng: random.Random, n: int) -> Subdomain:
    """Random subdomain, biased so the sampled types of one applicant tend
    to disagree already in their top two positions."""
    sizes = [rng.choice(_SIZE_CHOICES) for _ in range(n)]
    if max(sizes) == 1:
        sizes[rng.randrange(n)] = 2
    base = list(range(n))
    type_lists = []
    for size in sizes:
        chosen: list[Ranking] = []
        tops: set[tuple[int, int]] = set()
        while len(chosen) < size:
            candidate = None
            for _ in range(6):
                rng.shuffle(base)
                candidate = tuple(base)
                if candidate not in chosen and candidate[:2] not in tops:
                    break
            if candidate in chosen:
                continue
            chosen.append(candidate)
            tops.add(candidate[:2])
        type_lists.append(tuple(chosen))
    return Subdomain(tuple(type_lists))


def _search_range(q: PrioritySet, seed: int, lo: int, hi: int) -> tuple[int, Subdomain] | None:
    for i in range(lo, hi):
        rng = random.Random(f"{seed}/{i}")
        candidate = _sample_subdomain(rng, q.n)
        if check_witness(q, candidate).ok:
            return i, candidate
    return None


def find_witness(
    q: PrioritySet, budget: int, seed: int, threads: int = 1
) -> Subdomain | None:
    """Sample subdomains until one passes check_witness or the budget runs
    out.  Iteration i draws from its own stream derived from (seed, i), so
    the result is reproducible and independent of the thread count."""
    if threads <= 1:
        found = _search_range(q, seed, 0, budget)
        return None if found is None else found[1]
    chunk = 512
    spans = [(lo, min(lo + chunk, budget)) for lo in range(0, budget, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_search_range, q, seed, lo, hi) for lo, hi in spans]
        for future in futures:
            found = future.result()
            if found is not None:
                for later in futures:
                    later.cancel()
                return found[1]
    return None


# ---------------------------------------------------------------------------
# Bundled fixtures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessFixture:
    label: str
    pattern_letter: str
    priorities: PrioritySet
    subdomain: Subdomain


def _q(*rows: str) -> PrioritySet:
    return PrioritySet.from_rankings(
        tuple(tuple("abcd".index(ch) for ch in row) for row in rows)
    )


def _pref(*positions_1based: int) -> Ranking:
    return tuple(p - 1 for p in positions_1based)


def relabel_subdomain(
    subdomain: Subdomain,
    applicant_map: Sequence[int],
    position_map: Sequence[int],
) -> Subdomain:
    out: list[tuple[Ranking, ...]] = [()] * subdomain.n
    for i, ts in enumerate(subdomain.type_lists):
        out[applicant_map[i]] = tuple(tuple(position_map[p] for p in r) for r in ts)
    return Subdomain(tuple(out))


def _transport(
    fixture_q: PrioritySet, subdomain: Subdomain, target: PrioritySet
) -> Subdomain:
    """Carry a witness along some relabeling onto an equivalent table."""
    n = fixture_q.n
    source = fixture_q.rankings
    wanted = target.rankings
    for sigma in permutations(range(n)):
        for pi in permutations(range(n)):
            if relabel_table(source, sigma, pi) == wanted:
                return relabel_subdomain(subdomain, sigma, pi)
    raise ValueError("tables are not relabelings of one another")


# Two identical lists on top; only the third list's ranking of c above a
# matters, so one subdomain serves all three tables.
_TWO_SAME_SUBDOMAIN = Subdomain((
    (_pref(3, 1, 2), _pref(3, 2, 1)),
    (_pref(1, 2, 3), _pref(2, 1, 3)),
    (_pref(1, 2, 3), _pref(1, 3, 2), _pref(2, 3, 1)),
))

# Two lists sharing only their top applicant.
_SHARED_TOP_SUBDOMAIN = Subdomain((
    (_pref(3, 1, 2), _pref(3, 2, 1)),
    (_pref(1, 2, 3), _pref(2, 1, 3), _pref(2, 3, 1)),
    (_pref(1, 2, 3), _pref(1, 3, 2), _pref(2, 3, 1)),
))

# All three lists with distinct top applicants.
_DISTINCT_TOPS_Q = _q("abc", "bac", "cab")
_DISTINCT_TOPS_SUBDOMAIN = Subdomain((
    (_pref(2, 1, 3), _pref(3, 1, 2), _pref(3, 2, 1)),
    (_pref(3, 2, 1), _pref(1, 3, 2)),
    (_pref(2, 3, 1), _pref(1, 2, 3), _pref(1, 3, 2)),
))

# The fully cyclic table.  No worked case analysis exists for it, so this
# subdomain was produced by find_witness (seed 7, found at iteration 153)
# and frozen after verification by check_witness.
_FULLY_CYCLIC_SUBDOMAIN = Subdomain((
    (_pref(2, 3, 1), _pref(2, 1, 3), _pref(3, 2, 1)),
    (_pref(3, 2, 1), _pref(1, 2, 3), _pref(1, 3, 2)),
    (_pref(1, 3, 2), _pref(2, 1, 3)),
))

# The four-applicant table; unstated tail positions complete ascending.
_FOUR_SUBDOMAIN = Subdomain((
    (_pref(4, 2, 1, 3), _pref(4, 3, 1, 2)),
    (_pref(3, 1, 2, 4), _pref(3, 4, 1, 2)),
    (_pref(2, 3, 1, 4), _pref(3, 1, 2, 4)),
    (_pref(1, 2, 3, 4), _pref(2, 1, 3, 4)),
))


@lru_cache(maxsize=1)
def fixtures() -> tuple[WitnessFixture, ...]:
    """The bundled witnesses, covering every forbidden pattern letter."""
    out = [
        WitnessFixture("fully-cyclic", "a", _q("abc", "bca", "cab"),
                       _FULLY_CYCLIC_SUBDOMAIN),
        WitnessFixture("two-same/cab", "b", _q("abc", "abc", "cab"),
                       _TWO_SAME_SUBDOMAIN),
        WitnessFixture("two-same/cba", "b", _q("abc", "abc", "cba"),
                       _TWO_SAME_SUBDOMAIN),
        WitnessFixture("two-same/bca", "b", _q("abc", "abc", "bca"),
                       _TWO_SAME_SUBDOMAIN),
        WitnessFixture("shared-top", "c", _q("abc", "acb", "cba"),
                       _SHARED_TOP_SUBDOMAIN),
        WitnessFixture("distinct-tops/cab", "d", _DISTINCT_TOPS_Q,
                       _DISTINCT_TOPS_SUBDOMAIN),
    ]
    for suffix in ("cba", "bca"):
        target = _q("abc", "bac", "cba") if suffix == "cba" else _q("abc", "cba", "bca")
        out.append(WitnessFixture(
            f"distinct-tops/{suffix}", "d", target,
            _transport(_DISTINCT_TOPS_Q, _DISTINCT_TOPS_SUBDOMAIN, target),
        ))
    out.append(WitnessFixture("four-applicants", "e",
                              _q("abcd", "abdc", "acbd", "bacd"),
                              _FOUR_SUBDOMAIN))
    return tuple(out)


def fixture_for(q: PrioritySet) -> WitnessFixture | None:
    """Bundled fixture transported onto q, when q is a relabeling of one."""
    from .core import canonical_form

    target_canonical = canonical_form(q).rankings
    for fixture in fixtures():
        if canonical_form(fixture.priorities).rankings == target_canonical:
            return WitnessFixture(
                fixture.label,
                fixture.pattern_letter,
                q,
                _transport(fixture.priorities, fixture.subdomain, q),
            )
    return None
