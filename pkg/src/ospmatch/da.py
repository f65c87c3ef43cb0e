"""Applicant-proposing deferred acceptance and its correctness oracles."""
from __future__ import annotations

from itertools import permutations
from typing import Sequence

from .core import Matching, PreferenceProfile, PrioritySet, Ranking

# Round-by-round proposal cells: cells[position][round] is the ascending
# list of applicants proposing to that position in that round.
Transcript = list[list[list[int]]]


def da_match(rank_by_pos: Sequence[Sequence[int]], prefs: Sequence[Ranking]) -> Ranking:
    """Fast core: applicant-optimal stable matching on raw tables.

    Proposals are processed one applicant at a time (McVitie-Wilson);
    the outcome is order-independent, so this matches the simultaneous
    round form used for transcripts.
    """
    n = len(prefs)
    next_choice = [0] * n
    held: list[int] = [-1] * n
    free = list(range(n - 1, -1, -1))
    while free:
        a = free.pop()
        pref = prefs[a]
        while True:
            x = pref[next_choice[a]]
            next_choice[a] += 1
            incumbent = held[x]
            if incumbent < 0:
                held[x] = a
                break
            ranks = rank_by_pos[x]
            if ranks[a] < ranks[incumbent]:
                held[x] = a
                a = incumbent
                pref = prefs[a]
            # rejected: continue down the same applicant's list
    matching = [0] * n
    for x, a in enumerate(held):
        matching[a] = x
    return tuple(matching)


def run_da(q: PrioritySet, p: PreferenceProfile) -> Matching:
    """DA^q: the applicant-optimal stable matching for profile p."""
    if q.n != p.n:
        raise ValueError("priorities and profile disagree on market size")
    return Matching(da_match(q.rank_table(), p.rankings))


def proposal_rounds(q: PrioritySet, p: PreferenceProfile) -> tuple[Transcript, Matching]:
    """Run DA in simultaneous rounds, recording who proposes where.

    In each round every currently unheld applicant proposes (in ascending
    index order) to their favorite position not yet proposed to; each
    position then keeps its highest-priority proposer.
    """
    if q.n != p.n:
        raise ValueError("priorities and profile disagree on market size")
    n = q.n
    ranks = q.rank_table()
    prefs = p.rankings
    next_choice = [0] * n
    held: list[int] = [-1] * n
    unmatched = set(range(n))
    rounds: list[dict[int, list[int]]] = []
    while unmatched:
        proposals: dict[int, list[int]] = {}
        for a in sorted(unmatched):
            x = prefs[a][next_choice[a]]
            next_choice[a] += 1
            proposals.setdefault(x, []).append(a)
        rounds.append(proposals)
        for x, proposers in proposals.items():
            contenders = proposers if held[x] < 0 else proposers + [held[x]]
            winner = min(contenders, key=ranks[x].__getitem__)
            for loser in contenders:
                if loser is not winner:
                    unmatched.add(loser)
            unmatched.discard(winner)
            held[x] = winner
    assert len(rounds) <= n * n
    cells = [[rnd.get(x, []) for rnd in rounds] for x in range(n)]
    matching = [0] * n
    for x, a in enumerate(held):
        matching[a] = x
    return cells, Matching(tuple(matching))


def render_transcript(cells: Transcript, applicant_names: Sequence[str],
                      position_names: Sequence[str]) -> str:
    """Format proposal rounds as the usual table: rows are positions,
    columns are rounds, cell entries are the proposing applicants."""
    body = [[" ".join(applicant_names[a] for a in cell) for cell in row]
            for row in cells]
    n_rounds = len(body[0]) if body else 0
    widths = [max(len(row[r]) for row in body) for r in range(n_rounds)]
    name_w = max(len(name) for name in position_names)
    lines = []
    for x, row in enumerate(body):
        padded = [row[r].ljust(widths[r]) for r in range(n_rounds)]
        lines.append(" | ".join([position_names[x].ljust(name_w)] + padded).rstrip())
    return "\n".join(lines)


def is_stable(q: PrioritySet, p: PreferenceProfile, mu: Matching) -> bool:
    """True iff no applicant-position pair blocks mu."""
    if not (q.n == p.n == mu.n):
        raise ValueError("inconsistent market sizes")
    for a in range(q.n):
        pref = p.prefs[a]
        matched = mu.position_of(a)
        for x in range(q.n):
            if x == matched:
                continue
            if pref.prefers(x, matched) and q.lists[x].prefers(a, mu.applicant_at(x)):
                return False
    return True


def all_stable_matchings(q: PrioritySet, p: PreferenceProfile) -> list[Matching]:
    """Brute-force oracle: every stable matching, by trying all n! bijections."""
    if q.n > 6:
        raise ValueError("brute-force stability oracle is capped at n = 6")
    out = []
    for perm in permutations(range(q.n)):
        mu = Matching(perm)
        if is_stable(q, p, mu):
            out.append(mu)
    return out


def applicant_optimal(q: PrioritySet, p: PreferenceProfile, mu: Matching) -> bool:
    """True iff mu weakly beats every stable matching for every applicant."""
    for other in all_stable_matchings(q, p):
        for a in range(q.n):
            ours, theirs = mu.position_of(a), other.position_of(a)
            if ours != theirs and p.prefs[a].prefers(theirs, ours):
                return False
    return True
