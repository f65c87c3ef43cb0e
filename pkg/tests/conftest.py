"""Shared tables and helpers for the test suite."""
from __future__ import annotations

import pytest

from ospmatch.core import PreferenceProfile, PrioritySet


def q_of(*rows: str) -> PrioritySet:
    """Priority set from letter rows, e.g. q_of("abc", "acb", "bac")."""
    return PrioritySet.from_rankings(
        tuple(tuple("abcdefg".index(ch) for ch in row) for row in rows)
    )


def p_of(*rows: tuple[int, ...]) -> PreferenceProfile:
    """Preference profile from 1-based position tuples."""
    return PreferenceProfile.from_rankings(
        tuple(tuple(x - 1 for x in row) for row in rows)
    )


# The irreducible non-implementable tables (letters by subfigure).
FIG_A = q_of("abc", "bca", "cab")
FIG_B = (q_of("abc", "abc", "cab"), q_of("abc", "abc", "cba"), q_of("abc", "abc", "bca"))
FIG_C = q_of("abc", "acb", "cba")
FIG_D = q_of("abc", "bac", "cba")
FIG_E = q_of("abcd", "abdc", "acbd", "bacd")

# The one cyclic-but-implementable 3x3 table and its clinch-tree twin.
TAA3 = q_of("abc", "acb", "bac")

# Six applicants, four shared lists plus the two alternating ones.
STAR6 = PrioritySet.from_rankings((
    (0, 1, 2, 3, 4, 5),
    (0, 1, 2, 3, 4, 5),
    (0, 1, 2, 3, 4, 5),
    (0, 1, 2, 3, 4, 5),
    (0, 2, 1, 4, 3, 5),
    (1, 0, 3, 2, 5, 4),
))


@pytest.fixture(scope="session")
def taa3_tree():
    from ospmatch.synth import synthesize

    return synthesize(TAA3)


@pytest.fixture(scope="session")
def star6_tree():
    from ospmatch.synth import synthesize

    return synthesize(STAR6)
