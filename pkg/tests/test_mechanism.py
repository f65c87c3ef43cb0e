"""Tree validation, execution, and the implements/OSP checkers."""
from __future__ import annotations

import random
from itertools import product

import pytest

from conftest import FIG_A, STAR6, TAA3, p_of, q_of
from ospmatch.core import PreferenceProfile, PrioritySet, all_rankings
from ospmatch.da import da_match
from ospmatch.mechanism import (
    Internal,
    Leaf,
    MechanismTree,
    check_implements,
    check_osp,
    execute,
    execute_ids,
    full_universe,
    max_active_applicants,
    player_move_bound,
    restrict_environment,
    reveal_tree,
    validate,
)
from ospmatch.synth import synthesize


def test_validate_synthesized_tree(taa3_tree):
    assert validate(taa3_tree).ok


def test_validate_flags_overlapping_children():
    uni = full_universe(2)
    leaf = Leaf((0, 1))
    root = Internal(0, (((0, 1), leaf), ((1,), Leaf((1, 0)))))
    tree = MechanismTree(2, (uni, uni), root)
    report = validate(tree)
    assert not report.ok
    assert any("overlapping" in p for p in report.problems)


def test_validate_flags_missing_cover():
    uni = full_universe(2)
    root = Internal(0, (((0,), Leaf((0, 1))),))
    report = validate(MechanismTree(2, (uni, uni), root))
    assert not report.ok
    assert any("cover" in p for p in report.problems)


def test_validate_single_leaf_market():
    tree = MechanismTree(1, ((0,),), Leaf((0,)))
    assert validate(tree).ok
    assert execute_ids(tree, (0,)) == (0,)


def test_execute_follows_clinch_then_trade(taa3_tree):
    p = p_of((3, 1, 2), (1, 2, 3), (2, 3, 1))
    assert execute(taa3_tree, p).applicant_to_position == (2, 0, 1)
    p2 = p_of((3, 1, 2), (2, 1, 3), (1, 2, 3))
    assert execute(taa3_tree, p2).applicant_to_position == (2, 1, 0)


def test_execute_rejects_profiles_outside_environment(taa3_tree):
    small = restrict_environment(taa3_tree, ((0, 1), (0,), (0,)))
    outside = PreferenceProfile.from_rankings(((2, 1, 0), (0, 1, 2), (0, 1, 2)))
    with pytest.raises(ValueError):
        execute(small, outside)


def test_check_implements_exhaustive(taa3_tree):
    assert check_implements(taa3_tree, TAA3).ok


def test_check_implements_catches_constant_tree():
    q = q_of("abc", "abc", "abc")
    uni = full_universe(3)
    tree = MechanismTree(3, (uni,) * 3, Leaf((0, 1, 2)))
    # a single leaf is a valid tree but cannot equal DA across profiles
    assert validate(tree).ok
    report = check_implements(tree, q)
    assert not report.ok
    assert report.counterexample is not None


def test_check_implements_sampled(star6_tree):
    report = check_implements(star6_tree, STAR6, samples=2000, seed=5)
    assert report.ok and report.checked == 2000


def test_check_osp_accepts_gadget_tree(taa3_tree):
    assert check_osp(taa3_tree).ok


def test_check_osp_accepts_serial_tree():
    q = q_of("abc", "abc", "abc")
    tree = synthesize(q)
    assert check_osp(tree).ok
    assert player_move_bound(tree) == 1


def test_reveal_tree_with_pinned_opponents_is_clean():
    # against fixed opponents the reveal tree computes a strategyproof
    # function of one report, so no node can show regret
    tree = reveal_tree(FIG_A, universes=(full_universe(3), (0,), (0,)))
    assert validate(tree).ok
    assert check_osp(tree).ok


def test_single_leaf_tree_is_trivially_osp():
    tree = MechanismTree(1, ((0,),), Leaf((0,)))
    assert check_osp(tree).ok


def test_reveal_tree_violates_osp_under_cyclic_table():
    tree = reveal_tree(FIG_A)
    assert validate(tree).ok
    assert check_implements(tree, FIG_A).ok
    report = check_osp(tree)
    assert not report.ok
    assert any(v.node == 0 for v in report.violations)


def test_osp_violations_replay():
    tree = reveal_tree(FIG_A)
    report = check_osp(tree)
    nodes = dict(tree.nodes())
    rankings = all_rankings(3)
    for v in report.violations[:8]:
        truthful = nodes[v.truthful_leaf]
        deviating = nodes[v.deviating_leaf]
        order = rankings[v.type_id]
        spot = {pos: i for i, pos in enumerate(order)}
        assert spot[deviating.matching[v.player]] < spot[truthful.matching[v.player]]


def test_osp_ok_implies_strategyproof(taa3_tree):
    rankings = all_rankings(3)
    ids = range(len(rankings))
    for profile in product(ids, repeat=3):
        honest = execute_ids(taa3_tree, profile)
        for i in range(3):
            spot = {pos: k for k, pos in enumerate(rankings[profile[i]])}
            for lie in ids:
                if lie == profile[i]:
                    continue
                other = execute_ids(
                    taa3_tree, profile[:i] + (lie,) + profile[i + 1 :]
                )
                assert spot[other[i]] >= spot[honest[i]]


def test_pruning_preserves_osp(taa3_tree):
    rng = random.Random(9)
    uni = full_universe(3)
    for _ in range(15):
        subs = [
            sorted(rng.sample(uni, rng.randrange(1, len(uni) + 1))) for _ in range(3)
        ]
        pruned = restrict_environment(taa3_tree, subs)
        assert validate(pruned).ok
        assert check_osp(pruned).ok


def test_restrict_environment_validates_input(taa3_tree):
    with pytest.raises(ValueError):
        restrict_environment(taa3_tree, ((), (0,), (0,)))
    with pytest.raises(ValueError):
        restrict_environment(taa3_tree, ((999,), (0,), (0,)))


def test_exactly_one_leaf_per_profile(taa3_tree):
    # execute is total over the environment and lands on a single leaf
    for profile in product(full_universe(3), repeat=3):
        matching = execute_ids(taa3_tree, profile)
        assert sorted(matching) == [0, 1, 2]


def test_structural_measures_on_star(star6_tree):
    assert player_move_bound(star6_tree) == 2
    assert max_active_applicants(star6_tree) <= 3


def _brute_osp_violations(tree):
    """Direct per-definition check: enumerate leaves under each child and
    compare worst truthful against best deviating, type by type."""
    rankings = all_rankings(tree.n)
    violations = set()
    node_ids = {id(node): i for i, node in tree.nodes()}

    def leaves_below(node):
        if not isinstance(node, Internal):
            return [node]
        out = []
        for _, child in node.children:
            out.extend(leaves_below(child))
        return out

    def truthful_leaves(node, player, type_id):
        if not isinstance(node, Internal):
            return [node]
        if node.player == player:
            for types, child in node.children:
                if type_id in types:
                    return truthful_leaves(child, player, type_id)
            return []
        out = []
        for _, child in node.children:
            out.extend(truthful_leaves(child, player, type_id))
        return out

    def walk(node):
        if not isinstance(node, Internal):
            return
        player = node.player
        for k, (types, child) in enumerate(node.children):
            dev = []
            for j, (_, sibling) in enumerate(node.children):
                if j != k:
                    dev.extend(leaves_below(sibling))
            if not dev:
                continue
            for t in types:
                spot = {pos: i for i, pos in enumerate(rankings[t])}
                worst = max(
                    spot[leaf.matching[player]]
                    for leaf in truthful_leaves(child, player, t)
                )
                best = min(spot[leaf.matching[player]] for leaf in dev)
                if worst > best:
                    violations.add((node_ids[id(node)], player, t))
        for _, child in node.children:
            walk(child)

    walk(tree.root)
    return violations


def test_check_osp_matches_brute_force_everywhere():
    rankings = all_rankings(3)
    rng = random.Random(31)
    from ospmatch.classify import classify

    trees = []
    for ids in product(range(6), repeat=3):
        q = PrioritySet.from_rankings(tuple(rankings[i] for i in ids))
        if classify(q).limited_cyclic and rng.random() < 0.25:
            trees.append(synthesize(q))
    trees.append(reveal_tree(FIG_A))
    trees.append(reveal_tree(TAA3))
    trees.append(reveal_tree(q_of("abc", "acb", "cba")))
    base = synthesize(TAA3)
    uni = full_universe(3)
    for _ in range(10):
        subs = [sorted(rng.sample(uni, rng.randrange(1, 7))) for _ in range(3)]
        trees.append(restrict_environment(base, subs))
        trees.append(restrict_environment(reveal_tree(FIG_A), subs))
    four = synthesize(q_of("dabc", "dabc", "dacb", "dbac"))
    trees.append(four)
    trees.append(reveal_tree(q_of("abcd", "abdc", "acbd", "bacd"),
                             ((0, 5, 11, 17), (3, 9), (2, 21, 22), (7,))))
    for tree in trees:
        report = check_osp(tree)
        fast = {(v.node, v.player, v.type_id) for v in report.violations}
        slow = _brute_osp_violations(tree)
        assert fast == slow
        assert report.ok == (not slow)


def test_restricted_tree_still_implements_da():
    q = TAA3
    tree = synthesize(q)
    rng = random.Random(13)
    uni = full_universe(3)
    rankings = all_rankings(3)
    ranks = q.rank_table()
    for _ in range(10):
        subs = [
            sorted(rng.sample(uni, rng.randrange(1, 7))) for _ in range(3)
        ]
        pruned = restrict_environment(tree, subs)
        for profile in product(*pruned.universes):
            prefs = tuple(rankings[t] for t in profile)
            assert execute_ids(pruned, profile) == da_match(ranks, prefs)
