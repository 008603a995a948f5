import random

import pytest
from hypothesis import given, strategies as st

from forestdual import (
    DIGRAPH,
    EmptyStructureInFamily,
    ForestClass,
    NotATreeFamily,
    Structure,
    admissibility_witness,
    all_homs,
    build_finite_family,
    build_hom_family,
    build_obstruction_family,
    build_trees_family,
    check_tinimage,
    directed_path,
    disjoint_union,
    enumerate_structures,
    family_complement,
    family_intersection,
    forest_dual_family,
    forest_state,
    hom_exists,
    intersection_is_empty,
    is_admissible,
    is_hom_equivalent,
    is_tree,
    member,
    minimize,
    parse_path_literal,
    single_loop,
    transitive_tournament,
    tree_classes,
    tree_dual,
    up_closure,
    verify_duality,
)
from forestdual.duality import _minimized
from oracles import brute_hom_exists


def all_forests(n):
    return list(enumerate_structures(DIGRAPH, n, forest_only=True))


def digraph(n, arcs):
    return Structure.make(DIGRAPH, n, {"E": arcs})


class TestForestState:
    def test_empty_forest_gets_init(self):
        alg = build_trees_family(DIGRAPH)
        cls = forest_state(alg, digraph(0, []))
        assert cls.stray_state == _minimized(alg).init

    def test_trees_family_nonempty_forests_collapse(self):
        alg = build_trees_family(DIGRAPH)
        # adding a fresh root always disconnects: one stray state for all
        states = {forest_state(alg, f).stray_state for f in all_forests(3) if not f.is_empty}
        assert len(states) == 1

    def test_membership_bit_distinguishes(self):
        alg = build_finite_family([directed_path(3)])
        a = forest_state(alg, directed_path(3))
        b = forest_state(alg, parse_path_literal("++-"))
        assert a.stray_state == b.stray_state  # both dead as strays
        assert a.in_family and not b.in_family

    def test_equal_classes_interchangeable_in_unions(self):
        # the defining property: equal class => same membership under every
        # union context (the empty context included)
        alg = build_finite_family([disjoint_union(directed_path(1), directed_path(1))])
        forests = all_forests(3)
        for a in forests:
            for b in forests:
                if forest_state(alg, a) != forest_state(alg, b):
                    continue
                for c in forests:
                    if a.vertex_count + c.vertex_count > 5:
                        continue
                    assert member(alg, disjoint_union(a, c)) == member(
                        alg, disjoint_union(b, c)
                    )


class TestTreeClasses:
    def test_trees_family_single_tree_class(self):
        assert len(tree_classes(build_trees_family(DIGRAPH))) == 1

    def test_finite_family_distinguishes_member(self):
        alg = build_finite_family([directed_path(1)])
        tcs = tree_classes(alg)
        assert forest_state(alg, directed_path(1)) in tcs
        assert forest_state(alg, directed_path(2)) in tcs
        assert forest_state(alg, directed_path(1)) != forest_state(alg, directed_path(2))

    def test_bounded_by_state_count(self):
        alg = build_hom_family(transitive_tournament(2))
        assert len(tree_classes(alg)) <= _minimized(alg).state_count


class TestTreeDual:
    def test_single_arc_family_dual_is_tt1(self):
        d = tree_dual(build_finite_family([directed_path(1)]))
        assert is_hom_equivalent(d.structure, transitive_tournament(1))
        # exhaustive duality over digraphs <= 3 against the brute oracle
        for b in enumerate_structures(DIGRAPH, 3):
            assert hom_exists(b, d.structure) == (
                not brute_hom_exists(directed_path(1), b)
            )

    def test_two_arc_path_family_dual_is_tt2(self):
        d = tree_dual(build_finite_family([directed_path(2)]))
        assert is_hom_equivalent(d.structure, transitive_tournament(2))
        for b in enumerate_structures(DIGRAPH, 4):
            assert hom_exists(b, d.structure) == (
                not brute_hom_exists(directed_path(2), b)
            )

    def test_family_with_single_vertex_tree_gives_empty_dual(self):
        d = tree_dual(build_finite_family([digraph(1, [])]))
        assert d.structure.is_empty
        assert hom_exists(digraph(0, []), d.structure)
        assert not hom_exists(digraph(1, []), d.structure)

    def test_empty_family_dual_accepts_everything(self):
        d = tree_dual(build_finite_family([], signature=DIGRAPH))
        for b in enumerate_structures(DIGRAPH, 3):
            assert hom_exists(b, d.structure)

    def test_non_tree_family_rejected(self):
        pair = disjoint_union(directed_path(1), directed_path(1))
        with pytest.raises(NotATreeFamily):
            tree_dual(build_finite_family([pair]))

    def test_vertex_sets_satisfy_dual_vertex_conditions(self):
        from forestdual import reachable_states

        for members in ([directed_path(2)], [parse_path_literal("+-")]):
            alg = build_finite_family(members)
            d = tree_dual(alg)
            x = d.algebra
            tree_states = reachable_states(x).tree_reachable
            for dv in d.vertex_sets:
                assert x.init in dv.state_set
                assert not (dv.state_set & x.terminals)
                # Galois-closed over the tree states: the set equals the
                # orthogonal of its own orthogonal
                orth = [
                    h
                    for h in tree_states
                    if all(x.combine[h][c] not in x.terminals for c in dv.state_set)
                ]
                biorth = frozenset(
                    c
                    for c in tree_states
                    if all(x.combine[h][c] not in x.terminals for h in orth)
                )
                assert biorth == dv.state_set

    def test_members_never_map_to_dual(self):
        from forestdual import enumerate_members

        suite = [
            build_finite_family([directed_path(2)]),
            build_finite_family([parse_path_literal("+-")]),
            family_intersection(
                build_obstruction_family([transitive_tournament(2)]),
                build_trees_family(DIGRAPH),
            ),
        ]
        for alg in suite:
            d = tree_dual(alg)
            for t in enumerate_members(alg, 4):
                assert not hom_exists(t, d.structure)

    def test_equal_rooted_states_interchangeable_under_combine(self):
        # states of the minimized algebra really are rooted-forest classes:
        # equal states stay together under every combine context
        from forestdual import RootedStructure, combine_rooted, eval_rooted, member as member_, unroot

        for alg in (
            build_finite_family([directed_path(2)]),
            build_hom_family(transitive_tournament(2)),
        ):
            x = _minimized(alg)
            rooted = [
                RootedStructure(f, v)
                for f in all_forests(3)
                if not f.is_empty
                for v in range(f.vertex_count)
            ]
            by_state = {}
            for r in rooted:
                by_state.setdefault(eval_rooted(x, r), []).append(r)
            contexts = [
                RootedStructure(f, 0) for f in all_forests(2) if not f.is_empty
            ]
            for group in by_state.values():
                for r1 in group[:3]:
                    for r2 in group[:3]:
                        for c in contexts:
                            one = member_(x, unroot(combine_rooted(r1, c)))
                            two = member_(x, unroot(combine_rooted(r2, c)))
                            assert one == two


class TestTinimage:
    def test_all_tree_homs_into_dual_respect_states(self):
        alg = build_finite_family([directed_path(2)])
        d = tree_dual(alg)
        checked = 0
        for t in all_forests(4):
            if not is_tree(t):
                continue
            for phi in all_homs(t, d.structure):
                assert check_tinimage(alg, d, t, phi)
                checked += 1
        assert checked > 0

    def test_rejects_non_tree(self):
        alg = build_finite_family([directed_path(1)])
        d = tree_dual(alg)
        with pytest.raises(ValueError):
            check_tinimage(alg, d, digraph(0, []), None)


class TestAdmissibility:
    def test_full_class_set_always_admissible(self):
        alg = build_finite_family([disjoint_union(directed_path(1), directed_path(2))])
        assert is_admissible(alg, tree_classes(alg))

    def test_empty_set_needs_empty_family(self):
        alg = build_finite_family([directed_path(1)])
        w = admissibility_witness(alg, [])
        assert w is not None and member(alg, w)
        empty_fam = build_finite_family([], signature=DIGRAPH)
        assert is_admissible(empty_fam, [])

    def test_component_class_admissible_off_component_not(self):
        m = disjoint_union(directed_path(1), directed_path(2))
        alg = build_finite_family([m])
        assert is_admissible(alg, [forest_state(alg, directed_path(1))])
        assert is_admissible(alg, [forest_state(alg, directed_path(2))])
        w = admissibility_witness(alg, [forest_state(alg, parse_path_literal("+-"))])
        assert w is not None
        from forestdual import is_isomorphic

        assert is_isomorphic(w, m)

    def test_unrealized_class_rejected(self):
        alg = build_finite_family([directed_path(1)])
        with pytest.raises(ValueError):
            is_admissible(alg, [ForestClass(9999, False)])

    def test_empty_structure_family_rejected(self):
        alg = family_complement(build_trees_family(DIGRAPH))
        with pytest.raises(EmptyStructureInFamily):
            is_admissible(alg, [])


class TestForestDualFamily:
    def test_connected_members_reproduce_tree_dual(self):
        alg = build_finite_family([directed_path(2)])
        duals = forest_dual_family(alg)
        td = tree_dual(alg)
        assert any(is_hom_equivalent(d.structure, td.structure) for d in duals)

    def test_bound_shape(self):
        alg = build_finite_family([directed_path(2)])
        assert len(forest_dual_family(alg)) <= 2 ** len(tree_classes(alg))

    def test_disconnected_member_family(self):
        # the member is disconnected but hom-equivalent to the single arc,
        # so one of the emitted duals alone already witnesses the duality
        pair = disjoint_union(directed_path(1), directed_path(1))
        alg = build_finite_family([pair])
        duals = forest_dual_family(alg)
        rep = verify_duality(alg, duals, 3)
        assert rep.passed
        assert any(
            is_hom_equivalent(d.structure, transitive_tournament(1)) for d in duals
        )

    def test_empty_family_trivial_duality(self):
        alg = build_finite_family([], signature=DIGRAPH)
        duals = forest_dual_family(alg)
        assert verify_duality(alg, duals, 3).passed

    def test_empty_structure_member_rejected(self):
        alg = family_complement(build_trees_family(DIGRAPH))
        with pytest.raises(EmptyStructureInFamily):
            forest_dual_family(alg)

    def test_dedup_is_hom_sound(self):
        alg = build_finite_family([directed_path(1)])
        duals = forest_dual_family(alg)
        for i, d in enumerate(duals):
            for e in duals[i + 1 :]:
                assert not is_hom_equivalent(d.structure, e.structure)


class TestVerifyDuality:
    def test_gallai_roy_two(self):
        alg = build_finite_family([directed_path(2)])
        rep = verify_duality(alg, [transitive_tournament(2)], 4)
        assert rep.passed and rep.structures_checked > 3000

    def test_wrong_dual_reports_failures_with_witnesses(self):
        alg = build_finite_family([directed_path(1)])
        rep = verify_duality(alg, [transitive_tournament(2)], 3)
        assert not rep.passed
        fail = rep.failures[0]
        assert fail["direction"] == "obstruction_member_maps_to_dual_receiver"
        w = Structure.from_json_dict(fail["witness"]["family_member"])
        b = Structure.from_json_dict(fail["structure"])
        assert member(alg, w)
        assert brute_hom_exists(w, b)

    def test_no_duals_nonempty_family(self):
        alg = build_finite_family([directed_path(1)])
        rep = verify_duality(alg, [], 2)
        # arcless structures receive no member and are not mapped anywhere
        assert not rep.passed
        assert all(
            f["direction"] == "no_dual_receives_unobstructed_structure"
            for f in rep.failures
        )

    def test_obstruction_family_duality(self):
        # family of trees avoiding TT_2, restricted to trees
        alg = family_intersection(
            build_obstruction_family([transitive_tournament(2)]),
            build_trees_family(DIGRAPH),
        )
        duals = forest_dual_family(alg)
        assert verify_duality(alg, duals, 3).passed


class TestUpClosure:
    def test_up_semantics_two_routes(self):
        for members in ([directed_path(1)], [directed_path(2)], [parse_path_literal("+-")]):
            alg = build_finite_family(members)
            up = up_closure(alg)
            for a in all_forests(4):
                expect = not intersection_is_empty(alg, build_hom_family(a))
                assert member(up, a) == expect

    def test_members_inside_their_up_closure(self):
        alg = build_finite_family([directed_path(2)])
        up = up_closure(alg)
        assert member(up, directed_path(2))

    def test_up_idempotent_on_recognized_sets(self):
        alg = build_finite_family([directed_path(1)])
        up1 = up_closure(alg)
        up2 = up_closure(minimize(up1))
        for a in all_forests(4):
            assert member(up1, a) == member(up2, a)
