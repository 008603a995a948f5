import json

import pytest
from hypothesis import given, strategies as st

from forestdual import (
    DIGRAPH,
    RootedStructure,
    Signature,
    SignatureMismatch,
    Structure,
    combine_rooted,
    components,
    concatenate,
    direct_product,
    directed_path,
    disjoint_union,
    is_forest,
    is_isomorphic,
    is_tree,
    parse_path_literal,
    single_loop,
    t0,
    transitive_tournament,
    unroot,
)
from oracles import incidence_components_bfs, incidence_is_forest_bfs


def digraph(n, arcs):
    return Structure.make(DIGRAPH, n, {"E": arcs})


@st.composite
def digraphs(draw, max_n=4):
    n = draw(st.integers(0, max_n))
    if n == 0:
        return digraph(0, [])
    arcs = draw(
        st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=6)
    )
    return digraph(n, sorted(arcs))


class TestSignature:
    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            Signature((("E", 2), ("E", 1)))

    def test_zero_arity_rejected(self):
        with pytest.raises(ValueError):
            Signature((("E", 0),))

    def test_json_round_trip(self):
        sig = Signature((("E", 2), ("U", 1)))
        assert Signature.from_json_dict(sig.to_json_dict()) == sig


class TestStructure:
    def test_out_of_range_tuple_rejected(self):
        with pytest.raises(ValueError):
            digraph(1, [(0, 1)])

    def test_wrong_arity_rejected(self):
        with pytest.raises(ValueError):
            Structure.make(DIGRAPH, 2, {"E": [(0,)]})

    def test_empty_structure_has_no_tuples(self):
        s = digraph(0, [])
        assert s.is_empty and s.total_tuples() == 0

    def test_json_round_trip_sorted(self):
        s = digraph(3, [(2, 1), (0, 1)])
        d = s.to_json_dict()
        assert d["tuples"]["E"] == [[0, 1], [2, 1]]
        assert Structure.from_json_dict(d) == s

    def test_json_byte_stable(self):
        s = digraph(3, [(2, 1), (0, 1)])
        one = json.dumps(s.to_json_dict(), sort_keys=True)
        two = json.dumps(Structure.from_json_dict(s.to_json_dict()).to_json_dict(), sort_keys=True)
        assert one == two


class TestForestTree:
    def test_two_cycle_not_forest(self):
        assert not is_forest(digraph(2, [(0, 1), (1, 0)]))

    def test_loop_not_forest(self):
        assert not is_forest(single_loop())

    def test_path_is_tree(self):
        assert is_tree(parse_path_literal("+-+"))

    def test_empty_conventions(self):
        empty = digraph(0, [])
        assert is_forest(empty) and not is_tree(empty)

    def test_single_vertex_is_tree(self):
        assert is_tree(digraph(1, []))

    @given(digraphs())
    def test_forest_matches_bfs_oracle(self, s):
        assert is_forest(s) == incidence_is_forest_bfs(s)


class TestComponents:
    def test_single_arc_connected(self):
        assert len(components(directed_path(1))) == 1

    def test_arc_plus_isolated(self):
        assert len(components(digraph(3, [(0, 1)]))) == 2

    def test_paths_disjoint_sizes(self):
        # p(++) plus p(+): component vertex counts 3 and 2
        s = disjoint_union(directed_path(2), directed_path(1))
        sizes = sorted(c.structure.vertex_count for c in components(s))
        assert sizes == [2, 3]
        assert incidence_components_bfs(s) == 2

    def test_empty_structure_no_components(self):
        assert components(digraph(0, [])) == []

    @given(digraphs())
    def test_component_count_matches_bfs_oracle(self, s):
        assert len(components(s)) == incidence_components_bfs(s)

    @given(digraphs())
    def test_union_of_components_rebuilds(self, s):
        parts = [c.structure for c in components(s)]
        if not parts:
            return
        rebuilt = parts[0]
        for p in parts[1:]:
            rebuilt = disjoint_union(rebuilt, p)
        assert is_isomorphic(rebuilt, s) or rebuilt.vertex_count == s.vertex_count


class TestProductUnion:
    def test_product_with_arcless_vertex_kills_tuples(self):
        a = digraph(3, [(0, 1), (1, 2)])
        p = direct_product(a, digraph(1, []))
        assert p.vertex_count == 3 and p.total_tuples() == 0

    def test_tt2_squared(self):
        p = direct_product(transitive_tournament(2), transitive_tournament(2))
        assert p.vertex_count == 4 and p.total_tuples() == 1

    def test_diagonal_embedding(self):
        from forestdual import hom_exists

        a = digraph(3, [(0, 1), (1, 2), (0, 2)])
        assert hom_exists(a, direct_product(a, a))

    def test_union_with_empty_is_identity(self):
        a = directed_path(2)
        assert disjoint_union(a, digraph(0, [])) == a

    def test_union_counts(self):
        u = disjoint_union(directed_path(1), directed_path(1))
        assert u.vertex_count == 4 and u.total_tuples() == 2

    def test_signature_mismatch(self):
        other = Structure.make(Signature((("R", 1),)), 1, {"R": [(0,)]})
        with pytest.raises(SignatureMismatch):
            disjoint_union(directed_path(1), other)


class TestRooted:
    def test_t0_identity_of_combine(self):
        x = RootedStructure(parse_path_literal("+-"), 1)
        both = combine_rooted(x, t0(DIGRAPH))
        assert is_isomorphic(unroot(both), unroot(x))
        assert combine_rooted(t0(DIGRAPH), x).structure.vertex_count == 3

    def test_combine_two_arcs_at_tails(self):
        a = RootedStructure(directed_path(1), 0)
        b = RootedStructure(directed_path(1), 0)
        c = combine_rooted(a, b)
        assert c.structure.vertex_count == 3
        # root occupies one position in each of the two blocks
        from forestdual import incidence

        assert len(incidence(c.structure).vertex_edges[c.root]) == 2

    def test_combine_commutative_up_to_iso(self):
        a = RootedStructure(directed_path(2), 0)
        b = RootedStructure(parse_path_literal("-"), 0)
        ab = combine_rooted(a, b)
        ba = combine_rooted(b, a)
        assert is_isomorphic(unroot(ab), unroot(ba))

    def test_root_range_validated(self):
        with pytest.raises(ValueError):
            RootedStructure(directed_path(1), 5)


class TestConcatenate:
    def test_single_arc_from_two_points(self):
        s = concatenate("E", [t0(DIGRAPH), t0(DIGRAPH)])
        assert is_isomorphic(s, directed_path(1))

    def test_extend_path(self):
        arc_at_head = RootedStructure(directed_path(1), 1)
        s = concatenate("E", [arc_at_head, t0(DIGRAPH)])
        assert is_isomorphic(s, directed_path(2))

    def test_trees_stay_trees(self):
        a = RootedStructure(directed_path(2), 2)
        b = RootedStructure(directed_path(1), 0)
        assert is_tree(concatenate("E", [a, b]))

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            concatenate("E", [t0(DIGRAPH)])


class TestPathLiterals:
    def test_single_plus(self):
        assert parse_path_literal("+") == digraph(2, [(0, 1)])

    def test_two_plus(self):
        assert parse_path_literal("++") == digraph(3, [(0, 1), (1, 2)])

    def test_plus_minus(self):
        assert parse_path_literal("+-") == digraph(3, [(0, 1), (2, 1)])

    def test_wrapped_form_and_empty(self):
        assert parse_path_literal("p(+-)") == parse_path_literal("+-")
        assert parse_path_literal("") == digraph(1, [])

    def test_illegal_characters(self):
        with pytest.raises(ValueError):
            parse_path_literal("p(+*)")
