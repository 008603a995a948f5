"""Canonical forms, isomorphism tests and isomorphism-free enumeration.

Two canonical-form mechanisms coexist:

* general structures use the minimum presence-bitmask over all vertex
  permutations (exponential in the vertex count; intended for <= ~5 vertices
  on binary signatures, <= 8 as a hard limit);
* forests use a linear-time recursive incidence-tree encoding, which scales
  to the path fixtures (20+ vertices) where permutation search cannot.

Both induce one representative per isomorphism class; the forest encoding is
authoritative whenever a structure is a forest.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterator, Optional, Sequence

from .structures import (
    RootedStructure,
    Signature,
    SignatureMismatch,
    Structure,
    components,
    incidence,
    is_forest,
    substructure_on,
)

PERM_LIMIT = 8


# ---------------------------------------------------------------------------
# forest encodings
# ---------------------------------------------------------------------------
#
# A vertex-rooted incidence tree is encoded as
#     venc  = (0, sorted tuple of branch encodings)
#     branch = (rel index, parent position, ((pos_j, venc_j), ...))
# where the branch's block enters the parent vertex at `parent position` and
# the remaining positions j carry the subtrees hanging below.  Encodings are
# pure nested tuples of ints, hence totally ordered by tuple comparison.


def _encode_vertex(s: Structure, v: int, banned_block: int) -> tuple:
    inc = incidence(s)
    branches = []
    for bid, pos in inc.vertex_edges[v]:
        if bid == banned_block:
            continue
        ri, t = inc.blocks[bid]
        kids = tuple(
            (j, _encode_vertex(s, t[j], bid)) for j in range(len(t)) if j != pos
        )
        branches.append((ri, pos, kids))
    return (0, tuple(sorted(branches)))


def rooted_encoding(rs: RootedStructure) -> tuple:
    """Canonical encoding of a rooted forest: the root component encoded at
    the root, plus the sorted encodings of the stray components."""
    s = rs.structure
    if not is_forest(s):
        raise ValueError("rooted encoding requires a forest")
    comps = components(s)
    root_enc = None
    strays = []
    for comp, back in comps:
        if rs.root in back:
            root_enc = _encode_vertex(comp, back.index(rs.root), -1)
        else:
            strays.append(tree_encoding_of_component(comp))
    return (root_enc, tuple(sorted(strays)))


def tree_encoding_of_component(comp: Structure) -> tuple:
    """Encoding of a single unrooted tree: minimum over all rootings."""
    return min(_encode_vertex(comp, v, -1) for v in range(comp.vertex_count))


def forest_encoding(s: Structure) -> tuple:
    """Canonical encoding of an unrooted forest (sorted component
    encodings)."""
    if not is_forest(s):
        raise ValueError("forest encoding requires a forest")
    return tuple(sorted(tree_encoding_of_component(c.structure) for c in components(s)))


class _Rebuilder:
    def __init__(self, sig: Signature):
        self.sig = sig
        self.n = 0
        self.tuples: list[set] = [set() for _ in sig.relations]

    def new_vertex(self) -> int:
        v = self.n
        self.n += 1
        return v

    def add_vertex_enc(self, enc: tuple, v: int) -> None:
        _, branches = enc
        for ri, pos, kids in branches:
            arity = self.sig.relations[ri][1]
            slot: list = [None] * arity
            slot[pos] = v
            for j, kid_enc in kids:
                w = self.new_vertex()
                slot[j] = w
                self.add_vertex_enc(kid_enc, w)
            self.tuples[ri].add(tuple(slot))

    def finish(self) -> Structure:
        return Structure(self.sig, self.n, tuple(frozenset(t) for t in self.tuples))


def rebuild_forest(sig: Signature, enc: tuple) -> Structure:
    """Concrete canonical representative of an unrooted forest encoding,
    vertices numbered in traversal order."""
    rb = _Rebuilder(sig)
    for comp_enc in enc:
        v = rb.new_vertex()
        rb.add_vertex_enc(comp_enc, v)
    return rb.finish()


def rebuild_rooted(sig: Signature, enc: tuple) -> RootedStructure:
    """Concrete canonical representative of a rooted forest encoding; the
    root is vertex 0."""
    root_enc, strays = enc
    rb = _Rebuilder(sig)
    r = rb.new_vertex()
    rb.add_vertex_enc(root_enc, r)
    for comp_enc in strays:
        v = rb.new_vertex()
        rb.add_vertex_enc(comp_enc, v)
    return RootedStructure(rb.finish(), r)


# ---------------------------------------------------------------------------
# permutation canonical form
# ---------------------------------------------------------------------------


def _perm_min_key(s: Structure) -> tuple:
    n = s.vertex_count
    if n > PERM_LIMIT:
        raise ValueError(
            f"permutation canonicalization limited to {PERM_LIMIT} vertices "
            f"(got {n}); forests of any size are handled by the tree encoding"
        )
    best = None
    for perm in permutations(range(n)):
        key = tuple(
            tuple(sorted(tuple(perm[v] for v in t) for t in ts)) for ts in s.tuples
        )
        if best is None or key < best:
            best = key
    return (n, best)


def canonical_form(s: Structure) -> Structure:
    """One fixed representative of the isomorphism class of s.

    Forests are canonicalized through their incidence-tree encoding; other
    structures by exhaustive permutation search (vertex count <= 8).
    """
    if is_forest(s):
        return rebuild_forest(s.signature, forest_encoding(s))
    n, key = _perm_min_key(s)
    return Structure(
        s.signature, n, tuple(frozenset(ts) for ts in key)
    )


def iso_key(s: Structure):
    """Hashable isomorphism-class key."""
    if is_forest(s):
        return ("f", s.vertex_count, forest_encoding(s))
    return ("p", _perm_min_key(s))


def is_isomorphic(a: Structure, b: Structure) -> bool:
    if a.signature != b.signature:
        raise SignatureMismatch("isomorphism test across signatures")
    if a.vertex_count != b.vertex_count:
        return False
    if tuple(len(ts) for ts in a.tuples) != tuple(len(ts) for ts in b.tuples):
        return False
    fa, fb = is_forest(a), is_forest(b)
    if fa != fb:
        return False
    if fa:
        return forest_encoding(a) == forest_encoding(b)
    if a.vertex_count <= PERM_LIMIT:
        return _perm_min_key(a) == _perm_min_key(b)
    # injective hom with equal tuple counts is an isomorphism
    from .hom import _search_injective  # local import to avoid a cycle

    return _search_injective(a, b)


# ---------------------------------------------------------------------------
# exhaustive enumeration up to isomorphism
# ---------------------------------------------------------------------------


def _tuple_universe(sig: Signature, n: int) -> list[tuple[int, tuple[int, ...]]]:
    out = []
    for ri, (_, arity) in enumerate(sig.relations):
        idx = [()]
        for _ in range(arity):
            idx = [t + (v,) for t in idx for v in range(n)]
        out.extend((ri, t) for t in sorted(idx))
    return out


def _mask_to_structure(sig: Signature, n: int, universe, mask: int) -> Structure:
    sets: list[set] = [set() for _ in sig.relations]
    k = 0
    m = mask
    while m:
        if m & 1:
            ri, t = universe[k]
            sets[ri].add(t)
        m >>= 1
        k += 1
    return Structure(sig, n, tuple(frozenset(x) for x in sets))


def _perm_mask_tables(sig: Signature, n: int, universe) -> list[list[dict]]:
    """For each permutation, byte-chunked lookup tables remapping a presence
    bitmask over the tuple universe."""
    pos = {ut: k for k, ut in enumerate(universe)}
    tables = []
    nchunks = (len(universe) + 7) // 8
    for perm in permutations(range(n)):
        remap = [pos[(ri, tuple(perm[v] for v in t))] for ri, t in universe]
        chunked = []
        for c in range(nchunks):
            tab = {}
            for byte in range(256):
                m = 0
                for bit in range(8):
                    if byte >> bit & 1:
                        k = c * 8 + bit
                        if k < len(universe):
                            m |= 1 << remap[k]
                tab[byte] = m
            chunked.append(tab)
        tables.append(chunked)
    return tables


@lru_cache(maxsize=None)
def _all_level(sig: Signature, n: int) -> tuple[Structure, ...]:
    """All structures on exactly n vertices, one canonical representative
    per isomorphism class.  Cost grows as 2^|tuple universe|; intended for
    small n only."""
    if n == 0:
        return (Structure.make(sig, 0),)
    universe = _tuple_universe(sig, n)
    if len(universe) > 20:
        raise ValueError(
            f"exhaustive enumeration over {len(universe)} candidate tuples is "
            "infeasible (the scan is exponential in that count); lower "
            "max_vertices or use forest_only"
        )
    tables = _perm_mask_tables(sig, n, universe)
    nchunks = (len(universe) + 7) // 8
    canonical = set()
    for mask in range(1 << len(universe)):
        best = mask
        for chunks in tables:
            m = 0
            rest = mask
            for c in range(nchunks):
                byte = rest & 0xFF
                if byte:
                    m |= chunks[c][byte]
                rest >>= 8
            if m < best:
                best = m
        if best == mask:
            canonical.add(mask)
    out = []
    for mask in sorted(canonical):
        s = _mask_to_structure(sig, n, universe, mask)
        out.append(canonical_form(s) if is_forest(s) else s)
    return tuple(out)


# -- generative forest enumeration ------------------------------------------
#
# Tree classes are generated by repeatedly attaching a fresh block to an
# existing vertex (the block's other positions become fresh leaves), with
# dedup through the canonical encoding.  Every tree arises this way because
# a deepest block of the incidence tree can always be peeled off.


@lru_cache(maxsize=None)
def _tree_encodings_up_to(sig: Signature, max_vertices: int) -> tuple[tuple[int, tuple], ...]:
    """All (vertex count, encoding) of sigma-trees with <= max_vertices
    vertices, sorted."""
    if max_vertices < 1:
        return ()
    single = Structure.make(sig, 1)
    seen: dict[tuple, int] = {forest_encoding(single)[0]: 1}
    frontier = [single]
    while frontier:
        nxt = []
        for s in frontier:
            n = s.vertex_count
            for ri, (name, arity) in enumerate(sig.relations):
                if n + arity - 1 > max_vertices:
                    continue
                for v in range(n):
                    for pos in range(arity):
                        slot = [None] * arity
                        slot[pos] = v
                        fresh = list(range(n, n + arity - 1))
                        fi = 0
                        for j in range(arity):
                            if j != pos:
                                slot[j] = fresh[fi]
                                fi += 1
                        new_tuple = tuple(slot)
                        if new_tuple in s.tuples[ri]:
                            continue
                        grown = Structure(
                            sig,
                            n + arity - 1,
                            tuple(
                                ts | {new_tuple} if k == ri else ts
                                for k, ts in enumerate(s.tuples)
                            ),
                        )
                        if not is_forest(grown):
                            continue  # arity-1 self attachments stay trees; guard anyway
                        enc = tree_encoding_of_component(grown)
                        if enc not in seen:
                            seen[enc] = grown.vertex_count
                            nxt.append(grown)
        frontier = nxt
    return tuple(sorted((n, enc) for enc, n in seen.items()))


@lru_cache(maxsize=None)
def _forest_level(sig: Signature, n: int) -> tuple[Structure, ...]:
    """All forests on exactly n vertices, one canonical representative per
    isomorphism class, built as multisets of tree components."""
    if n == 0:
        return (Structure.make(sig, 0),)
    trees = _tree_encodings_up_to(sig, n)
    results: set[tuple] = set()

    def extend(start: int, remaining: int, chosen: tuple):
        if remaining == 0:
            results.add(tuple(sorted(chosen)))
            return
        for k in range(start, len(trees)):
            size, enc = trees[k]
            if size > remaining:
                continue
            extend(k, remaining - size, chosen + (enc,))

    extend(0, n, ())
    return tuple(rebuild_forest(sig, enc) for enc in sorted(results))


def enumerate_structures(
    sig: Signature, max_vertices: int, forest_only: bool = False
) -> Iterator[Structure]:
    """Stream one canonical representative per isomorphism class, for all
    vertex counts 0..max_vertices, in a deterministic order.

    Without forest_only the cost is exponential in the squared vertex count
    (all tuple subsets are scanned); keep max_vertices <= ~4 for binary
    signatures.  With forest_only, classes are generated directly from tree
    encodings and counts beyond 6-7 vertices remain practical.
    """
    for n in range(max_vertices + 1):
        level = _forest_level(sig, n) if forest_only else _all_level(sig, n)
        yield from level
