"""Finite relational structures over a fixed signature.

Vertices are dense integer ids 0..n-1.  All values are immutable after
construction; every operation returns fresh structures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence


class SignatureMismatch(ValueError):
    """An operation mixed structures over different signatures."""


class NotAForest(ValueError):
    """A forest-only operation received a structure whose incidence graph has
    cycles or parallel edges."""


@dataclass(frozen=True)
class Signature:
    """An ordered list of relation symbols with arities.

    The symbol order is fixed and determines the canonical serialization
    order everywhere else in the library.
    """

    relations: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        rels = tuple((str(n), int(a)) for n, a in self.relations)
        object.__setattr__(self, "relations", rels)
        names = [n for n, _ in rels]
        if len(set(names)) != len(names):
            raise ValueError("relation names must be unique")
        for name, arity in rels:
            if arity < 1:
                raise ValueError(f"relation {name!r} must have arity >= 1")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.relations)

    def arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise KeyError(name)

    def index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.relations):
            if n == name:
                return i
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {"relations": [{"name": n, "arity": a} for n, a in self.relations]}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Signature":
        rels = tuple((r["name"], r["arity"]) for r in data["relations"])
        return cls(rels)


@dataclass(frozen=True)
class Structure:
    """A finite relational structure: a vertex count plus one tuple set per
    relation symbol (aligned with the signature's symbol order)."""

    signature: Signature
    vertex_count: int
    tuples: tuple[frozenset[tuple[int, ...]], ...]

    def __post_init__(self) -> None:
        if self.vertex_count < 0:
            raise ValueError("vertex_count must be nonnegative")
        if len(self.tuples) != len(self.signature.relations):
            raise ValueError("one tuple set per relation symbol required")
        for (name, arity), tset in zip(self.signature.relations, self.tuples):
            for t in tset:
                if len(t) != arity:
                    raise ValueError(f"tuple {t} has wrong length for {name!r}")
                if any(not (0 <= v < self.vertex_count) for v in t):
                    raise ValueError(f"tuple {t} of {name!r} out of vertex range")

    # -- accessors ---------------------------------------------------------

    def rel(self, name: str) -> frozenset[tuple[int, ...]]:
        return self.tuples[self.signature.index(name)]

    def sorted_tuples(self, rel_index: int) -> list[tuple[int, ...]]:
        return sorted(self.tuples[rel_index])

    def blocks(self) -> list[tuple[int, tuple[int, ...]]]:
        """All hyperedges as (relation index, vertex tuple), in canonical
        (relation, lexicographic tuple) order."""
        out = []
        for ri in range(len(self.tuples)):
            out.extend((ri, t) for t in self.sorted_tuples(ri))
        return out

    @property
    def is_empty(self) -> bool:
        return self.vertex_count == 0

    def total_tuples(self) -> int:
        return sum(len(ts) for ts in self.tuples)

    # -- construction helpers ---------------------------------------------

    @classmethod
    def make(
        cls,
        signature: Signature,
        vertex_count: int,
        tuples: Optional[Mapping[str, Iterable[Sequence[int]]]] = None,
    ) -> "Structure":
        by_name = {name: frozenset() for name in signature.names}
        if tuples:
            for name, ts in tuples.items():
                if name not in by_name:
                    raise KeyError(f"unknown relation {name!r}")
                by_name[name] = frozenset(tuple(int(v) for v in t) for t in ts)
        return cls(signature, vertex_count, tuple(by_name[n] for n in signature.names))

    def relabel(self, perm: Sequence[int]) -> "Structure":
        """Rename vertex v to perm[v]."""
        new = tuple(
            frozenset(tuple(perm[v] for v in t) for t in ts) for ts in self.tuples
        )
        return Structure(self.signature, self.vertex_count, new)

    def ser_key(self) -> tuple:
        """Serialization key: per-relation sorted tuple lists.  Structures
        with equal keys are equal."""
        return (
            self.vertex_count,
            tuple(tuple(sorted(ts)) for ts in self.tuples),
        )

    # -- JSON ---------------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "signature": self.signature.to_json_dict(),
            "vertex_count": self.vertex_count,
            "tuples": {
                name: [list(t) for t in self.sorted_tuples(ri)]
                for ri, (name, _) in enumerate(self.signature.relations)
            },
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Structure":
        sig = Signature.from_json_dict(data["signature"])
        return cls.make(sig, data["vertex_count"], data.get("tuples", {}))


@dataclass(frozen=True)
class RootedStructure:
    """A structure with a designated root vertex.  Rooted structures are
    nonempty by construction."""

    structure: Structure
    root: int

    def __post_init__(self) -> None:
        if not (0 <= self.root < self.structure.vertex_count):
            raise ValueError("root must be a vertex of the structure")

    @property
    def signature(self) -> Signature:
        return self.structure.signature


@dataclass(frozen=True)
class Homomorphism:
    """A tuple-preserving vertex map, validated at construction."""

    source: Structure
    target: Structure
    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.source.signature != self.target.signature:
            raise SignatureMismatch("homomorphism endpoints differ in signature")
        if len(self.mapping) != self.source.vertex_count:
            raise ValueError("mapping must cover every source vertex")
        for w in self.mapping:
            if not (0 <= w < self.target.vertex_count):
                raise ValueError("mapping image out of range")
        for ts, us in zip(self.source.tuples, self.target.tuples):
            for t in ts:
                if tuple(self.mapping[v] for v in t) not in us:
                    raise ValueError(f"tuple {t} not preserved")

    def apply(self, v: int) -> int:
        return self.mapping[v]

    @property
    def image(self) -> frozenset[int]:
        return frozenset(self.mapping)

    def to_json_dict(self) -> dict:
        return {
            "source": self.source.to_json_dict(),
            "target": self.target.to_json_dict(),
            "mapping": list(self.mapping),
        }


# ---------------------------------------------------------------------------
# incidence multigraph
# ---------------------------------------------------------------------------


class IncidenceGraph(NamedTuple):
    """Bipartite incidence multigraph of a structure.

    One side is the structure's vertices, the other its blocks (hyperedges);
    a block (R, t) is joined to t[i] once per position i, so a vertex
    occupying two positions of one tuple creates parallel edges.
    """

    blocks: tuple[tuple[int, tuple[int, ...]], ...]
    vertex_edges: tuple[tuple[tuple[int, int], ...], ...]  # per vertex: (block id, position)
    has_parallel: bool


@lru_cache(maxsize=None)
def incidence(s: Structure) -> IncidenceGraph:
    blocks = tuple(s.blocks())
    per_vertex: list[list[tuple[int, int]]] = [[] for _ in range(s.vertex_count)]
    parallel = False
    for bid, (_, t) in enumerate(blocks):
        seen = set()
        for pos, v in enumerate(t):
            per_vertex[v].append((bid, pos))
            if v in seen:
                parallel = True
            seen.add(v)
    return IncidenceGraph(
        blocks, tuple(tuple(es) for es in per_vertex), parallel
    )


@lru_cache(maxsize=None)
def _component_labels(s: Structure) -> tuple[tuple[int, ...], int]:
    """Label every vertex with its incidence-graph component id (components
    numbered by least vertex)."""
    inc = incidence(s)
    label = [-1] * s.vertex_count
    comp = 0
    for start in range(s.vertex_count):
        if label[start] != -1:
            continue
        stack = [start]
        label[start] = comp
        while stack:
            v = stack.pop()
            for bid, _ in inc.vertex_edges[v]:
                for w in inc.blocks[bid][1]:
                    if label[w] == -1:
                        label[w] = comp
                        stack.append(w)
        comp += 1
    return tuple(label), comp


class Component(NamedTuple):
    structure: Structure
    back_map: tuple[int, ...]  # new vertex id -> original vertex id


def substructure_on(s: Structure, vertices: Sequence[int]) -> tuple[Structure, tuple[int, ...]]:
    """Induced substructure on the given vertex list (kept in the given
    order).  Returns the substructure and the new->old vertex map."""
    keep = list(vertices)
    old_to_new = {v: i for i, v in enumerate(keep)}
    new_tuples = tuple(
        frozenset(
            tuple(old_to_new[v] for v in t)
            for t in ts
            if all(v in old_to_new for v in t)
        )
        for ts in s.tuples
    )
    return Structure(s.signature, len(keep), new_tuples), tuple(keep)


def components(s: Structure) -> list[Component]:
    """Substructures induced by the connected components of the incidence
    graph, ordered by least original vertex.  Isolated vertices are
    single-vertex components."""
    label, count = _component_labels(s)
    out = []
    for c in range(count):
        verts = [v for v in range(s.vertex_count) if label[v] == c]
        sub, back = substructure_on(s, verts)
        out.append(Component(sub, back))
    return out


@lru_cache(maxsize=None)
def is_forest(s: Structure) -> bool:
    """True iff the incidence graph has no cycles and no parallel edges.
    The empty structure counts as a forest."""
    inc = incidence(s)
    if inc.has_parallel:
        return False
    _, ncomp = _component_labels(s)
    nodes = s.vertex_count + len(inc.blocks)
    edges = sum(len(t) for _, t in inc.blocks)
    return edges == nodes - ncomp


def is_tree(s: Structure) -> bool:
    """True iff the incidence graph is a tree (connected forest).  The empty
    structure has zero components and is not a tree."""
    if not is_forest(s):
        return False
    _, ncomp = _component_labels(s)
    return ncomp == 1


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------


def _require_same_signature(a: Structure, b: Structure) -> None:
    if a.signature != b.signature:
        raise SignatureMismatch("structures have different signatures")


def disjoint_union(a: Structure, b: Structure) -> Structure:
    """Disjoint union; b's vertices are shifted past a's."""
    _require_same_signature(a, b)
    off = a.vertex_count
    new = tuple(
        ta | frozenset(tuple(v + off for v in t) for t in tb)
        for ta, tb in zip(a.tuples, b.tuples)
    )
    return Structure(a.signature, a.vertex_count + b.vertex_count, new)


def direct_product(a: Structure, b: Structure) -> Structure:
    """Categorical product: vertex set = pairs (encoded i*|V(b)|+j); a tuple
    is present iff both projections are tuples."""
    _require_same_signature(a, b)
    nb = b.vertex_count

    def enc(i: int, j: int) -> int:
        return i * nb + j

    new = tuple(
        frozenset(
            tuple(enc(x, y) for x, y in zip(ta, tb))
            for ta in tsa
            for tb in tsb
        )
        for tsa, tsb in zip(a.tuples, b.tuples)
    )
    return Structure(a.signature, a.vertex_count * nb, new)


def t0(signature: Signature) -> RootedStructure:
    """The single-vertex rooted structure with no tuples: the identity of
    the root-merging combination."""
    return RootedStructure(Structure.make(signature, 1), 0)


def combine_rooted(a: RootedStructure, b: RootedStructure) -> RootedStructure:
    """Disjoint union with the two roots merged into one vertex, which
    becomes the new root."""
    if a.signature != b.signature:
        raise SignatureMismatch("rooted structures have different signatures")
    na = a.structure.vertex_count
    # b's root maps onto a's root; the rest of b shifts past a.
    remap = []
    nxt = na
    for v in range(b.structure.vertex_count):
        if v == b.root:
            remap.append(a.root)
        else:
            remap.append(nxt)
            nxt += 1
    new = tuple(
        ta | frozenset(tuple(remap[v] for v in t) for t in tb)
        for ta, tb in zip(a.structure.tuples, b.structure.tuples)
    )
    return RootedStructure(Structure(a.signature, nxt, new), a.root)


def unroot(a: RootedStructure) -> Structure:
    return a.structure


def concatenate(rel_name: str, args: Sequence[RootedStructure]) -> Structure:
    """Disjoint union of the arguments plus one new tuple of the named
    relation on their roots."""
    if not args:
        raise ValueError("concatenation needs at least one argument")
    sig = args[0].signature
    arity = sig.arity(rel_name)
    if len(args) != arity:
        raise ValueError(f"{rel_name!r} has arity {arity}, got {len(args)} arguments")
    for a in args:
        if a.signature != sig:
            raise SignatureMismatch("concatenation arguments differ in signature")
    offs = []
    total = 0
    for a in args:
        offs.append(total)
        total += a.structure.vertex_count
    tuple_sets = []
    ri_target = sig.index(rel_name)
    for ri in range(len(sig.relations)):
        ts = set()
        for a, off in zip(args, offs):
            ts.update(tuple(v + off for v in t) for t in a.structure.tuples[ri])
        if ri == ri_target:
            ts.add(tuple(a.root + off for a, off in zip(args, offs)))
        tuple_sets.append(frozenset(ts))
    return Structure(sig, total, tuple(tuple_sets))


def concatenate_rooted(
    rel_name: str, args: Sequence[RootedStructure], root_position: int
) -> RootedStructure:
    """Concatenation rooted at the root of the argument in the given
    (0-based) position."""
    s = concatenate(rel_name, args)
    off = sum(a.structure.vertex_count for a in args[:root_position])
    return RootedStructure(s, off + args[root_position].root)


def stable_json(data) -> str:
    """Deterministic JSON rendering used for all persisted artifacts."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"
