"""Finite algebras recognizing regular families of sigma-forests.

An algebra carries a finite state set with three operation tables:

* ``combine`` — state of two rooted forests glued at their roots;
* ``nu``      — state after adding a fresh isolated root;
* ``mu[R][i]``— state of the concatenation of r rooted forests by a new
  R-tuple on their roots, rooted at position i.

``init`` is the state of the single-vertex rooted forest; a rooted forest is
recognized when its state is terminal, and the empty structure is handled by
a standalone flag.  Membership of an unrooted forest is root-independent for
coherent algebras (checkable with :func:`check_coherence`).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iproduct
from typing import Callable, Iterator, NamedTuple, Optional, Sequence

from .canon import (
    canonical_form,
    enumerate_structures,
    forest_encoding,
    rebuild_rooted,
    rooted_encoding,
)
from .structures import (
    NotAForest,
    RootedStructure,
    Signature,
    SignatureMismatch,
    Structure,
    combine_rooted,
    components,
    concatenate_rooted,
    disjoint_union,
    incidence,
    is_forest,
    substructure_on,
    t0,
    unroot,
)

STATE_CAP = 20000


class IncoherentAlgebra(ValueError):
    """Operation tables violate an algebra axiom or evaluation coherence."""


@dataclass(frozen=True, eq=False)
class ForestAlgebra:
    signature: Signature
    states: tuple[str, ...]
    init: int
    terminals: frozenset[int]
    empty_in_family: bool
    combine: tuple[tuple[int, ...], ...]
    nu: tuple[int, ...]
    mu: tuple[tuple[tuple, ...], ...]  # mu[rel][pos]: nested tuples, depth = arity

    def __post_init__(self) -> None:
        n = len(self.states)
        if len(set(self.states)) != n:
            raise ValueError("state names must be unique")
        if not (0 <= self.init < n):
            raise ValueError("init out of range")
        if not all(0 <= t < n for t in self.terminals):
            raise ValueError("terminal out of range")
        if len(self.combine) != n or any(len(r) != n for r in self.combine):
            raise ValueError("combine must be a full n x n matrix")
        if any(not (0 <= v < n) for r in self.combine for v in r):
            raise ValueError("combine entry out of range")
        if len(self.nu) != n or any(not (0 <= v < n) for v in self.nu):
            raise ValueError("nu must be a total n-entry map")
        if len(self.mu) != len(self.signature.relations):
            raise ValueError("one mu table group per relation required")
        for (name, arity), group in zip(self.signature.relations, self.mu):
            if len(group) != arity:
                raise ValueError(f"{name!r} needs {arity} position tables")
            for tab in group:
                self._check_nested(tab, arity, n, name)

    @staticmethod
    def _check_nested(tab, depth: int, n: int, name: str) -> None:
        if depth == 0:
            if not (isinstance(tab, int) and 0 <= tab < n):
                raise ValueError(f"mu entry for {name!r} out of range")
            return
        if len(tab) != n:
            raise ValueError(f"mu table for {name!r} has wrong dimension")
        for sub in tab:
            ForestAlgebra._check_nested(sub, depth - 1, n, name)

    @property
    def state_count(self) -> int:
        return len(self.states)

    def mu_get(self, rel_index: int, pos: int, args: Sequence[int]) -> int:
        tab = self.mu[rel_index][pos]
        for a in args:
            tab = tab[a]
        return tab

    # -- JSON ----------------------------------------------------------------

    def to_json_dict(self) -> dict:
        def listify(tab, depth):
            if depth == 0:
                return tab
            return [listify(sub, depth - 1) for sub in tab]

        return {
            "signature": self.signature.to_json_dict(),
            "states": list(self.states),
            "init": self.init,
            "terminals": sorted(self.terminals),
            "empty_in_family": self.empty_in_family,
            "combine": [list(r) for r in self.combine],
            "nu": list(self.nu),
            "mu": {
                name: {
                    str(pos + 1): listify(self.mu[ri][pos], arity)
                    for pos in range(arity)
                }
                for ri, (name, arity) in enumerate(self.signature.relations)
            },
        }

    @classmethod
    def from_json_dict(cls, data) -> "ForestAlgebra":
        sig = Signature.from_json_dict(data["signature"])

        def tuplify(tab, depth):
            if depth == 0:
                return int(tab)
            return tuple(tuplify(sub, depth - 1) for sub in tab)

        mu = tuple(
            tuple(
                tuplify(data["mu"][name][str(pos + 1)], arity)
                for pos in range(arity)
            )
            for name, arity in sig.relations
        )
        return cls(
            signature=sig,
            states=tuple(data["states"]),
            init=int(data["init"]),
            terminals=frozenset(int(t) for t in data["terminals"]),
            empty_in_family=bool(data["empty_in_family"]),
            combine=tuple(tuple(int(v) for v in r) for r in data["combine"]),
            nu=tuple(int(v) for v in data["nu"]),
            mu=mu,
        )


@dataclass(frozen=True)
class FamilyHandle:
    """An algebra together with the construction trace that produced it
    (used in reports)."""

    algebra: ForestAlgebra
    provenance: str


# ---------------------------------------------------------------------------
# generic worklist construction from semantic state objects
# ---------------------------------------------------------------------------


def _build_algebra(
    signature: Signature,
    init_obj,
    nu_fn: Callable,
    combine_fn: Callable,
    mu_fn: Callable,
    terminal_fn: Callable,
    name_fn: Callable,
    empty_in_family: bool,
) -> ForestAlgebra:
    """Close {init} under nu, combine and every mu, then tabulate."""
    objs = [init_obj]
    index = {init_obj: 0}

    def add(o) -> None:
        if o not in index:
            if len(objs) >= STATE_CAP:
                raise ValueError("algebra construction exceeded the state cap")
            index[o] = len(objs)
            objs.append(o)

    nu_memo: dict = {}
    comb_memo: dict = {}
    mu_memo: dict = {}

    def nu_of(o):
        if o not in nu_memo:
            nu_memo[o] = nu_fn(o)
        return nu_memo[o]

    def comb_of(o1, o2):
        key = (index[o1], index[o2])
        if key not in comb_memo:
            comb_memo[key] = combine_fn(o1, o2)
        return comb_memo[key]

    def mu_of(ri, pos, args):
        key = (ri, pos, tuple(index[a] for a in args))
        if key not in mu_memo:
            mu_memo[key] = mu_fn(ri, pos, args)
        return mu_memo[key]

    size = 0
    while size != len(objs):
        size = len(objs)
        snapshot = list(objs)
        for o in snapshot:
            add(nu_of(o))
        for o1 in snapshot:
            for o2 in snapshot:
                add(comb_of(o1, o2))
        for ri, (_, arity) in enumerate(signature.relations):
            for pos in range(arity):
                for args in iproduct(snapshot, repeat=arity):
                    add(mu_of(ri, pos, args))

    n = len(objs)
    combine_t = tuple(
        tuple(index[comb_of(o1, o2)] for o2 in objs) for o1 in objs
    )
    nu_t = tuple(index[nu_of(o)] for o in objs)

    def mu_table(ri, pos, arity, prefix):
        if len(prefix) == arity:
            return index[mu_of(ri, pos, prefix)]
        return tuple(mu_table(ri, pos, arity, prefix + (o,)) for o in objs)

    mu_t = tuple(
        tuple(mu_table(ri, pos, arity, ()) for pos in range(arity))
        for ri, (_, arity) in enumerate(signature.relations)
    )
    names = []
    seen = set()
    for i, o in enumerate(objs):
        nm = name_fn(o)
        if nm in seen:
            nm = f"{nm}#{i}"
        seen.add(nm)
        names.append(nm)
    return ForestAlgebra(
        signature=signature,
        states=tuple(names),
        init=0,
        terminals=frozenset(i for i, o in enumerate(objs) if terminal_fn(o)),
        empty_in_family=empty_in_family,
        combine=combine_t,
        nu=nu_t,
        mu=mu_t,
    )


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _eval_vertex(
    alg: ForestAlgebra, s: Structure, v: int, banned: int, base: Optional[int]
) -> int:
    inc = incidence(s)
    st = alg.init if base is None else base
    for bid, pos in sorted(inc.vertex_edges[v]):
        if bid == banned:
            continue
        ri, t = inc.blocks[bid]
        args: list[Optional[int]] = [None] * len(t)
        for j in range(len(t)):
            if j != pos:
                args[j] = _eval_vertex(alg, s, t[j], bid, None)
        args[pos] = st
        st = alg.mu_get(ri, pos, args)
    return st


def eval_rooted(alg: ForestAlgebra, rooted: RootedStructure) -> int:
    """Canonical recursive evaluation of a rooted forest.

    Stray components are folded in first (as a fresh isolated root over the
    remaining forest), then the hyperedges at the root are attached in
    canonical block order; coherent algebras give the same state under any
    decomposition.
    """
    s = rooted.structure
    if s.signature != alg.signature:
        raise SignatureMismatch("structure and algebra signatures differ")
    if not is_forest(s):
        raise NotAForest("evaluation requires a forest")
    comps = components(s)
    base: Optional[int] = None
    if len(comps) > 1:
        stray_vertices = []
        for comp, back in comps:
            if rooted.root not in back:
                stray_vertices.extend(back)
        stray_vertices.sort()
        rest, _ = substructure_on(s, stray_vertices)
        base = alg.nu[eval_rooted(alg, RootedStructure(rest, 0))]
    return _eval_vertex(alg, s, rooted.root, -1, base)


def member(alg: ForestAlgebra, s: Structure) -> bool:
    """Membership of an unrooted forest in the recognized family."""
    if not is_forest(s):
        raise NotAForest("membership requires a forest")
    if s.is_empty:
        return alg.empty_in_family
    return eval_rooted(alg, RootedStructure(s, 0)) in alg.terminals


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def build_hom_family(d: Structure) -> ForestAlgebra:
    """Algebra recognizing the forests admitting a homomorphism to d.

    States are sets of still-possible root images, encoded as bitmasks over
    V(d); the state count is bounded by 2^|V(d)|.
    """
    n = d.vertex_count
    full = (1 << n) - 1
    rel_tuples = [sorted(ts) for ts in d.tuples]

    def nu_fn(m: int) -> int:
        return full if m else 0

    def combine_fn(m1: int, m2: int) -> int:
        return m1 & m2

    def mu_fn(ri: int, pos: int, args) -> int:
        out = 0
        for u in rel_tuples[ri]:
            for j, m in enumerate(args):
                if not (m >> u[j]) & 1:
                    break
            else:
                out |= 1 << u[pos]
        return out

    def name_fn(m: int) -> str:
        return "{" + ",".join(str(v) for v in range(n) if (m >> v) & 1) + "}"

    return _build_algebra(
        d.signature, full, nu_fn, combine_fn, mu_fn,
        terminal_fn=lambda m: m != 0, name_fn=name_fn, empty_in_family=True,
    )


@lru_cache(maxsize=None)
def build_trees_family(sig: Signature) -> ForestAlgebra:
    """Two-state algebra recognizing exactly the sigma-trees."""
    return _build_algebra(
        sig,
        True,  # state: "still a rooted tree"
        nu_fn=lambda o: False,
        combine_fn=lambda a, b: a and b,
        mu_fn=lambda ri, pos, args: all(args),
        terminal_fn=lambda o: o,
        name_fn=lambda o: "tree" if o else "nontree",
        empty_in_family=False,
    )


@lru_cache(maxsize=None)
def build_all_forests_family(sig: Signature) -> ForestAlgebra:
    """One-state algebra recognizing every forest (including the empty
    structure)."""
    return _build_algebra(
        sig, 0,
        nu_fn=lambda o: 0,
        combine_fn=lambda a, b: 0,
        mu_fn=lambda ri, pos, args: 0,
        terminal_fn=lambda o: True,
        name_fn=lambda o: "all",
        empty_in_family=True,
    )


def family_complement(alg: ForestAlgebra) -> ForestAlgebra:
    """Same states and tables; terminals and the empty flag are flipped."""
    return ForestAlgebra(
        signature=alg.signature,
        states=alg.states,
        init=alg.init,
        terminals=frozenset(range(alg.state_count)) - alg.terminals,
        empty_in_family=not alg.empty_in_family,
        combine=alg.combine,
        nu=alg.nu,
        mu=alg.mu,
    )


def _family_product(
    a1: ForestAlgebra, a2: ForestAlgebra, keep: Callable[[bool, bool], bool],
    empty: bool,
) -> ForestAlgebra:
    if a1.signature != a2.signature:
        raise SignatureMismatch("boolean combination across signatures")
    t1, t2 = a1.terminals, a2.terminals
    return _build_algebra(
        a1.signature,
        (a1.init, a2.init),
        nu_fn=lambda p: (a1.nu[p[0]], a2.nu[p[1]]),
        combine_fn=lambda p, q: (a1.combine[p[0]][q[0]], a2.combine[p[1]][q[1]]),
        mu_fn=lambda ri, pos, args: (
            a1.mu_get(ri, pos, [a[0] for a in args]),
            a2.mu_get(ri, pos, [a[1] for a in args]),
        ),
        terminal_fn=lambda p: keep(p[0] in t1, p[1] in t2),
        name_fn=lambda p: f"({a1.states[p[0]]}|{a2.states[p[1]]})",
        empty_in_family=empty,
    )


def family_union(a1: ForestAlgebra, a2: ForestAlgebra) -> ForestAlgebra:
    return _family_product(
        a1, a2, lambda x, y: x or y, a1.empty_in_family or a2.empty_in_family
    )


def family_intersection(a1: ForestAlgebra, a2: ForestAlgebra) -> ForestAlgebra:
    return _family_product(
        a1, a2, lambda x, y: x and y, a1.empty_in_family and a2.empty_in_family
    )


def build_obstruction_family(ds: Sequence[Structure], signature: Optional[Signature] = None) -> ForestAlgebra:
    """Algebra recognizing the forests with no homomorphism to any of the
    given structures.  An empty list recognizes all forests."""
    if not ds:
        if signature is None:
            raise ValueError("an empty obstruction list needs an explicit signature")
        return build_all_forests_family(signature)
    acc = family_complement(build_hom_family(ds[0]))
    for d in ds[1:]:
        acc = minimize(family_intersection(acc, family_complement(build_hom_family(d))))
    return acc


def build_finite_family(
    members: Sequence[Structure], signature: Optional[Signature] = None
) -> ForestAlgebra:
    """Minimized algebra recognizing exactly the listed forests up to
    isomorphism.

    States are the rooted-forest classes with a nonempty extension inside
    some member ("live" root splits of the members) plus a dead sink; every
    operation is performed on class representatives and mapped back through
    the canonical rooted encoding.
    """
    if not members and signature is None:
        raise ValueError("an empty member list needs an explicit signature")
    sig = signature if signature is not None else members[0].signature
    for m in members:
        if m.signature != sig:
            raise SignatureMismatch("members differ in signature")
        if m.is_empty:
            raise ValueError("the empty structure is carried by the flag, not the member list")
        if not is_forest(m):
            raise NotAForest("finite families must consist of forests")
    max_size = max((m.vertex_count for m in members), default=0)
    member_keys = {forest_encoding(m) for m in members}

    live: dict[tuple, RootedStructure] = {}
    for m in members:
        for enc in _root_splits(m):
            if enc not in live:
                live[enc] = rebuild_rooted(sig, enc)

    dead = "dead"
    order = sorted(live)
    objs: list = order + [dead]
    rep = {enc: live[enc] for enc in order}

    def classify(rs: RootedStructure):
        if rs.structure.vertex_count > max_size:
            return dead
        enc = rooted_encoding(rs)
        return enc if enc in live else dead

    def nu_fn(o):
        if o is dead:
            return dead
        r = rep[o]
        grown = disjoint_union(r.structure, Structure.make(sig, 1))
        return classify(RootedStructure(grown, r.structure.vertex_count))

    def combine_fn(o1, o2):
        if o1 is dead or o2 is dead:
            return dead
        r1, r2 = rep[o1], rep[o2]
        if r1.structure.vertex_count + r2.structure.vertex_count - 1 > max_size:
            return dead
        return classify(combine_rooted(r1, r2))

    def mu_fn(ri, pos, args):
        if any(a is dead for a in args):
            return dead
        reps = [rep[a] for a in args]
        if sum(r.structure.vertex_count for r in reps) > max_size:
            return dead
        name = sig.relations[ri][0]
        return classify(concatenate_rooted(name, reps, pos))

    def terminal_fn(o):
        if o is dead:
            return False
        return forest_encoding(unroot(rep[o])) in member_keys

    index = {o: i for i, o in enumerate(objs)}
    init_obj = classify(t0(sig))

    n = len(objs)
    combine_t = tuple(
        tuple(index[combine_fn(o1, o2)] for o2 in objs) for o1 in objs
    )
    nu_t = tuple(index[nu_fn(o)] for o in objs)

    def mu_table(ri, pos, arity, prefix):
        if len(prefix) == arity:
            return index[mu_fn(ri, pos, prefix)]
        return tuple(mu_table(ri, pos, arity, prefix + (o,)) for o in objs)

    mu_t = tuple(
        tuple(mu_table(ri, pos, arity, ()) for pos in range(arity))
        for ri, (_, arity) in enumerate(sig.relations)
    )
    raw = ForestAlgebra(
        signature=sig,
        states=tuple(
            [f"s{i}" for i in range(len(order))] + ["dead"]
        ),
        init=index[init_obj],
        terminals=frozenset(i for i, o in enumerate(objs) if terminal_fn(o)),
        empty_in_family=False,
        combine=combine_t,
        nu=nu_t,
        mu=mu_t,
    )
    return minimize(raw)


def _root_splits(m: Structure) -> Iterator[tuple]:
    """Rooted encodings of every way to cut a member at a vertex: pick the
    vertex, keep any subset of its incident branches and any subset of the
    other components."""
    inc = incidence(m)
    label, _ = _comp_label(m)
    for v in range(m.vertex_count):
        branches = []
        for bid, _pos in inc.vertex_edges[v]:
            branches.append(_branch_of(m, v, bid))
        stray_comps: dict[int, list[int]] = {}
        for u in range(m.vertex_count):
            if label[u] != label[v]:
                stray_comps.setdefault(label[u], []).append(u)
        strays = list(stray_comps.values())
        for bmask in range(1 << len(branches)):
            chosen_blocks: set[int] = set()
            verts = {v}
            for k, (bverts, bblocks) in enumerate(branches):
                if (bmask >> k) & 1:
                    verts |= bverts
                    chosen_blocks |= bblocks
            for smask in range(1 << len(strays)):
                sverts = set(verts)
                for k, group in enumerate(strays):
                    if (smask >> k) & 1:
                        sverts |= set(group)
                rooted = _assemble_rooted(m, v, sverts, chosen_blocks, label)
                yield rooted_encoding(rooted)


@lru_cache(maxsize=None)
def _comp_label(m: Structure):
    from .structures import _component_labels

    return _component_labels(m)


def _branch_of(m: Structure, v: int, bid: int) -> tuple[set[int], set[int]]:
    """Vertices and blocks of the branch hanging off v through block bid."""
    inc = incidence(m)
    verts: set[int] = set()
    blocks: set[int] = {bid}
    stack = [w for w in inc.blocks[bid][1] if w != v]
    while stack:
        w = stack.pop()
        if w in verts:
            continue
        verts.add(w)
        for b2, _ in inc.vertex_edges[w]:
            if b2 in blocks:
                continue
            blocks.add(b2)
            stack.extend(x for x in inc.blocks[b2][1] if x not in verts and x != v)
    return verts, blocks


def _assemble_rooted(
    m: Structure, v: int, verts: set[int], root_blocks: set[int], label
) -> RootedStructure:
    inc = incidence(m)
    keep = sorted(verts)
    new_id = {u: i for i, u in enumerate(keep)}
    sets: list[set] = [set() for _ in m.signature.relations]
    for bid, (ri, t) in enumerate(inc.blocks):
        if bid in root_blocks or (
            label[t[0]] != label[v] and all(u in verts for u in t)
        ):
            sets[ri].add(tuple(new_id[u] for u in t))
    s = Structure(m.signature, len(keep), tuple(frozenset(x) for x in sets))
    return RootedStructure(s, new_id[v])


# ---------------------------------------------------------------------------
# reachability, emptiness, minimization
# ---------------------------------------------------------------------------


class Reachability(NamedTuple):
    forest_reachable: frozenset[int]
    tree_reachable: frozenset[int]


def reachable_states(alg: ForestAlgebra) -> Reachability:
    """States realized by rooted trees (closure of {init} under mu) and by
    rooted forests (closure under mu and nu).  Both sets must be closed
    under combine; a violation marks the algebra incoherent."""
    tree = _op_closure(alg, use_nu=False)
    forest = _op_closure(alg, use_nu=True)
    for a in forest:
        for b in forest:
            if alg.combine[a][b] not in forest:
                raise IncoherentAlgebra("forest-reachable set not closed under combine")
    for a in tree:
        for b in tree:
            if alg.combine[a][b] not in tree:
                raise IncoherentAlgebra("tree-reachable set not closed under combine")
    return Reachability(frozenset(forest), frozenset(tree))


def _op_closure(alg: ForestAlgebra, use_nu: bool) -> set[int]:
    reached = {alg.init}
    size = 0
    while size != len(reached):
        size = len(reached)
        snapshot = list(reached)
        if use_nu:
            reached.update(alg.nu[s] for s in snapshot)
        for ri, (_, arity) in enumerate(alg.signature.relations):
            for pos in range(arity):
                for args in iproduct(snapshot, repeat=arity):
                    reached.add(alg.mu_get(ri, pos, args))
    return reached


def is_empty(alg: ForestAlgebra) -> bool:
    """True iff the family has no member at all (the empty structure
    included)."""
    if alg.empty_in_family:
        return False
    return not (reachable_states(alg).forest_reachable & alg.terminals)


def intersection_is_empty(a1: ForestAlgebra, a2: ForestAlgebra) -> bool:
    """Emptiness of the intersected family, decided on lazily reached state
    pairs (the full product is never materialized)."""
    if a1.signature != a2.signature:
        raise SignatureMismatch("intersection across signatures")
    if a1.empty_in_family and a2.empty_in_family:
        return False
    t1, t2 = a1.terminals, a2.terminals
    init = (a1.init, a2.init)
    if init[0] in t1 and init[1] in t2:
        return False
    reached = {init}
    frontier = [init]
    nu1, nu2 = a1.nu, a2.nu
    rels = a1.signature.relations
    while frontier:
        fresh: list[tuple[int, int]] = []

        def add(p) -> bool:
            if p not in reached:
                reached.add(p)
                fresh.append(p)
                return p[0] in t1 and p[1] in t2
            return False

        for s, t in frontier:
            if add((nu1[s], nu2[t])):
                return False
        snapshot = list(reached)
        for ri, (_, arity) in enumerate(rels):
            for pos in range(arity):
                m1 = a1.mu[ri][pos]
                m2 = a2.mu[ri][pos]
                if arity == 2:
                    for p in frontier:
                        for q in snapshot:
                            if add((m1[p[0]][q[0]], m2[p[1]][q[1]])):
                                return False
                            if add((m1[q[0]][p[0]], m2[q[1]][p[1]])):
                                return False
                else:
                    fset = set(frontier)
                    for args in iproduct(snapshot, repeat=arity):
                        if not any(a in fset for a in args):
                            continue
                        if add(
                            (
                                a1.mu_get(ri, pos, [a[0] for a in args]),
                                a2.mu_get(ri, pos, [a[1] for a in args]),
                            )
                        ):
                            return False
        frontier = fresh
    return True


def intersection_witness(a1: ForestAlgebra, a2: ForestAlgebra) -> Optional[Structure]:
    """A common member of both families, or None."""
    if intersection_is_empty(a1, a2):
        return None
    return find_witness(family_intersection(a1, a2))


def minimize(alg: ForestAlgebra) -> ForestAlgebra:
    """Restrict to forest-reachable states, then merge states by the
    coarsest partition refining terminal/non-terminal that is a congruence
    for combine, nu and every mu.

    Because combine is among the refined operations, distinct output states
    have distinct extension sets; for constructor-built algebras the output
    states are exactly the distinguishable rooted-forest classes.
    """
    fr = sorted(reachable_states(alg).forest_reachable)
    m = len(fr)
    remap = {s: i for i, s in enumerate(fr)}
    comb = [[remap[alg.combine[a][b]] for b in fr] for a in fr]
    nu = [remap[alg.nu[a]] for a in fr]
    term = [a in alg.terminals for a in fr]
    flat_mu: list[tuple[int, int, int, list[int]]] = []  # (ri, pos, arity, flat)
    for ri, (_, arity) in enumerate(alg.signature.relations):
        for pos in range(arity):
            flat = []
            for args in iproduct(fr, repeat=arity):
                flat.append(remap[alg.mu_get(ri, pos, args)])
            flat_mu.append((ri, pos, arity, flat))

    block = [0 if t else 1 for t in term]
    if all(term) or not any(term):
        block = [0] * m
    while True:
        sigs = []
        for i in range(m):
            parts: list = [block[i], block[nu[i]]]
            parts.append(tuple(block[comb[i][j]] for j in range(m)))
            parts.append(tuple(block[comb[j][i]] for j in range(m)))
            for ri, pos, arity, flat in flat_mu:
                for slot in range(arity):
                    vec = []
                    for ctx in iproduct(range(m), repeat=arity - 1):
                        args = list(ctx[:slot]) + [i] + list(ctx[slot:])
                        idx = 0
                        for a in args:
                            idx = idx * m + a
                        vec.append(block[flat[idx]])
                    parts.append(tuple(vec))
            sigs.append(tuple(parts))
        fresh: dict[tuple, int] = {}
        new_block = []
        for sg in sigs:
            if sg not in fresh:
                fresh[sg] = len(fresh)
            new_block.append(fresh[sg])
        if max(new_block, default=-1) == max(block, default=-1) and len(set(new_block)) == len(set(block)):
            break
        block = new_block

    nblocks = len(set(block))
    reps = [block.index(b) for b in range(nblocks)]

    def mu_table(flat, arity, prefix):
        if len(prefix) == arity:
            idx = 0
            for a in prefix:
                idx = idx * m + a
            return block[flat[idx]]
        return tuple(mu_table(flat, arity, prefix + (reps[b],)) for b in range(nblocks))

    mu_by_rel: list[list] = [[] for _ in alg.signature.relations]
    for ri, pos, arity, flat in flat_mu:
        mu_by_rel[ri].append(mu_table(flat, arity, ()))
    return ForestAlgebra(
        signature=alg.signature,
        states=tuple(alg.states[fr[r]] for r in reps),
        init=block[remap[alg.init]],
        terminals=frozenset(b for b in range(nblocks) if term[reps[b]]),
        empty_in_family=alg.empty_in_family,
        combine=tuple(
            tuple(block[comb[reps[b1]][reps[b2]]] for b2 in range(nblocks))
            for b1 in range(nblocks)
        ),
        nu=tuple(block[nu[reps[b]]] for b in range(nblocks)),
        mu=tuple(tuple(group) for group in mu_by_rel),
    )


def distinguishing_combine_context(
    alg: ForestAlgebra, s: int, t: int
) -> Optional[int]:
    """A state c with combine(s, c) terminal xor combine(t, c) terminal.
    On minimized algebras such a context exists for every distinct pair."""
    for c in range(alg.state_count):
        if (alg.combine[s][c] in alg.terminals) != (alg.combine[t][c] in alg.terminals):
            return c
    return None


# ---------------------------------------------------------------------------
# witnesses and member enumeration
# ---------------------------------------------------------------------------


def find_witness(alg: ForestAlgebra) -> Optional[Structure]:
    """Some member of the family, minimal in the number of generator
    applications used to reach its state; None when the family is empty."""
    if alg.empty_in_family:
        return Structure.make(alg.signature, 0)
    INF = float("inf")
    n = alg.state_count
    cost: list = [INF] * n
    deriv: list = [None] * n
    cost[alg.init] = 0
    deriv[alg.init] = ("t0",)
    changed = True
    while changed:
        changed = False
        known = [s for s in range(n) if cost[s] < INF]
        for s in known:
            c = cost[s] + 1
            if c < cost[alg.nu[s]]:
                cost[alg.nu[s]] = c
                deriv[alg.nu[s]] = ("nu", s)
                changed = True
        for ri, (_, arity) in enumerate(alg.signature.relations):
            for pos in range(arity):
                for args in iproduct(known, repeat=arity):
                    c = 1 + sum(cost[a] for a in args)
                    out = alg.mu_get(ri, pos, args)
                    if c < cost[out]:
                        cost[out] = c
                        deriv[out] = ("mu", ri, pos, args)
                        changed = True
    best = None
    for s in sorted(alg.terminals):
        if cost[s] < INF and (best is None or cost[s] < cost[best]):
            best = s
    if best is None:
        return None

    def build(s: int) -> RootedStructure:
        d = deriv[s]
        if d[0] == "t0":
            return t0(alg.signature)
        if d[0] == "nu":
            inner = build(d[1])
            grown = disjoint_union(inner.structure, Structure.make(alg.signature, 1))
            return RootedStructure(grown, inner.structure.vertex_count)
        _, ri, pos, args = d
        return concatenate_rooted(
            alg.signature.relations[ri][0], [build(a) for a in args], pos
        )

    return canonical_form(unroot(build(best)))


def enumerate_members(alg: ForestAlgebra, max_vertices: int) -> Iterator[Structure]:
    """Members among all canonical forests with at most max_vertices
    vertices, in canonical enumeration order."""
    for s in enumerate_structures(alg.signature, max_vertices, forest_only=True):
        if member(alg, s):
            yield s


# ---------------------------------------------------------------------------
# coherence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoherenceReport:
    passed: bool
    trials: int
    failure: Optional[dict]


def random_forest(sig: Signature, rng: random.Random, max_vertices: int) -> Structure:
    """A random forest: random tuples are only ever laid over vertices of
    pairwise distinct components, which preserves forest-ness."""
    n = rng.randint(1, max_vertices)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    sets: list[set] = [set() for _ in sig.relations]
    for _ in range(rng.randint(0, 2 * n)):
        ri = rng.randrange(len(sig.relations))
        arity = sig.relations[ri][1]
        if arity == 1:
            sets[ri].add((rng.randrange(n),))
            continue
        comps: dict[int, list[int]] = {}
        for v in range(n):
            comps.setdefault(find(v), []).append(v)
        if len(comps) < arity:
            continue
        roots = rng.sample(sorted(comps), arity)
        t = tuple(rng.choice(comps[r]) for r in roots)
        sets[ri].add(t)
        for r in roots[1:]:
            parent[find(r)] = find(roots[0])
    return Structure(sig, n, tuple(frozenset(x) for x in sets))


def _eval_vertex_random(
    alg: ForestAlgebra,
    s: Structure,
    v: int,
    banned: int,
    base: Optional[int],
    rng: random.Random,
) -> int:
    inc = incidence(s)
    edges = [e for e in inc.vertex_edges[v] if e[0] != banned]
    rng.shuffle(edges)
    if len(edges) >= 2 and rng.random() < 0.4:
        k = rng.randrange(1, len(edges))
        left = _fold_edges(alg, s, v, edges[:k], base, rng)
        right = _fold_edges(alg, s, v, edges[k:], None, rng)
        return alg.combine[left][right]
    return _fold_edges(alg, s, v, edges, base, rng)


def _fold_edges(alg, s, v, edges, base, rng) -> int:
    st = alg.init if base is None else base
    inc = incidence(s)
    for bid, pos in edges:
        ri, t = inc.blocks[bid]
        args: list[Optional[int]] = [None] * len(t)
        for j in range(len(t)):
            if j != pos:
                args[j] = _eval_vertex_random(alg, s, t[j], bid, None, rng)
        args[pos] = st
        st = alg.mu_get(ri, pos, args)
    return st


def _eval_random(alg: ForestAlgebra, rooted: RootedStructure, rng: random.Random) -> int:
    s = rooted.structure
    comps = components(s)
    base: Optional[int] = None
    if len(comps) > 1:
        strays = [back for _, back in comps if rooted.root not in back]
        if len(strays) >= 2 and rng.random() < 0.5:
            cut = rng.randrange(1, len(strays))
            groups = [strays[:cut], strays[cut:]]
            parts = []
            for group in groups:
                verts = sorted(v for back in group for v in back)
                sub, _ = substructure_on(s, verts)
                root = rng.randrange(sub.vertex_count)
                parts.append(alg.nu[_eval_random(alg, RootedStructure(sub, root), rng)])
            base = alg.combine[parts[0]][parts[1]]
        else:
            verts = sorted(v for back in strays for v in back)
            sub, _ = substructure_on(s, verts)
            root = rng.randrange(sub.vertex_count)
            base = alg.nu[_eval_random(alg, RootedStructure(sub, root), rng)]
    return _eval_vertex_random(alg, s, rooted.root, -1, base, rng)


def check_coherence(
    alg: ForestAlgebra, trials: int = 200, max_vertices: int = 5, seed: int = 0
) -> CoherenceReport:
    """Randomized decomposition-invariance check.

    Each trial evaluates one random rooted forest twice: once canonically
    and once along a random decomposition (random root for strays, random
    hyperedge peel order, random stray grouping through combine).  A state
    mismatch, or a membership flip between two random rootings, is returned
    as a replayable counterexample.
    """
    rng = random.Random(seed)
    for trial in range(trials):
        f = random_forest(alg.signature, rng, max_vertices)
        root = rng.randrange(f.vertex_count)
        ref = eval_rooted(alg, RootedStructure(f, root))
        alt = _eval_random(alg, RootedStructure(f, root), rng)
        if alt != ref:
            return CoherenceReport(
                False,
                trial + 1,
                {
                    "forest": f.to_json_dict(),
                    "root": root,
                    "canonical_state": alg.states[ref],
                    "decomposed_state": alg.states[alt],
                },
            )
        other = rng.randrange(f.vertex_count)
        if (ref in alg.terminals) != (
            eval_rooted(alg, RootedStructure(f, other)) in alg.terminals
        ):
            return CoherenceReport(
                False,
                trial + 1,
                {
                    "forest": f.to_json_dict(),
                    "roots": [root, other],
                    "reason": "membership depends on the root",
                },
            )
    return CoherenceReport(True, trials, None)


def check_table_axioms(alg: ForestAlgebra) -> None:
    """Raise IncoherentAlgebra unless combine is commutative, associative
    and has init as a two-sided identity."""
    n = alg.state_count
    c = alg.combine
    for i in range(n):
        if c[alg.init][i] != i or c[i][alg.init] != i:
            raise IncoherentAlgebra("init is not a combine identity")
        for j in range(n):
            if c[i][j] != c[j][i]:
                raise IncoherentAlgebra("combine is not commutative")
            for k in range(n):
                if c[c[i][j]][k] != c[i][c[j][k]]:
                    raise IncoherentAlgebra("combine is not associative")


def validate_algebra(
    alg: ForestAlgebra, trials: int = 64, max_vertices: int = 4, seed: int = 0
) -> None:
    """Gate for externally supplied algebras: structural checks happen at
    construction; here the table axioms and randomized coherence must pass,
    otherwise the algebra is rejected with the counterexample."""
    check_table_axioms(alg)
    report = check_coherence(alg, trials=trials, max_vertices=max_vertices, seed=seed)
    if not report.passed:
        raise IncoherentAlgebra(f"coherence counterexample: {report.failure}")
