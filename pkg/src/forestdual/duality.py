"""Construction of finite homomorphism duals for regular forest families.

For a family O of trees given as a minimized algebra, the dual structure has
as vertices the Galois-closed sets of tree-reachable states (intersections of
single-generator orthogonals under "combine lands in a terminal"), filtered
to contain the initial state and avoid terminals; a relation tuple is present
when every choice of member states keeps all concatenation results inside the
chosen sets.  For families of forests, one dual per admissible set of tree
classes is emitted.

Class bookkeeping: the class of a nonempty forest A is the pair
(state contributed as a stray component, membership of A itself).  The
membership bit is the empty-context distinction: two forests with equal
stray states may still differ on whether they belong to the family, and the
dual family construction must keep them apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product as iproduct
from typing import Iterable, Optional, Sequence, Union

from .algebra import (
    ForestAlgebra,
    _build_algebra,
    build_hom_family,
    build_obstruction_family,
    build_trees_family,
    eval_rooted,
    family_complement,
    family_intersection,
    find_witness,
    intersection_is_empty,
    minimize,
    reachable_states,
)
from .canon import enumerate_structures
from .hom import find_hom, hom_exists, is_hom_equivalent
from .structures import (
    Homomorphism,
    RootedStructure,
    Structure,
    is_tree,
)


class EmptyStructureInFamily(ValueError):
    """Dual constructions reject families containing the empty structure:
    it has no components, so no tree family can cover it."""


class NotATreeFamily(ValueError):
    """The tree-dual construction requires every member to be a tree."""


@dataclass(frozen=True)
class ForestClass:
    """Extension class of a nonempty forest: the state it contributes when
    added as stray components, plus whether the forest itself is a member."""

    stray_state: int
    in_family: bool


@dataclass(frozen=True)
class DualVertex:
    """A Galois-closed set of tree-reachable states: one vertex of a dual
    structure.  Contains the initial state and avoids terminals."""

    state_set: frozenset[int]


@dataclass(frozen=True)
class AdmissibleFamily:
    """A union of tree classes containing a component of every member."""

    class_set: frozenset[ForestClass]


@dataclass(frozen=True, eq=False)
class TreeDual:
    """A dual structure with its vertex annotations: vertex i of the
    structure denotes the state set vertex_sets[i] over `algebra` (the
    minimized algebra of the tree family the dual was built from)."""

    structure: Structure
    vertex_sets: tuple[DualVertex, ...]
    algebra: ForestAlgebra
    admissible: Optional[AdmissibleFamily] = None

    def to_json_dict(self) -> dict:
        out = {
            "structure": self.structure.to_json_dict(),
            "vertex_state_sets": [
                sorted(self.algebra.states[s] for s in dv.state_set)
                for dv in self.vertex_sets
            ],
        }
        if self.admissible is not None:
            # class indices refer to the minimized algebra of the source
            # family, not to self.algebra (the tree-class family of q)
            out["admissible_classes"] = sorted(
                [c.stray_state, c.in_family] for c in self.admissible.class_set
            )
        return out


DualLike = Union[Structure, TreeDual]


def _dual_structures(duals: Iterable[DualLike]) -> list[Structure]:
    return [d.structure if isinstance(d, TreeDual) else d for d in duals]


@lru_cache(maxsize=None)
def _minimized(alg: ForestAlgebra) -> ForestAlgebra:
    return minimize(alg)


# ---------------------------------------------------------------------------
# forest classes
# ---------------------------------------------------------------------------


def forest_state(alg: ForestAlgebra, a: Structure) -> ForestClass:
    """The extension class of an unrooted forest.

    Two forests are interchangeable as union summands within the family iff
    their classes are equal; the stray state is the nu-image of any rooted
    evaluation (the state of the forest with a fresh isolated root)."""
    x = _minimized(alg)
    if a.is_empty:
        return ForestClass(x.init, x.empty_in_family)
    st = eval_rooted(x, RootedStructure(a, 0))
    return ForestClass(x.nu[st], st in x.terminals)


def tree_classes(alg: ForestAlgebra) -> frozenset[ForestClass]:
    """The classes realized by single trees."""
    x = _minimized(alg)
    reach = reachable_states(x)
    return frozenset(
        ForestClass(x.nu[s], s in x.terminals) for s in reach.tree_reachable
    )


# ---------------------------------------------------------------------------
# duals of tree families
# ---------------------------------------------------------------------------


def tree_dual(alg: ForestAlgebra) -> TreeDual:
    """The dual structure of a family of trees: a structure receiving
    exactly the structures that no member maps to.

    Raises NotATreeFamily when some member is not a tree (the empty
    structure included)."""
    if alg.empty_in_family:
        raise EmptyStructureInFamily("the family contains the empty structure")
    cotrees = family_complement(build_trees_family(alg.signature))
    if not intersection_is_empty(alg, cotrees):
        raise NotATreeFamily("the family has a member that is not a tree")
    x = _minimized(alg)
    tree_states = sorted(reachable_states(x).tree_reachable)
    terminals = x.terminals
    comb = x.combine
    orthogonal = {
        h: frozenset(c for c in tree_states if comb[h][c] not in terminals)
        for h in tree_states
    }
    closure: set[frozenset[int]] = {frozenset(tree_states)}
    frontier = [frozenset(tree_states)]
    while frontier:
        fresh = []
        for s in frontier:
            for h in tree_states:
                cut = s & orthogonal[h]
                if cut not in closure:
                    closure.add(cut)
                    fresh.append(cut)
        frontier = fresh
    vertices = sorted(
        (s for s in closure if x.init in s and not (s & terminals)),
        key=lambda s: (len(s), sorted(s)),
    )
    rels = []
    for ri, (_, arity) in enumerate(alg.signature.relations):
        present = set()
        for vt in iproduct(range(len(vertices)), repeat=arity):
            if _dual_tuple_ok(x, ri, [vertices[k] for k in vt]):
                present.add(vt)
        rels.append(frozenset(present))
    structure = Structure(alg.signature, len(vertices), tuple(rels))
    return TreeDual(structure, tuple(DualVertex(s) for s in vertices), x)


def _dual_tuple_ok(x: ForestAlgebra, ri: int, sets: Sequence[frozenset[int]]) -> bool:
    for args in iproduct(*[sorted(s) for s in sets]):
        for j in range(len(sets)):
            if x.mu_get(ri, j, args) not in sets[j]:
                return False
    return True


def check_tinimage(
    alg: ForestAlgebra, dual: TreeDual, a: Structure, phi: Homomorphism
) -> bool:
    """Structural self-test of the dual: under any homomorphism phi of a
    tree a into the dual, the state of (a, v) must lie in the state set of
    the dual vertex phi(v), for every v."""
    if not is_tree(a):
        raise ValueError("check_tinimage expects a tree")
    if phi.target is not dual.structure and phi.target != dual.structure:
        raise ValueError("phi must map into the dual structure")
    x = dual.algebra
    for v in range(a.vertex_count):
        st = eval_rooted(x, RootedStructure(a, v))
        if st not in dual.vertex_sets[phi.mapping[v]].state_set:
            return False
    return True


# ---------------------------------------------------------------------------
# duals of forest families
# ---------------------------------------------------------------------------


def _bad_components_family(x: ForestAlgebra, q: frozenset[ForestClass]) -> ForestAlgebra:
    """Algebra for the forests none of whose components has class in q.
    State: (root-component state in x, 'all finalized components avoid q')."""

    def cls(k: int) -> ForestClass:
        return ForestClass(x.nu[k], k in x.terminals)

    return _build_algebra(
        x.signature,
        (x.init, True),
        nu_fn=lambda p: (x.init, p[1] and cls(p[0]) not in q),
        combine_fn=lambda p, r: (x.combine[p[0]][r[0]], p[1] and r[1]),
        mu_fn=lambda ri, pos, args: (
            x.mu_get(ri, pos, [a[0] for a in args]),
            all(a[1] for a in args),
        ),
        terminal_fn=lambda p: p[1] and cls(p[0]) not in q,
        name_fn=lambda p: f"({x.states[p[0]]}|{'ok' if p[1] else 'hit'})",
        empty_in_family=False,
    )


def admissibility_witness(
    alg: ForestAlgebra, q: Iterable[ForestClass]
) -> Optional[Structure]:
    """A member of the family with no component in the classes q, or None
    when q is admissible."""
    x = _minimized(alg)
    if x.empty_in_family:
        raise EmptyStructureInFamily("admissibility is undefined with the empty member")
    qset = frozenset(q)
    if not qset <= tree_classes(alg):
        raise ValueError("q must consist of realized tree classes")
    bad = _bad_components_family(x, qset)
    if intersection_is_empty(x, bad):
        return None
    return find_witness(family_intersection(x, bad))


def is_admissible(alg: ForestAlgebra, q: Iterable[ForestClass]) -> bool:
    """True iff every member of the family has a component whose class lies
    in q (and q is a union of realized tree classes)."""
    return admissibility_witness(alg, q) is None


def _tree_class_family(x: ForestAlgebra, q: frozenset[ForestClass]) -> ForestAlgebra:
    """Algebra for the trees whose class lies in q."""
    trees = build_trees_family(x.signature)
    tree_terminal = trees.terminals

    return _build_algebra(
        x.signature,
        (x.init, trees.init),
        nu_fn=lambda p: (x.nu[p[0]], trees.nu[p[1]]),
        combine_fn=lambda p, r: (
            x.combine[p[0]][r[0]],
            trees.combine[p[1]][r[1]],
        ),
        mu_fn=lambda ri, pos, args: (
            x.mu_get(ri, pos, [a[0] for a in args]),
            trees.mu_get(ri, pos, [a[1] for a in args]),
        ),
        terminal_fn=lambda p: p[1] in tree_terminal
        and ForestClass(x.nu[p[0]], p[0] in x.terminals) in q,
        name_fn=lambda p: f"({x.states[p[0]]}|{trees.states[p[1]]})",
        empty_in_family=False,
    )


def forest_dual_family(alg: ForestAlgebra) -> list[TreeDual]:
    """All duals of a regular forest family: one tree dual per admissible
    set of tree classes, deduplicated up to hom-equivalence.

    The output size is bounded by 2^(number of tree classes)."""
    if alg.empty_in_family:
        raise EmptyStructureInFamily("the family contains the empty structure")
    x = _minimized(alg)
    tcs = sorted(tree_classes(alg), key=lambda c: (c.stray_state, c.in_family))
    duals: list[TreeDual] = []
    for size in range(len(tcs) + 1):
        for combo in combinations(range(len(tcs)), size):
            q = frozenset(tcs[i] for i in combo)
            if admissibility_witness(alg, q) is not None:
                continue
            d = tree_dual(minimize(_tree_class_family(x, q)))
            duals.append(
                TreeDual(d.structure, d.vertex_sets, d.algebra, AdmissibleFamily(q))
            )
    kept: list[TreeDual] = []
    for d in sorted(duals, key=lambda d: d.structure.vertex_count):
        if not any(is_hom_equivalent(d.structure, k.structure) for k in kept):
            kept.append(d)
    return kept


def up_closure(alg: ForestAlgebra) -> ForestAlgebra:
    """Algebra for the forests receiving a homomorphism from some member:
    the obstruction family of the dual family."""
    duals = forest_dual_family(alg)
    return build_obstruction_family(
        [d.structure for d in duals], signature=alg.signature
    )


# ---------------------------------------------------------------------------
# exact duality verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    bound: int
    structures_checked: int
    failures: tuple[dict, ...]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json_dict(self) -> dict:
        return {
            "bound": self.bound,
            "structures_checked": self.structures_checked,
            "failures": [dict(f) for f in self.failures],
        }


def verify_duality(
    alg: ForestAlgebra, duals: Sequence[DualLike], max_vertices: int
) -> VerificationReport:
    """Check the duality contract on every canonical structure B with at
    most max_vertices vertices: B maps to some dual iff no member of the
    family maps to B.

    The right side is decided exactly through intersection emptiness with
    the homomorphism family of B, never by bounded member enumeration;
    failures carry replayable witnesses."""
    ds = _dual_structures(duals)
    failures = []
    checked = 0
    for b in enumerate_structures(alg.signature, max_vertices):
        checked += 1
        left = any(hom_exists(b, d) for d in ds)
        right = intersection_is_empty(alg, build_hom_family(b))
        if left != right:
            failures.append(_duality_failure(alg, ds, b, left))
    return VerificationReport(max_vertices, checked, tuple(failures))


def verify_duality_explicit(
    members: Sequence[Structure], duals: Sequence[DualLike], max_vertices: int
) -> VerificationReport:
    """Duality check against an explicit finite member list (no algebra):
    the right side is decided by direct homomorphism search."""
    ds = _dual_structures(duals)
    failures = []
    checked = 0
    for b in enumerate_structures(members[0].signature if members else ds[0].signature, max_vertices):
        checked += 1
        left = any(hom_exists(b, d) for d in ds)
        hitting = next((m for m in members if hom_exists(m, b)), None)
        if left != (hitting is None):
            entry = {"structure": b.to_json_dict()}
            if hitting is not None:
                entry["direction"] = "obstruction_member_maps_to_dual_receiver"
                entry["witness"] = {
                    "family_member": hitting.to_json_dict(),
                    "member_hom_to_structure": list(find_hom(hitting, b).mapping),
                }
            else:
                entry["direction"] = "no_dual_receives_unobstructed_structure"
                entry["witness"] = {"duals_checked": len(ds)}
            failures.append(entry)
    return VerificationReport(max_vertices, checked, tuple(failures))


def _duality_failure(
    alg: ForestAlgebra, ds: Sequence[Structure], b: Structure, left: bool
) -> dict:
    entry = {"structure": b.to_json_dict()}
    if left:
        w = find_witness(family_intersection(alg, build_hom_family(b)))
        d = next(d for d in ds if hom_exists(b, d))
        entry["direction"] = "obstruction_member_maps_to_dual_receiver"
        entry["witness"] = {
            "family_member": w.to_json_dict(),
            "member_hom_to_structure": list(find_hom(w, b).mapping),
            "dual": d.to_json_dict(),
            "structure_hom_to_dual": list(find_hom(b, d).mapping),
        }
    else:
        entry["direction"] = "no_dual_receives_unobstructed_structure"
        entry["witness"] = {"duals_checked": len(ds)}
    return entry
