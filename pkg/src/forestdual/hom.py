"""Homomorphism search, retractions and cores.

For forest sources the search runs generalized arc consistency over the
incidence tree (per-vertex feasible-image sets).  Distinct blocks of a forest
share at most one vertex, so nonempty consistent sets are decisive and the
lexicographically least homomorphism can be extracted greedily without
backtracking.  Non-forest sources fall back to ordered backtracking.
"""

from __future__ import annotations

from typing import Iterator, Mapping, Optional

from .canon import canonical_form
from .structures import (
    Homomorphism,
    SignatureMismatch,
    Structure,
    components,
    is_forest,
    substructure_on,
)


def _initial_domains(
    a: Structure, b: Structure, constraints: Optional[Mapping[int, int]]
) -> Optional[list[list[int]]]:
    doms: list[list[int]] = [list(range(b.vertex_count)) for _ in range(a.vertex_count)]
    if constraints:
        for v, w in constraints.items():
            if not (0 <= v < a.vertex_count):
                raise ValueError(f"constraint on unknown source vertex {v}")
            if not (0 <= w < b.vertex_count):
                raise ValueError(f"constraint image {w} out of target range")
            doms[v] = [w]
    return doms


def _gac(a: Structure, b: Structure, doms: list[list[int]]) -> bool:
    """Prune domains to generalized arc consistency over every block of a.
    Returns False when some domain empties."""
    blocks = a.blocks()
    changed = True
    while changed:
        changed = False
        for ri, t in blocks:
            dsets = [set(doms[v]) for v in t]
            support: list[set[int]] = [set() for _ in t]
            for u in b.tuples[ri]:
                if all(u[j] in dsets[j] for j in range(len(t))):
                    for j in range(len(t)):
                        support[j].add(u[j])
            for j, v in enumerate(t):
                if len(support[j]) < len(doms[v]):
                    doms[v] = [w for w in doms[v] if w in support[j]]
                    changed = True
                    if not doms[v]:
                        return False
    return all(doms[v] for v in range(a.vertex_count))


def _iter_assignments(
    a: Structure, b: Structure, doms: list[list[int]]
) -> Iterator[tuple[int, ...]]:
    """All tuple-preserving maps, vertices assigned in id order, images
    ascending (hence lexicographic emission order)."""
    n = a.vertex_count
    if n == 0:
        yield ()
        return
    # blocks checked exactly when their last vertex gets assigned
    closing: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in range(n)]
    touching: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in range(n)]
    for ri, t in a.blocks():
        closing[max(t)].append((ri, t))
        for v in set(t):
            touching[v].append((ri, t))
    assign = [-1] * n

    def partial_ok(v: int) -> bool:
        for ri, t in touching[v]:
            if max(t) <= v:
                continue  # handled by closing check later
            fixed = {j: assign[t[j]] for j in range(len(t)) if t[j] <= v}
            if not any(
                all(u[j] == w for j, w in fixed.items()) for u in b.tuples[ri]
            ):
                return False
        return True

    def rec(v: int) -> Iterator[tuple[int, ...]]:
        if v == n:
            yield tuple(assign)
            return
        for w in doms[v]:
            assign[v] = w
            ok = all(
                tuple(assign[x] for x in t) in b.tuples[ri] for ri, t in closing[v]
            ) and partial_ok(v)
            if ok:
                yield from rec(v + 1)
        assign[v] = -1

    yield from rec(0)


def find_hom(
    a: Structure, b: Structure, constraints: Optional[Mapping[int, int]] = None
) -> Optional[Homomorphism]:
    """The lexicographically least homomorphism a -> b extending the given
    partial map, or None.  Deterministic: vertices explored in id order,
    images in id order."""
    if a.signature != b.signature:
        raise SignatureMismatch("homomorphism search across signatures")
    doms = _initial_domains(a, b, constraints)
    if not _gac(a, b, doms):
        return None
    if is_forest(a):
        for v in range(a.vertex_count):
            for w in doms[v]:
                trial = [list(d) for d in doms]
                trial[v] = [w]
                if _gac(a, b, trial):
                    doms = trial
                    break
            else:  # pragma: no cover - unreachable when GAC is decisive
                return None
        return Homomorphism(a, b, tuple(doms[v][0] for v in range(a.vertex_count)))
    for assign in _iter_assignments(a, b, doms):
        return Homomorphism(a, b, assign)
    return None


def hom_exists(a: Structure, b: Structure) -> bool:
    """Decide a -> b.  Faster than find_hom; makes no ordering promises."""
    if a.signature != b.signature:
        raise SignatureMismatch("homomorphism search across signatures")
    doms = _initial_domains(a, b, None)
    if not _gac(a, b, doms):
        return False
    if is_forest(a):
        return True
    for _ in _iter_assignments(a, b, doms):
        return True
    return False


def all_homs(a: Structure, b: Structure) -> Iterator[Homomorphism]:
    """Every homomorphism a -> b in lexicographic order."""
    if a.signature != b.signature:
        raise SignatureMismatch("homomorphism search across signatures")
    doms = _initial_domains(a, b, None)
    if not _gac(a, b, doms):
        return
    for assign in _iter_assignments(a, b, doms):
        yield Homomorphism(a, b, assign)


def _find_hom_with_domains(
    a: Structure, b: Structure, doms: list[list[int]]
) -> Optional[tuple[int, ...]]:
    doms = [list(d) for d in doms]
    if not _gac(a, b, doms):
        return None
    for assign in _iter_assignments(a, b, doms):
        return assign
    return None


def _search_injective(a: Structure, b: Structure) -> bool:
    """Injective homomorphism search (used as a large-structure isomorphism
    fallback where tuple counts already match)."""
    doms = _initial_domains(a, b, None)
    if not _gac(a, b, doms):
        return False
    for assign in _iter_assignments(a, b, doms):
        if len(set(assign)) == len(assign):
            return True
    return False


def is_hom_equivalent(a: Structure, b: Structure) -> bool:
    return hom_exists(a, b) and hom_exists(b, a)


# ---------------------------------------------------------------------------
# retractions
# ---------------------------------------------------------------------------


def is_retraction(h: Homomorphism) -> bool:
    """True iff h has a right inverse g with h(g(v)) = v for every target
    vertex.  g is found by constrained search: g(v) ranges over h's
    preimages of v."""
    preimages: list[list[int]] = [[] for _ in range(h.target.vertex_count)]
    for v, w in enumerate(h.mapping):
        preimages[w].append(v)
    if any(not p for p in preimages):
        return False
    return _find_hom_with_domains(h.target, h.source, preimages) is not None


def is_retraction_componentwise(h: Homomorphism) -> bool:
    """Retraction test through the component characterization: h is a
    retraction iff every component C of the target owns a substructure of
    the source that h maps isomorphically onto C."""
    return all(
        _maps_some_substructure_onto(h, comp, back)
        for comp, back in components(h.target)
    )


def _maps_some_substructure_onto(
    h: Homomorphism, comp: Structure, back: tuple[int, ...]
) -> bool:
    # choose one h-preimage for each component vertex, injectively, so that
    # the preimage of every component tuple is a source tuple
    preim = {c: [v for v, w in enumerate(h.mapping) if w == c] for c in back}
    if any(not preim[c] for c in back):
        return False
    chosen: dict[int, int] = {}

    comp_blocks = [
        (ri, tuple(back[v] for v in t)) for ri, t in comp.blocks()
    ]  # tuples in original target ids

    def ok_so_far() -> bool:
        for ri, t in comp_blocks:
            if all(c in chosen for c in t):
                if tuple(chosen[c] for c in t) not in h.source.tuples[ri]:
                    return False
        return True

    order = list(back)

    def rec(i: int) -> bool:
        if i == len(order):
            return True
        c = order[i]
        for u in preim[c]:
            if u in chosen.values():
                continue
            chosen[c] = u
            if ok_so_far() and rec(i + 1):
                return True
            del chosen[c]
        return False

    return rec(0)


def exists_non_retraction(a: Structure, b: Structure) -> Optional[Homomorphism]:
    """The first (lexicographic) homomorphism a -> b that is not a
    retraction, or None."""
    for h in all_homs(a, b):
        if not is_retraction(h):
            return h
    return None


# ---------------------------------------------------------------------------
# cores
# ---------------------------------------------------------------------------


def _shrinking_endo_image(s: Structure) -> Optional[list[int]]:
    """Vertex set of the image of some endomorphism missing a vertex, or
    None when s is a core."""
    n = s.vertex_count
    for v in range(n):
        keep = [u for u in range(n) if u != v]
        sub, back = substructure_on(s, keep)
        if hom_exists(s, sub):
            h = find_hom(s, sub)
            return sorted({back[w] for w in h.mapping})
    return None


def is_core(s: Structure) -> bool:
    """True iff every endomorphism of s is an automorphism, i.e. no
    endomorphism misses a vertex."""
    n = s.vertex_count
    for v in range(n):
        sub, _ = substructure_on(s, [u for u in range(n) if u != v])
        if hom_exists(s, sub):
            return False
    return True


def core(s: Structure) -> Structure:
    """The minimum-size structure hom-equivalent to s (unique up to
    isomorphism), computed by repeatedly retracting onto the image of a
    proper endomorphism.  The result is canonicalized."""
    cur = s
    while True:
        image = _shrinking_endo_image(cur)
        if image is None:
            return canonical_form(cur)
        cur, _ = substructure_on(cur, image)
