"""Order-theoretic layer over the homomorphism preorder: minimal elements,
antichain and splitting checks, and the bounded characterization of cores of
minimal members.

All claims about infinite families are certified on bounded windows only;
every report records its bounds."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .algebra import ForestAlgebra, enumerate_members
from .canon import enumerate_structures, is_isomorphic
from .duality import (
    DualLike,
    VerificationReport,
    _dual_structures,
    up_closure,
    verify_duality,
    verify_duality_explicit,
)
from .hom import (
    Homomorphism,
    core,
    exists_non_retraction,
    hom_exists,
    is_hom_equivalent,
)
from .structures import SignatureMismatch, Structure, is_forest


@dataclass(frozen=True)
class OrderReport:
    """Pairwise hom-existence matrix over a finite list, with the minimal
    member indices and the antichain flag."""

    matrix: tuple[tuple[bool, ...], ...]
    minimal_indices: tuple[int, ...]
    antichain: bool


def order_report(xs: Sequence[Structure]) -> OrderReport:
    _check_signatures(xs)
    n = len(xs)
    matrix = tuple(
        tuple(hom_exists(xs[i], xs[j]) for j in range(n)) for i in range(n)
    )
    minimal = tuple(
        i
        for i in range(n)
        if all(matrix[i][j] for j in range(n) if matrix[j][i])
    )
    anti = all(
        not matrix[i][j] and not matrix[j][i]
        for i in range(n)
        for j in range(i + 1, n)
        if not is_isomorphic(xs[i], xs[j])
    )
    return OrderReport(matrix, minimal, anti)


def _check_signatures(xs: Sequence[Structure]) -> None:
    for x in xs[1:]:
        if x.signature != xs[0].signature:
            raise SignatureMismatch("list mixes signatures")


def minimal_members(xs: Sequence[Structure]) -> list[Structure]:
    """Members m with: every x in the list mapping to m receives m back.
    Hom-equivalent minimals are deduplicated, keeping the first."""
    if not xs:
        return []
    report = order_report(xs)
    out: list[Structure] = []
    for i in report.minimal_indices:
        if not any(is_hom_equivalent(xs[i], kept) for kept in out):
            out.append(xs[i])
    return out


def is_antichain(xs: Sequence[Structure]) -> bool:
    """True iff no homomorphism exists in either direction between any two
    non-isomorphic members."""
    if not xs:
        return True
    return order_report(xs).antichain


def ex_member_bounded(
    alg: ForestAlgebra, a: Structure, bound: int
) -> Optional[tuple[Structure, Homomorphism]]:
    """A member T of the family with at most `bound` vertices and a
    non-retraction T -> a, if any.

    A positive answer certifies a is properly above some member; a negative
    answer is sound only up to the bound (semi-decision)."""
    for t in enumerate_members(alg, bound):
        h = exists_non_retraction(t, a)
        if h is not None:
            return t, h
    return None


@dataclass(frozen=True)
class MinimalCoresReport:
    """Two independently computed bounded approximations of the cores of
    the minimal members.

    Route A enumerates members up to the bound and cores their minimal
    elements; route B keeps the forests that receive some member but no
    non-retraction from any member within bound+margin.  Agreement is a
    bounded certificate only: members or witnesses beyond the window are
    invisible to it."""

    bound: int
    margin: int
    route_a: tuple[Structure, ...]
    route_b: tuple[Structure, ...]

    @property
    def agree(self) -> bool:
        return {s.ser_key() for s in self.route_a} == {
            s.ser_key() for s in self.route_b
        }

    @property
    def members(self) -> tuple[Structure, ...]:
        return self.route_a

    def to_json_dict(self) -> dict:
        return {
            "bound": self.bound,
            "margin": self.margin,
            "route_a": [s.to_json_dict() for s in self.route_a],
            "route_b": [s.to_json_dict() for s in self.route_b],
            "agree": self.agree,
        }


def cores_of_minimals_bounded(
    alg: ForestAlgebra, bound: int, margin: int = 2
) -> MinimalCoresReport:
    ms = list(enumerate_members(alg, bound))
    route_a: list[Structure] = []
    for m in minimal_members(ms):
        c = core(m)
        if not any(c.ser_key() == other.ser_key() for other in route_a):
            route_a.append(c)
    upalg = up_closure(alg)
    route_b = []
    for a in enumerate_structures(alg.signature, bound, forest_only=True):
        if not from_member_above(alg, upalg, a, bound + margin):
            continue
        route_b.append(a)
    key = lambda s: (s.vertex_count, s.ser_key())
    return MinimalCoresReport(
        bound, margin, tuple(sorted(route_a, key=key)), tuple(sorted(route_b, key=key))
    )


def from_member_above(
    alg: ForestAlgebra, upalg: ForestAlgebra, a: Structure, ex_bound: int
) -> bool:
    """a receives some member (decided exactly through the dual family) but
    admits no non-retraction from members within the ex bound."""
    from .algebra import member

    if not member(upalg, a):
        return False
    return ex_member_bounded(alg, a, ex_bound) is None


def check_splitting(
    alg: ForestAlgebra, duals: Sequence[DualLike], max_vertices: int
) -> VerificationReport:
    """Splitting check: every structure within the bound is above some
    member or below some dual, never both; additionally the members and
    duals must form an antichain at the tested scale."""
    base = verify_duality(alg, duals, max_vertices)
    failures = [dict(f, kind="duality") for f in base.failures]
    ds = _dual_structures(duals)
    members = list(enumerate_members(alg, max_vertices))
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            if is_isomorphic(members[i], members[j]):
                continue
            for x, y in ((i, j), (j, i)):
                if hom_exists(members[x], members[y]):
                    failures.append(
                        {
                            "kind": "members_comparable",
                            "from": members[x].to_json_dict(),
                            "to": members[y].to_json_dict(),
                        }
                    )
    for m in members:
        for d in ds:
            if hom_exists(m, d):
                failures.append(
                    {
                        "kind": "member_dual_comparable",
                        "from": m.to_json_dict(),
                        "to": d.to_json_dict(),
                    }
                )
            if hom_exists(d, m):
                failures.append(
                    {
                        "kind": "member_dual_comparable",
                        "from": d.to_json_dict(),
                        "to": m.to_json_dict(),
                    }
                )
    return VerificationReport(max_vertices, base.structures_checked, tuple(failures))


@dataclass(frozen=True)
class MinimalsForestReport:
    duality: VerificationReport
    minimal_members: tuple[Structure, ...]
    non_forest_minimals: tuple[Structure, ...]

    @property
    def passed(self) -> bool:
        return self.duality.passed and not self.non_forest_minimals

    def to_json_dict(self) -> dict:
        return {
            "duality": self.duality.to_json_dict(),
            "minimal_members": [s.to_json_dict() for s in self.minimal_members],
            "non_forest_minimals": [
                s.to_json_dict() for s in self.non_forest_minimals
            ],
            "passed": self.passed,
        }


def check_minimals_are_forests(
    o_members: Sequence[Structure], duals: Sequence[DualLike], max_vertices: int
) -> MinimalsForestReport:
    """Verify the duality of an explicit member list first, then assert that
    its minimal members are forests.  Non-forest minimals under a passing
    duality indicate the pair is not actually a duality with a finite dual
    side."""
    duality = verify_duality_explicit(o_members, duals, max_vertices)
    mins = tuple(minimal_members(o_members))
    bad = tuple(m for m in mins if not is_forest(m))
    return MinimalsForestReport(duality, mins, bad)
