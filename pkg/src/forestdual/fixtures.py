"""Digraph conveniences: path literals, the oriented-path fixture family,
transitive tournaments and the shipped finite-family fixtures."""

from __future__ import annotations

import re

from .algebra import FamilyHandle, build_finite_family
from .structures import Signature, Structure, disjoint_union

DIGRAPH = Signature((("E", 2),))

_PATH_RE = re.compile(r"^(?:p\(([+-]*)\)|([+-]*))$")


def parse_path_literal(text: str) -> Structure:
    """Oriented path from a word over {+,-}: the k-th symbol orients the
    k-th edge forward (+) or backward (-).  Accepts p(word) or a bare word;
    the empty word is the single vertex."""
    m = _PATH_RE.match(text.strip())
    if m is None:
        raise ValueError(f"not a path literal: {text!r}")
    word = m.group(1) if m.group(1) is not None else m.group(2)
    arcs = []
    for k, ch in enumerate(word):
        if ch == "+":
            arcs.append((k, k + 1))
        else:
            arcs.append((k + 1, k))
    return Structure.make(DIGRAPH, len(word) + 1, {"E": arcs})


def path_fixture_word(i: int, j: int) -> str:
    """The oriented-path fixture word with parameters i, j."""
    return "++" + "+-+" * i + "++" + "--" + "-+-" * j + "--"


def path_fixture(i: int, j: int) -> Structure:
    return parse_path_literal(path_fixture_word(i, j))


def path_fixture_core_word(i: int) -> str:
    """Core of the symmetric (i = j) path fixture."""
    return "++" + "+-+" * i + "++"


def directed_path(k: int) -> Structure:
    """The path of k forward arcs on k+1 vertices."""
    return parse_path_literal("+" * k)


def transitive_tournament(k: int) -> Structure:
    """Acyclic complete digraph on k vertices (arc i -> j for i < j)."""
    return Structure.make(
        DIGRAPH, k, {"E": [(i, j) for i in range(k) for j in range(i + 1, k)]}
    )


def single_loop() -> Structure:
    return Structure.make(DIGRAPH, 1, {"E": [(0, 0)]})


def finite_family_fixtures() -> list[FamilyHandle]:
    """Small shipped finite families used by the bounded minimal-cores
    checks (members within 6 vertices, non-retraction witnesses within 8)."""
    arc = directed_path(1)
    p2 = directed_path(2)
    fixtures = [
        ("finite({+})", [arc]),
        ("finite({++})", [p2]),
        ("finite({+, ++})", [arc, p2]),
        ("finite({+-})", [parse_path_literal("+-")]),
        ("finite({+ + +(disjoint)})", [disjoint_union(arc, arc)]),
    ]
    return [
        FamilyHandle(build_finite_family(members), name)
        for name, members in fixtures
    ]
