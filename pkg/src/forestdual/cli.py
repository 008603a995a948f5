"""Command-line front end.

Structures, algebras and reports are one JSON object per file; oriented-path
literals (p(++-), bare +- words) are accepted wherever a digraph structure is
expected.  Exit codes: 0 all checks pass, 1 violations found (report still
written), 2 input error (machine-readable diagnostic on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import antichain as ac
from . import duality as du
from .algebra import (
    ForestAlgebra,
    build_finite_family,
    build_hom_family,
    build_obstruction_family,
    build_trees_family,
    check_coherence,
    enumerate_members,
    family_complement,
    family_intersection,
    family_union,
    find_witness,
    is_empty,
    minimize,
    validate_algebra,
)
from .canon import canonical_form, is_isomorphic
from .fixtures import DIGRAPH, _PATH_RE, parse_path_literal, path_fixture
from .hom import core, find_hom, is_core, is_forest
from .structures import (
    Signature,
    Structure,
    components,
    direct_product,
    disjoint_union,
    stable_json,
)
from .structures import is_tree as _is_tree


class InputError(ValueError):
    pass


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path}: {exc}") from exc


def load_structure(spec: str) -> Structure:
    if _PATH_RE.match(spec.strip()) and not Path(spec).exists():
        return parse_path_literal(spec)
    data = _load_json(spec)
    try:
        return Structure.from_json_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid structure in {spec}: {exc}") from exc


def load_algebra(path: str, seed: int) -> ForestAlgebra:
    data = _load_json(path)
    try:
        alg = ForestAlgebra.from_json_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid algebra in {path}: {exc}") from exc
    try:
        validate_algebra(alg, trials=64, max_vertices=4, seed=seed)
    except ValueError as exc:
        raise InputError(f"algebra in {path} rejected: {exc}") from exc
    return alg


def load_signature(path: Optional[str]) -> Signature:
    if path is None:
        return DIGRAPH
    data = _load_json(path)
    try:
        return Signature.from_json_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid signature in {path}: {exc}") from exc


def load_duals(spec: str) -> list[Structure]:
    """A dual argument: a structure file/literal, a serialized tree dual
    (object with a "structure" field), or a dual-family file (object with a
    "duals" list)."""
    if _PATH_RE.match(spec.strip()) and not Path(spec).exists():
        return [parse_path_literal(spec)]
    data = _load_json(spec)
    entries = data["duals"] if isinstance(data, dict) and "duals" in data else [data]
    out = []
    for entry in entries:
        if isinstance(entry, dict) and "structure" in entry:
            entry = entry["structure"]
        try:
            out.append(Structure.from_json_dict(entry))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"invalid dual in {spec}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------


def _emit(payload: dict, args) -> None:
    if args.format == "text":
        text = _render_text(payload)
    else:
        text = stable_json(payload)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _render_text(payload: dict, indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    for key, value in payload.items():
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_render_text(value, indent + 1))
        elif isinstance(value, list):
            lines.append(f"{pad}{key}: [{len(value)} item(s)]")
        else:
            lines.append(f"{pad}{key}: {value}")
    return "\n".join(line for line in lines if line) + ("\n" if indent == 0 else "")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forestdual",
        description="regular forest families, finite homomorphism duals, exact verification",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "text"], default="json")
    common.add_argument("--out", help="write the result to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    top = parser.add_subparsers(dest="group", required=True)

    def sub(group, name):
        return group.add_parser(name, parents=[common])

    st = top.add_parser("struct", help="structure-level operations").add_subparsers(
        dest="cmd", required=True
    )
    p = sub(st, "hom")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--constraints", help="JSON object mapping source to target vertices")
    for name in ("core", "iscore", "components", "isforest"):
        p = sub(st, name)
        p.add_argument("structure")
    for name in ("product", "union"):
        p = sub(st, name)
        p.add_argument("left")
        p.add_argument("right")

    al = top.add_parser("algebra", help="family algebra constructions").add_subparsers(
        dest="cmd", required=True
    )
    p = sub(al, "homfam")
    p.add_argument("target")
    p = sub(al, "obstruction")
    p.add_argument("targets", nargs="*")
    p.add_argument("--signature")
    p = sub(al, "trees")
    p.add_argument("--signature")
    p = sub(al, "finite")
    p.add_argument("members", nargs="*")
    p.add_argument("--signature")
    for name in ("union", "intersect"):
        p = sub(al, name)
        p.add_argument("left")
        p.add_argument("right")
    for name in ("complement", "minimize", "empty", "witness"):
        p = sub(al, name)
        p.add_argument("algebra")
    p = sub(al, "members")
    p.add_argument("algebra")
    p.add_argument("--max-vertices", type=int, default=4)
    p = sub(al, "coherence")
    p.add_argument("algebra")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-vertices", type=int, default=5)

    dl = top.add_parser("dual", help="dual constructions").add_subparsers(
        dest="cmd", required=True
    )
    for name in ("tree", "family", "up"):
        p = sub(dl, name)
        p.add_argument("algebra")

    vf = top.add_parser("verify", help="exact bounded verification").add_subparsers(
        dest="cmd", required=True
    )
    for name in ("duality", "splitting"):
        p = sub(vf, name)
        p.add_argument("algebra")
        p.add_argument("--duals", nargs="+", required=True)
        p.add_argument("--max-vertices", type=int, default=4)
    p = sub(vf, "minimals")
    p.add_argument("--members", nargs="+", required=True)
    p.add_argument("--duals", nargs="+", required=True)
    p.add_argument("--max-vertices", type=int, default=4)
    p = sub(vf, "upex")
    p.add_argument("algebra")
    p.add_argument("--bound", type=int, default=6)
    p.add_argument("--margin", type=int, default=2)

    fx = top.add_parser("fixtures", help="shipped fixture generators").add_subparsers(
        dest="cmd", required=True
    )
    p = sub(fx, "paths")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    return parser


# ---------------------------------------------------------------------------


def _run_struct(args) -> tuple[dict, int]:
    if args.cmd == "hom":
        a = load_structure(args.source)
        b = load_structure(args.target)
        constraints = None
        if args.constraints:
            try:
                raw = json.loads(args.constraints)
                constraints = {int(k): int(v) for k, v in raw.items()}
            except (ValueError, AttributeError) as exc:
                raise InputError(f"bad constraints: {exc}") from exc
        h = find_hom(a, b, constraints)
        return {
            "exists": h is not None,
            "mapping": list(h.mapping) if h else None,
        }, 0
    if args.cmd == "core":
        return {"core": core(load_structure(args.structure)).to_json_dict()}, 0
    if args.cmd == "iscore":
        return {"is_core": is_core(load_structure(args.structure))}, 0
    if args.cmd == "components":
        s = load_structure(args.structure)
        return {
            "components": [
                {"structure": c.structure.to_json_dict(), "vertices": list(c.back_map)}
                for c in components(s)
            ]
        }, 0
    if args.cmd == "isforest":
        s = load_structure(args.structure)
        return {"is_forest": is_forest(s), "is_tree": _is_tree(s)}, 0
    a = load_structure(args.left)
    b = load_structure(args.right)
    op = direct_product if args.cmd == "product" else disjoint_union
    return op(a, b).to_json_dict(), 0


def _run_algebra(args) -> tuple[dict, int]:
    if args.cmd == "homfam":
        return build_hom_family(load_structure(args.target)).to_json_dict(), 0
    if args.cmd == "obstruction":
        ds = [load_structure(t) for t in args.targets]
        sig = load_signature(args.signature) if (args.signature or not ds) else None
        return build_obstruction_family(ds, signature=sig).to_json_dict(), 0
    if args.cmd == "trees":
        return build_trees_family(load_signature(args.signature)).to_json_dict(), 0
    if args.cmd == "finite":
        ms = [load_structure(m) for m in args.members]
        sig = load_signature(args.signature) if (args.signature or not ms) else None
        return build_finite_family(ms, signature=sig).to_json_dict(), 0
    if args.cmd in ("union", "intersect"):
        a1 = load_algebra(args.left, args.seed)
        a2 = load_algebra(args.right, args.seed)
        op = family_union if args.cmd == "union" else family_intersection
        return op(a1, a2).to_json_dict(), 0
    alg = load_algebra(args.algebra, args.seed)
    if args.cmd == "complement":
        return family_complement(alg).to_json_dict(), 0
    if args.cmd == "minimize":
        return minimize(alg).to_json_dict(), 0
    if args.cmd == "empty":
        return {"empty": is_empty(alg)}, 0
    if args.cmd == "witness":
        w = find_witness(alg)
        return {"witness": w.to_json_dict() if w else None}, 0
    if args.cmd == "members":
        return {
            "max_vertices": args.max_vertices,
            "members": [
                s.to_json_dict() for s in enumerate_members(alg, args.max_vertices)
            ],
        }, 0
    report = check_coherence(
        alg, trials=args.trials, max_vertices=args.max_vertices, seed=args.seed
    )
    payload = {"passed": report.passed, "trials": report.trials}
    if report.failure:
        payload["failure"] = report.failure
    return payload, 0 if report.passed else 1


def _run_dual(args) -> tuple[dict, int]:
    alg = load_algebra(args.algebra, args.seed)
    if args.cmd == "tree":
        return du.tree_dual(alg).to_json_dict(), 0
    if args.cmd == "family":
        return {"duals": [d.to_json_dict() for d in du.forest_dual_family(alg)]}, 0
    return du.up_closure(alg).to_json_dict(), 0


def _run_verify(args) -> tuple[dict, int]:
    if args.cmd == "upex":
        alg = load_algebra(args.algebra, args.seed)
        rep = ac.cores_of_minimals_bounded(alg, args.bound, args.margin)
        shape_ok = all(
            is_core(s) and is_forest(s) for s in rep.members
        )
        payload = rep.to_json_dict()
        payload["outputs_are_core_forests"] = shape_ok
        return payload, 0 if rep.agree and shape_ok else 1
    duals = [d for spec in args.duals for d in load_duals(spec)]
    if args.cmd == "minimals":
        members = [load_structure(m) for m in args.members]
        rep = ac.check_minimals_are_forests(members, duals, args.max_vertices)
        return rep.to_json_dict(), 0 if rep.passed else 1
    alg = load_algebra(args.algebra, args.seed)
    if args.cmd == "duality":
        rep = du.verify_duality(alg, duals, args.max_vertices)
    else:
        rep = ac.check_splitting(alg, duals, args.max_vertices)
    return rep.to_json_dict(), 0 if rep.passed else 1


def run(args) -> tuple[dict, int]:
    if args.group == "struct":
        return _run_struct(args)
    if args.group == "algebra":
        return _run_algebra(args)
    if args.group == "dual":
        return _run_dual(args)
    if args.group == "verify":
        return _run_verify(args)
    return path_fixture(args.i, args.j).to_json_dict(), 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, code = run(args)
    except InputError as exc:
        sys.stderr.write(stable_json({"error": str(exc), "kind": "input"}))
        return 2
    except (ValueError, KeyError, OSError) as exc:
        sys.stderr.write(
            stable_json({"error": str(exc), "kind": type(exc).__name__})
        )
        return 2
    _emit(payload, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
