"""Command line interface: ``torfan <command> ...``.

Fan arguments are JSON fan files or ``catalog:NAME``. Reports are
deterministic JSON with ``--json``, otherwise indented ``key: value`` text.
Exit status is 0 when every check passes, 1 when a mathematical check
fails and 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Optional

from . import catalog as catalog_mod
from .birational import (
    RefinementError,
    build_refinement,
    check_puh,
    classify_subdivision,
    exceptional_sets,
    factorize,
    source_is_fano,
)
from .fan import Fan, FanError, f_vector, fvector_checks, validate
from .io import FanFormatError, fan_from_dict, fan_to_dict, parse_fan, serialize_fan
from .mori import (
    DecompositionError,
    classify_degree2_decomposition,
    decompose_into_contractibles,
    is_contractible,
    is_extremal,
    ample_heights,
)
from .primitive import (
    RelationClass,
    is_fano,
    picard_number,
    primitive_collections,
    primitive_relation,
    primitive_relations,
    relation_class,
    rho_diff,
)
from .structure import basic_construction, classify_divisor_case, detect_s3_bundle


class InputError(Exception):
    pass


class Report:
    """Payload plus pass/fail status."""

    def __init__(self, payload: dict, ok: bool = True, input_error: bool = False):
        self.payload = payload
        self.ok = ok
        self.input_error = input_error


def load_fan(arg: str) -> Fan:
    if arg.startswith("catalog:"):
        try:
            return catalog_mod.catalog(arg.split(":", 1)[1]).fan
        except catalog_mod.CatalogError as exc:
            raise InputError(str(exc)) from None
    try:
        return parse_fan(arg)
    except OSError as exc:
        raise InputError(f"cannot read {arg}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{arg}: malformed JSON: {exc}") from None


def _index_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated indices, got {text!r}") from None


def _ray(fan: Fan, i: int) -> int:
    if not 0 <= i < fan.n_rays:
        raise InputError(f"ray index {i} out of range 0..{fan.n_rays - 1}")
    return i


def _relation_json(fan: Fan, rel) -> dict:
    return {
        "collection": list(rel.collection),
        "focus": list(rel.focus),
        "coefficients": list(rel.coefficients),
        "degree": rel.degree,
        "relation": rel.describe(fan),
    }


def _emit_fans(directory: Optional[str], fans: list[Fan]) -> list[str]:
    if not directory:
        return []
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, fan in enumerate(fans, 1):
        path = out / f"step-{k:02d}.json"
        serialize_fan(fan, path)
        paths.append(str(path))
    return paths


# -- commands --------------------------------------------------------------


def cmd_validate(args) -> Report:
    fan = load_fan(args.fan)
    rep = validate(fan)
    return Report(
        {"smooth": rep.smooth, "complete": rep.complete, "fan_condition": rep.fan_condition, "defects": rep.defects},
        rep.ok,
    )


def cmd_primcoll(args) -> Report:
    fan = load_fan(args.fan)
    rels = primitive_relations(fan)
    return Report({"count": len(rels), "relations": [_relation_json(fan, r) for r in rels]})


def cmd_fano(args) -> Report:
    fan = load_fan(args.fan)
    bad = [_relation_json(fan, r) for r in primitive_relations(fan) if r.degree < 1]
    ok = is_fano(fan)
    return Report({"fano": ok, "nonpositive_relations": bad}, ok)


def cmd_picard(args) -> Report:
    fan = load_fan(args.fan)
    return Report({"picard": picard_number(fan), "rays": fan.n_rays, "dim": fan.dim})


def cmd_rhodiff(args) -> Report:
    fan = load_fan(args.fan)
    x = _ray(fan, args.ray)
    value = rho_diff(fan, x)
    return Report({"ray": list(fan.rays[x]), "rho_diff": value}, 0 <= value <= 3 or not is_fano(fan))


def cmd_fvector(args) -> Report:
    fan = load_fan(args.fan)
    rep = fvector_checks(fan)
    payload = {
        "f": list(f_vector(fan)),
        "fano": rep.fano,
        "ds5": rep.ds5,
        "batyrev": rep.batyrev,
        "spade": rep.spade,
        "manu_hypothesis": rep.manu_hypothesis,
        "manu_bound": rep.manu_bound,
        "notes": list(rep.notes),
    }
    return Report(payload, rep.all_pass)


def cmd_projective(args) -> Report:
    fan = load_fan(args.fan)
    heights = ample_heights(fan)
    return Report({"projective": heights is not None, "ample_heights": list(heights) if heights else None}, heights is not None)


def cmd_extremal(args) -> Report:
    fan = load_fan(args.fan)
    try:
        entries = json.loads(args.cls)
    except json.JSONDecodeError as exc:
        raise InputError(f"--class is not JSON: {exc}") from None
    if not isinstance(entries, list) or not all(isinstance(a, int) for a in entries):
        raise InputError("--class must be a JSON list of integers, one per ray")
    cls = RelationClass(tuple(entries))
    ok = is_extremal(fan, cls)
    return Report({"class": entries, "degree": cls.degree, "extremal": ok}, ok)


def cmd_decompose(args) -> Report:
    fan = load_fan(args.fan)
    coll = tuple(sorted(_index_list(args.collection)))
    if coll not in primitive_collections(fan):
        raise InputError(f"{list(coll)} is not a primitive collection")
    rel = primitive_relation(fan, coll)
    cls = relation_class(fan, rel)
    dec = decompose_into_contractibles(fan, cls)
    payload: dict[str, Any] = {
        "relation": _relation_json(fan, rel),
        "contractible": is_contractible(fan, coll),
        "decomposition": None
        if dec is None
        else [{"relation": _relation_json(fan, t.relation), "multiplicity": t.multiplicity} for t in dec.terms],
    }
    if rel.degree == 2 and len(coll) == 2:
        d2 = classify_degree2_decomposition(fan, coll)
        payload["degree2_kind"] = d2.kind
        payload["degree2_witnesses"] = [_relation_json(fan, r) for r in d2.witnesses]
    return Report(payload, dec is not None)


def cmd_classify(args) -> Report:
    fan = load_fan(args.fan)
    x = _ray(fan, args.ray)
    case = classify_divisor_case(fan, x)
    return Report({"ray": list(fan.rays[x]), "case": case.case, "rho_diff": case.rho_diff, "evidence": case.evidence})


def cmd_s3bundle(args) -> Report:
    fan = load_fan(args.fan)
    bundle = detect_s3_bundle(fan)
    if bundle is None:
        return Report({"s3_bundle": False}, False)
    return Report(
        {
            "s3_bundle": True,
            "hexagon": [list(fan.rays[i]) for i in bundle.hexagon],
            "fiber_plane": [list(v) for v in bundle.fiber_plane],
            "base": fan_to_dict(bundle.base),
        }
    )


def cmd_basic_construction(args) -> Report:
    fan = load_fan(args.fan)
    x = _ray(fan, args.ray)
    result = basic_construction(fan, x)
    files = _emit_fans(args.emit_steps, [s.fan_after for s in result.steps])
    return Report(
        {
            "ray": list(fan.rays[x]),
            "flips": result.flips,
            "blow_downs": result.blow_downs,
            "steps": [
                {"kind": s.kind, "relation": s.relation, "contracted_ray": list(s.contracted_ray) if s.contracted_ray else None}
                for s in result.steps
            ],
            "bundle_fan": fan_to_dict(result.bundle_fan),
            "base": fan_to_dict(result.base),
            "files": files,
        }
    )


def _refinement(args):
    return build_refinement(load_fan(args.source), load_fan(args.target))


def cmd_refine(args) -> Report:
    fmap = _refinement(args)
    src, tgt = fmap.source, fmap.target
    rays = [{"ray": list(src.rays[i]), "target_cone": list(c)} for i, c in enumerate(fmap.ray_to_cone)]
    drops = check_puh(fmap) if source_is_fano(fmap) else []
    sets = []
    if source_is_fano(fmap):
        for z in fmap.new_rays:
            es = exceptional_sets(fmap, fmap.ray_to_cone[z])
            sets.append({"eta": list(es.eta), "G": len(es.g_set), "H": len(es.h_set), "checks": es.checks})
    return Report(
        {
            "new_rays": [list(src.rays[i]) for i in fmap.new_rays],
            "rays": rays,
            "cone_map": [list(tgt.max_cones[k]) for k in fmap.cone_to_cone],
            "picard_drops": [{"ray": list(d.ray), "image_cone": list(d.image_cone), "drop": d.drop, "point": d.point_image} for d in drops],
            "exceptional_sets": sets,
        }
    )


def cmd_classify_subdiv(args) -> Report:
    fmap = _refinement(args)
    out = []
    for sigma in fmap.target.max_cones:
        rep = classify_subdivision(fmap, sigma)
        out.append(
            {
                "sigma": [list(fmap.target.rays[i]) for i in sigma],
                "type": rep.type_code,
                "centers": [[list(fmap.source.rays[i]) for i in c] for c in rep.centers],
                "center_labels": list(rep.center_labels),
                "relations": list(rep.relations),
                "generalized": rep.generalized,
            }
        )
    return Report({"cones": out})


def cmd_factorize(args) -> Report:
    fmap = _refinement(args)
    steps = factorize(fmap)
    files = _emit_fans(args.emit_steps, [s.fan for s in steps])
    ok = len(steps) == len(fmap.new_rays)
    return Report(
        {
            "blow_ups": len(steps),
            "new_rays": len(fmap.new_rays),
            "steps": [{"center": [list(v) for v in s.center], "new_ray": list(s.new_ray)} for s in steps],
            "files": files,
        },
        ok,
    )


def cmd_catalog(args) -> Report:
    if args.regenerate:
        paths = catalog_mod.regenerate()
        return Report({"written": [str(p) for p in paths]})
    if args.name is None:
        return Report({"names": catalog_mod.catalog_names()})
    try:
        entry = catalog_mod.catalog(args.name)
    except catalog_mod.CatalogError as exc:
        raise InputError(str(exc)) from None
    payload = {"name": entry.name, "expected": entry.expected, "fan": fan_to_dict(entry.fan)}
    if entry.target is not None:
        payload["target"] = fan_to_dict(entry.target)
    if args.write:
        serialize_fan(entry.fan, args.write)
        payload["file"] = args.write
    return Report(payload)


def cmd_enumerate(args) -> Report:
    try:
        entries = catalog_mod.enumerate_smooth_fano(args.dim, args.bound)
    except catalog_mod.CatalogError as exc:
        raise InputError(str(exc)) from None
    return Report(
        {
            "dim": args.dim,
            "count": len(entries),
            "classes": [{"picard": e.expected["picard"], "rays": [list(r) for r in e.fan.rays]} for e in entries],
        }
    )


def cmd_isomorphic(args) -> Report:
    a, b = load_fan(args.first), load_fan(args.second)
    m = catalog_mod.lattice_isomorphic(a, b)
    return Report({"isomorphic": m is not None, "matrix": m}, m is not None)


def _bulk_files(paths: list[str]) -> list[Path]:
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files += sorted(p.glob("*.json"))
        elif p.exists():
            files.append(p)
        else:
            raise InputError(f"no such file or directory: {p}")
    return files


def _bulk_entry(path: Path) -> dict:
    """Check one fan file; a ``{"fan", "expected"}`` document is compared
    against its record (``dim``, ``picard``, ``fano``, and ``flips`` from the
    ray given as ``ray``)."""
    doc = json.loads(path.read_text())
    expected = {}
    if isinstance(doc, dict) and "fan" in doc:
        expected = doc.get("expected", {})
        doc = doc["fan"]
    fan = fan_from_dict(doc)
    rep = validate(fan)
    entry: dict = {"file": str(path), "valid": rep.ok, "mismatches": []}
    if not rep.ok:
        entry["defects"] = list(rep.defects)
        return entry
    got = {"dim": fan.dim, "picard": picard_number(fan), "fano": is_fano(fan)}
    if "flips" in expected:
        vec = tuple(expected.get("ray", ()))
        if vec not in fan.ray_index:
            entry["mismatches"].append(f"ray {list(vec)} is not a generator")
        else:
            got["flips"] = basic_construction(fan, fan.ray_index[vec]).flips
    entry.update(got)
    for key, value in expected.items():
        if key in got and got[key] != value:
            entry["mismatches"].append(f"{key}: expected {value}, got {got[key]}")
    return entry


def cmd_bulk_check(args) -> Report:
    entries, bad_input = [], False
    for path in _bulk_files(args.paths):
        try:
            entries.append(_bulk_entry(path))
        except (json.JSONDecodeError, FanFormatError) as exc:
            bad_input = True
            entries.append({"file": str(path), "error": str(exc)})
        except FanError as exc:
            entries.append({"file": str(path), "valid": True, "mismatches": [f"check failed: {exc}"]})
    ok = all(e.get("valid") and not e.get("mismatches") for e in entries)
    return Report({"checked": len(entries), "failed": sum(1 for e in entries if not (e.get("valid") and not e.get("mismatches"))), "entries": entries}, ok, bad_input)


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torfan", description="Smooth complete toric varieties as lattice fans.")
    parser.add_argument("--json", action="store_true", help="print the report as JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help_text: str, fan: bool = True, ray: bool = False) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        if fan:
            p.add_argument("fan", help="fan file or catalog:NAME")
        if ray:
            p.add_argument("--ray", type=int, required=True, help="0-based ray index")
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "smoothness, completeness and fan condition")
    add("primcoll", cmd_primcoll, "primitive collections and relations")
    add("fano", cmd_fano, "Fano test via relation degrees")
    add("picard", cmd_picard, "Picard number")
    add("rhodiff", cmd_rhodiff, "Picard drop to the divisor of a ray", ray=True)
    add("fvector", cmd_fvector, "f-vector and its inequalities")
    add("projective", cmd_projective, "projectivity with integer ample heights")
    add("extremal", cmd_extremal, "extremality of a curve class").add_argument(
        "--class", dest="cls", required=True, help="JSON list of integers, one per ray"
    )
    add("decompose", cmd_decompose, "decompose a primitive class into contractible ones").add_argument(
        "--collection", required=True, help="comma-separated ray indices"
    )
    add("classify", cmd_classify, "case of the divisor of a ray", ray=True)
    add("s3bundle", cmd_s3bundle, "detect an S3-bundle structure")
    add("basic-construction", cmd_basic_construction, "flips and blow-downs to a P1-bundle", ray=True).add_argument(
        "--emit-steps", metavar="DIR", help="write each intermediate fan as DIR/step-NN.json"
    )
    for name, func, text in (
        ("refine", cmd_refine, "refinement map from source to target"),
        ("classify-subdiv", cmd_classify_subdiv, "subdivision type of every target cone"),
        ("factorize", cmd_factorize, "factor into star subdivisions"),
    ):
        p = add(name, func, text, fan=False)
        p.add_argument("source", help="source fan (the blown-up variety)")
        p.add_argument("target", help="target fan")
        if name == "factorize":
            p.add_argument("--emit-steps", metavar="DIR", help="write each intermediate fan as DIR/step-NN.json")
    p = add("catalog", cmd_catalog, "list or show built-in fans", fan=False)
    p.add_argument("name", nargs="?")
    p.add_argument("--write", metavar="FILE", help="also write the fan file")
    p.add_argument("--regenerate", action="store_true", help="rebuild the pinned fixture files")
    p = add("enumerate", cmd_enumerate, "smooth Fano fans up to isomorphism", fan=False)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--bound", type=int, default=None, help="coordinate box bound")
    p = add("bulk-check", cmd_bulk_check, "check many fan files against their expected records", fan=False)
    p.add_argument("paths", nargs="+", help="fan files or directories of *.json")
    p = add("isomorphic", cmd_isomorphic, "lattice isomorphism test", fan=False)
    p.add_argument("first")
    p.add_argument("second")
    return parser


def _text(value: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(value, dict):
        lines = []
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines += _text(v, indent + 1)
            else:
                lines.append(f"{pad}{k}: {json.dumps(v)}")
        return lines
    if isinstance(value, list):
        if all(not isinstance(v, (dict, list)) or not any(isinstance(w, (dict, list)) for w in v) for v in value):
            return [f"{pad}{json.dumps(v)}" for v in value]
        lines = []
        for v in value:
            sub = _text(v, indent + 1)
            lines.append(f"{pad}- " + sub[0].lstrip())
            lines += sub[1:]
        return lines
    return [f"{pad}{json.dumps(value)}"]


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        report = args.func(args)
    except (InputError, FanFormatError) as exc:
        print(f"torfan: input error: {exc}", file=sys.stderr)
        return 2
    except (RefinementError, DecompositionError) as exc:
        print(f"torfan: check failed: {exc}", file=sys.stderr)
        return 1
    except FanError as exc:
        print(f"torfan: input error: {exc}", file=sys.stderr)
        return 2
    if args.json:
        print(json.dumps(report.payload, sort_keys=True, indent=2))
    else:
        print("\n".join(_text(report.payload)))
    if report.input_error:
        return 2
    return 0 if report.ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
