"""Built-in fans, lattice isomorphism and the enumeration of smooth Fano fans
in low dimension.

Catalog fans are pinned as JSON files under ``torfan/data`` (override the
directory with ``TORFAN_CATALOG_DIR``). Each file stores the fan, the record
it must recompute to and, for refinement fixtures, the target fan.
``regenerate`` rebuilds the files from the constructions in this module.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import lattice
from .birational import expected_new_rays, type_centers
from .constructions import (
    del_pezzo_surface,
    del_pezzo_v,
    face_fan,
    hirzebruch,
    product,
    projective_bundle_o_o_o1,
    projective_space,
    pseudo_del_pezzo_v,
    s3_bundle_f,
    subdivide_by_vectors,
)
from .fan import Fan, FanError, star_subdivide, validate
from .io import fan_from_dict, fan_to_dict
from .primitive import is_fano, picard_number

DATA_DIR = Path(__file__).parent / "data"


class CatalogError(FanError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    fan: Fan
    expected: dict
    target: Optional[Fan] = field(default=None, compare=False)

    def recompute(self) -> dict:
        return {"dim": self.fan.dim, "picard": picard_number(self.fan), "fano": is_fano(self.fan)}

    def check(self) -> list[str]:
        """Mismatches between the stored record and recomputation."""
        rep = validate(self.fan)
        out = [] if rep.ok else [f"fan fails validation: {rep.defects[:3]}"]
        if not out:
            got = self.recompute()
            out += [f"{k}: stored {self.expected[k]}, recomputed {v}" for k, v in got.items() if self.expected.get(k) != v]
        return out


# -- constructions of the pinned entries -----------------------------------


def _subdivision_fixture(code: int) -> Fan:
    """Replay the centers of a subdivision type on the first cone of ``P^4``."""
    p4 = projective_space(4)
    vec = expected_new_rays(code, p4.rays[:4])
    fan = p4
    for labels, _ in type_centers(code):
        fan = star_subdivide(fan, [fan.ray_index[vec[g]] for g in labels])
    return fan


def _multi_cone_fixture(kind: str) -> Fan:
    p4 = projective_space(4)
    r = p4.rays
    if kind == "10+2":
        return subdivide_by_vectors(_subdivision_fixture(10), [(r[0], r[4])])
    if kind == "5+2":
        return subdivide_by_vectors(p4, [(r[0], r[1]), (r[2], r[3])])
    raise CatalogError(f"unknown multi-cone fixture {kind}")


def twisted_prism() -> Fan:
    """Smooth complete 3-fold fan that is not projective.

    Top triangle ``e1, e2, e3``, apex ``a = -(e1 + e2 + e3)``, bottom rays
    ``e_i + a``; the three side quadrilaterals are split by diagonals all
    turning the same way, which rules out a strictly convex support function.
    """
    top = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    apex = (-1, -1, -1)
    bottom = [lattice.add(t, apex) for t in top]
    cones = [(0, 1, 2), (3, 4, 6), (4, 5, 6), (3, 5, 6)]
    for i in range(3):
        j = (i + 1) % 3
        cones += [tuple(sorted((i, j, 3 + i))), tuple(sorted((j, 3 + i, 3 + j)))]
    return Fan(3, tuple(top + bottom + [apex]), tuple(cones))


def _blowup_case_2b() -> Fan:
    # P1 x P2 blown up along the invariant curve over a fixed point of P2
    base = product(projective_space(1), projective_space(2))
    return subdivide_by_vectors(base, [((1, 0, 0), (0, 1, 0))])


_P4_TARGET = "P4"

# name -> (builder, notes, target name or None, facts that must hold)
_BUILDERS: dict[str, tuple[Callable[[], Fan], str, Optional[str], dict]] = {
    **{f"P{n}": (functools.partial(projective_space, n), "projective space", None, {"picard": 1, "fano": True}) for n in range(1, 6)},
    "P1xP1": (lambda: product(projective_space(1), projective_space(1)), "quadric surface", None, {"picard": 2, "fano": True}),
    **{f"S{k}": (functools.partial(del_pezzo_surface, k), "P2 blown up at " + ("one torus-fixed point" if k == 1 else f"{k} torus-fixed points"), None, {"picard": k + 1, "fano": True}) for k in (1, 2, 3)},
    "F2": (functools.partial(hirzebruch, 2), "Hirzebruch surface with a (-2)-curve", None, {"picard": 2, "fano": False}),
    "bundle": (projective_bundle_o_o_o1, "P(O + O + O(1)) over P1", None, {"picard": 2, "fano": True}),
    "F": (s3_bundle_f, "bundle blown up along its three invariant sections; S3-bundle over P1", None, {"picard": 5, "fano": True}),
    "S3xS3xP1": (
        lambda: product(product(del_pezzo_surface(3), del_pezzo_surface(3)), projective_space(1)),
        "five-dimensional, Picard number 9",
        None,
        {"picard": 9, "fano": True},
    ),
    "S3xF": (lambda: product(del_pezzo_surface(3), s3_bundle_f()), "five-dimensional, Picard number 9", None, {"picard": 9, "fano": True}),
    "V4": (functools.partial(del_pezzo_v, 4), "del Pezzo 4-fold; six flips in the basic construction", None, {"picard": 6, "fano": True}),
    "Vtilde4": (functools.partial(pseudo_del_pezzo_v, 4), "pseudo del Pezzo 4-fold; three flips", None, {"picard": 5, "fano": True}),
    "blowup-2b": (_blowup_case_2b, "P1 x P2 blown up along a fiber over a fixed point", None, {"picard": 3, "fano": True}),
    "nonprojective": (twisted_prism, "smooth complete, not projective", None, {"picard": 4}),
    **{
        f"subdiv-{c}": (functools.partial(_subdivision_fixture, c), f"P4 with one cone subdivided as type {c}", _P4_TARGET, {})
        for c in range(1, 18)
    },
    "multi-10+2": (functools.partial(_multi_cone_fixture, "10+2"), "types 10, 7, 2, 2, 3 over the cones of P4", _P4_TARGET, {}),
    "multi-5+2": (functools.partial(_multi_cone_fixture, "5+2"), "types 5, 2, 2, 2, 2 over the cones of P4", _P4_TARGET, {}),
}

PINNED_NAMES = tuple(_BUILDERS)


def build(name: str) -> CatalogEntry:
    """Construct an entry from scratch, ignoring the pinned files."""
    if name not in _BUILDERS:
        raise CatalogError(f"unknown catalog entry: {name}")
    builder, notes, target, facts = _BUILDERS[name]
    fan = builder()
    entry = CatalogEntry(name, fan, {}, projective_space(4) if target == _P4_TARGET else None)
    record = {**entry.recompute(), "notes": notes}
    for key, value in facts.items():
        if record[key] != value:
            raise CatalogError(f"{name}: construction gives {key}={record[key]}, expected {value}")
    return CatalogEntry(name, fan, record, entry.target)


def catalog_dir() -> Path:
    return Path(os.environ.get("TORFAN_CATALOG_DIR", DATA_DIR))


def _entry_path(name: str, directory: Path) -> Path:
    return directory / f"{name}.json"


def _compact(text: str) -> str:
    # one ray or cone per line
    return re.sub(r"\[\s+([-\d,\s]+?)\s+\]", lambda m: "[" + ", ".join(m.group(1).replace(",", " ").split()) + "]", text)


def regenerate(directory: Optional[Path] = None) -> list[Path]:
    directory = Path(directory or catalog_dir())
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in PINNED_NAMES:
        entry = build(name)
        doc = {"name": name, "fan": fan_to_dict(entry.fan), "expected": entry.expected}
        if entry.target is not None:
            doc["target"] = fan_to_dict(entry.target)
        path = _entry_path(name, directory)
        path.write_text(_compact(json.dumps(doc, indent=1)) + "\n")
        written.append(path)
    return written


@functools.lru_cache(maxsize=None)
def _load(name: str, directory: str) -> CatalogEntry:
    path = _entry_path(name, Path(directory))
    doc = json.loads(path.read_text())
    target = fan_from_dict(doc["target"]) if "target" in doc else None
    return CatalogEntry(doc["name"], fan_from_dict(doc["fan"]), doc["expected"], target)


def catalog(name: str) -> CatalogEntry:
    """Pinned entry by name; products ``AxB`` of entries are composed on demand."""
    directory = catalog_dir()
    if _entry_path(name, directory).exists():
        entry = _load(name, str(directory))
    elif "x" in name and not name.startswith(("subdiv", "multi")):
        parts = [catalog(p) for p in name.split("x")]
        fan = functools.reduce(product, (p.fan for p in parts))
        record = {"dim": fan.dim, "picard": sum(p.expected["picard"] for p in parts)}
        if all("fano" in p.expected for p in parts):
            record["fano"] = all(p.expected["fano"] for p in parts)
        record["notes"] = "product of " + ", ".join(p.name for p in parts)
        entry = CatalogEntry(name, fan, record)
    else:
        raise CatalogError(f"unknown catalog entry: {name}")
    problems = entry.check()
    if problems:
        raise CatalogError(f"{name}: " + "; ".join(problems))
    return entry


def catalog_names() -> list[str]:
    directory = catalog_dir()
    return sorted(p.stem for p in directory.glob("*.json"))


# -- lattice isomorphism ---------------------------------------------------


def _ray_signature(fan: Fan) -> tuple:
    counts = [0] * fan.n_rays
    for c in fan.max_cones:
        for i in c:
            counts[i] += 1
    return tuple(sorted(counts))


def lattice_isomorphic(a: Fan, b: Fan) -> Optional[list[list[int]]]:
    """Unimodular matrix ``M`` with ``M * rays(a) = rays(b)`` matching cones.

    Returns the matrix (rows act on column vectors) or ``None``. A maximal
    cone of ``a`` is a lattice basis, so ``M`` is fixed by where that cone
    goes: every maximal cone of ``b`` in every order is tried.
    """
    if a.dim != b.dim or a.n_rays != b.n_rays or len(a.max_cones) != len(b.max_cones):
        return None
    if _ray_signature(a) != _ray_signature(b):
        return None
    n = a.dim
    if n == 0:
        return []
    cone_a = a.max_cones[0]
    src_inv = lattice.inverse([list(c) for c in zip(*a.generators(cone_a))])
    b_cones = {frozenset(c) for c in b.max_cones}
    for cone_b in b.max_cones:
        for perm in itertools.permutations(cone_b):
            cols = [list(c) for c in zip(*b.generators(perm))]
            matrix = [[sum(Fraction(cols[i][k]) * src_inv[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
            if any(x.denominator != 1 for row in matrix for x in row):
                continue
            m = [[int(x) for x in row] for row in matrix]
            if abs(lattice.det(m)) != 1:
                continue
            image = [b.ray_index.get(lattice.apply(m, r)) for r in a.rays]
            if None in image:
                continue
            if all(frozenset(image[i] for i in c) in b_cones for c in a.max_cones):
                return m
    return None


# -- enumeration -----------------------------------------------------------


def _box(dim: int, bound: int) -> list[tuple[int, ...]]:
    return [v for v in itertools.product(range(-bound, bound + 1), repeat=dim) if lattice.is_primitive(v)]


def _cross(u, v) -> int:
    return u[0] * v[1] - u[1] * v[0]


def _bend(prev, mid, nxt) -> int:
    # prev + nxt == c * mid for consecutive rays of a smooth fan
    return _cross(prev, nxt)


def _cyclic_fans(bound: int):
    """Smooth complete 2-dimensional fans with rays in the box whose
    consecutive triples satisfy ``prev + next = c * mid`` with ``c <= 1``.

    When ``c > 0`` that identity is a primitive relation of degree ``2 - c``,
    so the pruning only drops fans that cannot be Fano. Rays are walked
    counterclockwise with consecutive determinant 1; each fan is produced
    once, starting from its ray of smallest angle.
    """
    rays = sorted(_box(2, bound), key=lambda v: math.atan2(v[1], v[0]) % (2 * math.pi))
    angle = {v: math.atan2(v[1], v[0]) % (2 * math.pi) for v in rays}

    def walk(seq):
        last = seq[-1]
        if (
            len(seq) >= 3
            and _cross(last, seq[0]) == 1
            and _bend(seq[-2], last, seq[0]) <= 1
            and _bend(last, seq[0], seq[1]) <= 1
        ):
            yield tuple(seq)
        for v in rays:
            if angle[v] <= angle[last] or _cross(last, v) != 1:
                continue
            if len(seq) >= 2 and _bend(seq[-2], last, v) > 1:
                continue
            yield from walk(seq + [v])

    for start in rays:
        yield from walk([start])


def _dedupe(fans: list[Fan]) -> list[Fan]:
    classes: list[Fan] = []
    for fan in fans:
        if not any(lattice_isomorphic(fan, c) is not None for c in classes):
            classes.append(fan)
    return classes


def enumerate_smooth_fano(dim: int, bound: Optional[int] = None) -> list[CatalogEntry]:
    """Smooth Fano fans up to lattice isomorphism.

    Dimension 2 walks all cyclic unimodular ray sequences in ``[-B, B]^2``
    (``B = 3`` by default). Dimension 3 fixes the facet spanned by the unit
    vectors, which is allowed since every facet of a smooth Fano polytope is
    a lattice basis; the remaining vertices then have coordinate sum at most
    zero and are drawn from ``[-B, B]^3`` (``B = 2`` by default).
    """
    if dim == 2:
        found = []
        for seq in _cyclic_fans(3 if bound is None else bound):
            k = len(seq)
            fan = Fan(2, seq, tuple(tuple(sorted((i, (i + 1) % k))) for i in range(k)))
            if is_fano(fan):
                found.append(fan)
    elif dim == 3:
        found = list(_fano_polytopes_3(2 if bound is None else bound))
    else:
        raise CatalogError(f"enumeration is only available in dimensions 2 and 3, not {dim}")
    classes = _dedupe(sorted(found, key=lambda f: (f.n_rays, f.rays)))
    return [
        CatalogEntry(f"fano{dim}-{k}", fan, {"dim": dim, "picard": picard_number(fan), "fano": True, "notes": "enumerated"})
        for k, fan in enumerate(classes, 1)
    ]


def _hull_is_clean(points: list[tuple[int, ...]], lattice_box) -> bool:
    """Every point is a vertex and no other nonzero lattice point is inside.

    Both conditions survive adding points, so they prune the search. The
    hull comes from floating point; final candidates are re-checked exactly.
    """
    from scipy.spatial import ConvexHull

    pts = np.array(points, dtype=float)
    hull = ConvexHull(pts)
    if len(hull.vertices) != len(points):
        return False
    inside = np.all(lattice_box @ hull.equations[:, :-1].T + hull.equations[:, -1] <= 1e-9, axis=1)
    chosen = {tuple(p) for p in points}
    return all(tuple(int(x) for x in q) in chosen or not any(q) for q in lattice_box[inside])


def _fano_polytopes_3(bound: int):
    unit = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    cand = [v for v in _box(3, bound) if sum(v) <= 0]
    grid = np.array(list(itertools.product(range(-bound, bound + 1), repeat=3)), dtype=float)

    def grow(chosen: list, start: int):
        verts = unit + chosen
        try:
            fan = face_fan(verts)
        except (FanError, ValueError):
            fan = None
        if fan is not None and (0, 1, 2) in fan.max_cones and validate(fan).ok and is_fano(fan):
            yield fan
        for k in range(start, len(cand)):
            nxt = chosen + [cand[k]]
            if _hull_is_clean(unit + nxt, grid):
                yield from grow(nxt, k + 1)

    yield from grow([], 0)
