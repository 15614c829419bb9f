"""Equivariant birational morphisms given by fan refinements.

A morphism ``X -> Y`` of smooth complete toric varieties is a refinement
of fans. This module locates each source ray in the target, analyses the
generators around a target cone, classifies how a maximal target cone of a
4-dimensional target is subdivided, and factors the morphism into star
subdivisions.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import lattice
from .fan import (
    Cone,
    Fan,
    FanError,
    blow_down,
    locate,
    orbit_picard_number,
    require_smooth_complete,
    star_subdivide,
    validate,
)
from .lattice import Vector
from .primitive import is_fano, picard_number, primitive_collections, primitive_relation


class RefinementError(FanError):
    pass


# -- refinement map --------------------------------------------------------


@dataclass(frozen=True)
class RefinementMap:
    source: Fan
    target: Fan
    ray_to_cone: tuple[Cone, ...]  # minimal target cone of each source ray
    cone_to_cone: tuple[int, ...]  # target maximal cone of each source maximal cone

    @property
    def new_rays(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.source.rays) if r not in self.target.ray_index)

    def target_ray_in_source(self, j: int) -> int:
        return self.source.ray_index[self.target.rays[j]]


def build_refinement(source: Fan, target: Fan) -> RefinementMap:
    require_smooth_complete(source)
    require_smooth_complete(target)
    if source.dim != target.dim:
        raise RefinementError("source and target have different dimensions")
    missing = [r for r in target.rays if r not in source.ray_index]
    if missing:
        raise RefinementError(f"target rays missing from source: {missing}")
    ray_to_cone = tuple(locate(target, r)[0] for r in source.rays)
    cone_to_cone = []
    for c in source.max_cones:
        need = set().union(*(ray_to_cone[i] for i in c))
        hosts = [k for k, t in enumerate(target.max_cones) if need.issubset(t)]
        if not hosts:
            raise RefinementError(f"source cone {c} (rays {[list(source.rays[i]) for i in c]}) straddles a target wall")
        cone_to_cone.append(hosts[0])
    return RefinementMap(source, target, ray_to_cone, tuple(cone_to_cone))


# -- centers ---------------------------------------------------------------


@dataclass(frozen=True)
class CenterPartition:
    tau: Cone  # target indices
    cone: Cone  # source indices x_1..x_k
    blocks: tuple[Cone, ...]  # target indices J_i with x_i = sum of J_i


def center_partition(fmap: RefinementMap, tau: Sequence[int]) -> CenterPartition:
    """The source cone through ``sum(tau)`` and how its rays split ``tau``."""
    tau = tuple(sorted(tau))
    if tau not in fmap.target.faces:
        raise RefinementError(f"{tau} is not a cone of the target")
    total = lattice.add(*fmap.target.generators(tau)) if tau else (0,) * fmap.target.dim
    cone, coeffs = locate(fmap.source, total)
    if any(a != 1 for a in coeffs):
        raise RefinementError(f"sum of {tau} has coefficients {coeffs} in the source; input is not smooth")
    blocks = []
    for i in cone:
        block = fmap.ray_to_cone[i]
        if lattice.add(*fmap.target.generators(block)) != fmap.source.rays[i]:
            raise RefinementError(f"source ray {fmap.source.rays[i]} is not the sum of its target cone")
        blocks.append(block)
    flat = sorted(j for b in blocks for j in b)
    if flat != list(tau):
        raise RefinementError(f"blocks {blocks} do not partition {tau}")
    return CenterPartition(tau, cone, tuple(blocks))


# -- generators around a target cone ---------------------------------------


@dataclass(frozen=True)
class ExceptionalSets:
    eta: Cone
    g_set: tuple[int, ...]
    h_set: tuple[int, ...]
    boundary_set: tuple[int, ...]
    checks: dict = field(default_factory=dict, compare=False)


def exceptional_sets(fmap: RefinementMap, eta: Sequence[int], check: bool = True) -> ExceptionalSets:
    """Split source rays by position relative to the star of ``eta``.

    A ray whose minimal target cone ``tau`` contains ``eta`` is interior,
    one with ``tau + eta`` not a target cone is outside, the rest lie on the
    boundary. With ``check`` (Fano source) the separation properties are
    asserted: ``G`` or ``H`` empty or ``|G + H| <= 4``, every cross sum is zero or a
    boundary generator, and ``|G + H| == 4`` only for S3-bundles.
    """
    eta = tuple(sorted(eta))
    target = fmap.target
    if eta not in target.faces:
        raise RefinementError(f"{eta} is not a cone of the target")
    g, h, b = [], [], []
    for z, tau in enumerate(fmap.ray_to_cone):
        if set(eta).issubset(tau):
            g.append(z)
        elif not target.is_cone(set(tau) | set(eta)):
            h.append(z)
        else:
            b.append(z)
    checks: dict = {}
    if check:
        src = fmap.source
        checks["small"] = not (g and h) or len(g) + len(h) <= 4
        bset = {src.rays[i] for i in b}
        cross = True
        for z1, z2 in itertools.product(g, h):
            s = lattice.add(src.rays[z1], src.rays[z2])
            if any(s) and s not in bset:
                cross = False
        checks["cross_sums"] = cross
        if len(g) + len(h) == 4 and g and h:
            from .structure import detect_s3_bundle

            checks["s3_bundle"] = detect_s3_bundle(src) is not None
        if not all(checks.values()):
            raise RefinementError(f"separation properties fail around {eta}: {checks}")
    return ExceptionalSets(eta, tuple(g), tuple(h), tuple(b), checks)


@dataclass(frozen=True)
class PicardDropEntry:
    ray: Vector
    image_cone: Cone
    drop: int  # rho_Y - rho of the image of the divisor
    point_image: bool


def check_puh(fmap: RefinementMap) -> list[PicardDropEntry]:
    """Picard drop from the target to the image of each exceptional divisor.

    The drop is at most 3. A divisor contracted to a point forces
    ``rho_Y <= 3``, and it is the only one contracted there unless the
    target is projective space, which allows one more.
    """
    target = fmap.target
    rho_y = picard_number(target)
    out = []
    per_point: dict[Cone, int] = {}
    for z in fmap.new_rays:
        eta = fmap.ray_to_cone[z]
        drop = rho_y - orbit_picard_number(target, eta)
        point = len(eta) == target.dim
        if drop > 3:
            raise RefinementError(f"Picard drop {drop} > 3 for ray {fmap.source.rays[z]}")
        if point:
            if rho_y > 3:
                raise RefinementError(f"divisor contracted to a point but rho_Y = {rho_y}")
            per_point[eta] = per_point.get(eta, 0) + 1
        out.append(PicardDropEntry(fmap.source.rays[z], eta, drop, point))
    limit = 2 if rho_y == 1 else 1
    for eta, count in per_point.items():
        if count > limit:
            raise RefinementError(f"{count} divisors contracted to the point of cone {eta}")
    return out


# -- the seventeen subdivision types ---------------------------------------

# centers with the label of the ray each one creates, and the primitive
# relations among the rays of the subdivided cone
SUBDIVISION_TYPES: dict[int, tuple[tuple[tuple[str, str], ...], tuple[str, ...]]] = {
    1: ((), ()),
    2: ((("y1,y2", "x1"),), ("y1+y2=x1",)),
    3: ((("y1,y2,y3", "x1"),), ("y1+y2+y3=x1",)),
    4: ((("y1,y2,y3,y4", "x1"),), ("y1+y2+y3+y4=x1",)),
    5: ((("y1,y2", "x1"), ("y3,y4", "x2")), ("y1+y2=x1", "y3+y4=x2")),
    6: ((("y1,y2,y3", "x1"), ("y1,x1", "x2")), ("y1+y2+y3=x1", "y1+x1=x2", "y2+y3+x2=2x1")),
    7: ((("y1,y2,y3", "x1"), ("y1,y4", "x2")), ("y1+y2+y3=x1", "y1+y4=x2", "y2+y3+x2=x1+y4")),
    8: ((("y1,y2,y3", "x1"), ("y1,y2", "x2")), ("y1+y2=x2", "x2+y3=x1")),
    9: ((("y1,y2,y3,y4", "x1"), ("y1,y2,y3", "x2")), ("y1+y2+y3=x2", "x2+y4=x1")),
    10: (
        (("y1,y2,y3", "x2"), ("y2,y3,y4", "x3"), ("y4,x2", "x1")),
        ("y1+y2+y3=x2", "y2+y3+y4=x3", "y1+x3=x1", "y4+x2=x1", "y2+y3+x1=x2+x3"),
    ),
    11: ((("y1,y2,y3,y4", "x1"), ("y1,y2", "x2")), ("y1+y2=x2", "y3+y4+x2=x1")),
    12: (
        (("y1,y2,y3,y4", "x1"), ("y1,y2", "x2"), ("y3,y4", "x3")),
        ("y1+y2=x2", "y3+y4=x3", "x2+x3=x1"),
    ),
    13: (
        (("y1,y2,y3,y4", "x1"), ("y1,y2", "x2"), ("x2,y3", "x3")),
        ("y1+y2=x2", "y3+x2=x3", "y4+x3=x1"),
    ),
    14: (
        (("y1,y2,y3,y4", "x1"), ("y1,x1", "x2")),
        ("y1+y2+y3+y4=x1", "y1+x1=x2", "x2+y2+y3+y4=2x1"),
    ),
    15: (
        (("y1,y2,y3,y4", "x1"), ("y1,y2,y3", "x2"), ("y1,x1", "x3")),
        ("y1+y2+y3=x2", "x2+y4=x1", "y1+x1=x3", "y2+y3+x3=x1+x2"),
    ),
    16: (
        (("y1,y2,y3,y4", "x1"), ("y1,y2", "x2"), ("y3,x1", "x3")),
        ("y1+y2=x2", "y3+y4+x2=x1", "y3+x1=x3", "y4+x2+x3=2x1"),
    ),
    17: (
        (("y1,y2,y3,y4", "x1"), ("y1,y2", "x2"), ("x1,x2", "x3")),
        ("y1+y2=x2", "y3+y4+x2=x1", "x1+x2=x3", "y3+y4+x3=2x1"),
    ),
}

PROJECTIVE_SPACE_ONLY = frozenset({14, 15, 16, 17})

_TERM = re.compile(r"^(\d*)([xy]\d)$")

Relation = tuple[tuple[str, ...], tuple[tuple[str, int], ...]]


def parse_relation(text: str) -> Relation:
    """``"y2+y3+x2=2x1"`` -> ``(("x2", "y2", "y3"), (("x1", 2),))``."""
    lhs, rhs = text.replace(" ", "").split("=")

    def side(s):
        out = []
        for term in s.split("+"):
            m = _TERM.match(term)
            if not m:
                raise ValueError(f"bad term {term!r} in {text!r}")
            out.append((m.group(2), int(m.group(1) or 1)))
        return out

    left = side(lhs)
    if any(c != 1 for _, c in left):
        raise ValueError(f"left side of {text!r} must have unit coefficients")
    return tuple(sorted(t for t, _ in left)), tuple(sorted(side(rhs)))


def type_centers(code: int) -> list[tuple[list[str], str]]:
    return [(c.split(","), new) for c, new in SUBDIVISION_TYPES[code][0]]


def type_relations(code: int) -> list[Relation]:
    return sorted(parse_relation(r) for r in SUBDIVISION_TYPES[code][1])


def expected_new_rays(code: int, ys: Sequence[Vector]) -> dict[str, Vector]:
    """Vectors of every label once ``y1..y4`` are fixed."""
    vec = {f"y{k + 1}": tuple(v) for k, v in enumerate(ys)}
    for gens, new in type_centers(code):
        vec[new] = lattice.add(*(vec[g] for g in gens))
    return vec


# -- classification --------------------------------------------------------


@dataclass(frozen=True)
class SubdivisionReport:
    sigma: Cone  # target indices
    type_code: Optional[int]
    centers: tuple[Cone, ...]  # source indices, in blow-up order
    center_labels: tuple[str, ...]
    labels: dict = field(compare=False)  # label -> source index
    relations: tuple[str, ...] = ()
    partition: Optional[CenterPartition] = None
    generalized: bool = False


def _restriction(fmap: RefinementMap, sigma_index: int) -> Fan:
    """Source cones inside a target maximal cone, as a local fan."""
    src = fmap.source
    cones = [c for c, k in zip(src.max_cones, fmap.cone_to_cone) if k == sigma_index]
    used = sorted({i for c in cones for i in c})
    new = {i: t for t, i in enumerate(used)}
    return Fan(src.dim, tuple(src.rays[i] for i in used), tuple(tuple(new[i] for i in c) for c in cones))


def _replay(sigma_vectors: Sequence[Vector], centers_vectors: Sequence[Sequence[Vector]]) -> Fan:
    n = len(sigma_vectors)
    fan = Fan(n, tuple(sigma_vectors), (tuple(range(n)),))
    for vecs in centers_vectors:
        fan = star_subdivide(fan, [fan.ray_index[v] for v in vecs])
    return fan


def classify_subdivision(fmap: RefinementMap, sigma: Sequence[int]) -> SubdivisionReport:
    """Type (1..17) of the subdivision of a maximal target cone.

    Tries every labelling ``y1..y4`` of the cone's rays against every type:
    the new rays inside the cone must be exactly the labelled sums and the
    primitive relations among the cone's rays must be the listed ones.
    Matches are confirmed by replaying the centers; among several the
    lexicographically smallest center list (in source indices) wins.
    Outside dimension 4 a reverse blow-down search is used instead.
    """
    target, source = fmap.target, fmap.source
    sigma = tuple(sorted(sigma))
    if sigma not in target.max_cones:
        raise RefinementError(f"{sigma} is not a maximal cone of the target")
    k = target.max_cones.index(sigma)
    local = _restriction(fmap, k)
    partition = center_partition(fmap, sigma)
    if target.dim != 4:
        return _classify_generalized(fmap, sigma, local, partition)

    sigma_set = set(sigma)
    inside = [i for i, tau in enumerate(fmap.ray_to_cone) if set(tau).issubset(sigma_set)]
    new_inside = {source.rays[i] for i in inside if source.rays[i] not in target.ray_index}
    rel_src = []
    inside_set = set(inside)
    for p in primitive_collections(source):
        if set(p).issubset(inside_set):
            rel_src.append(primitive_relation(source, p))

    matches = []
    for order in itertools.permutations(sigma):
        ys = [target.rays[j] for j in order]
        for code in SUBDIVISION_TYPES:
            if len(SUBDIVISION_TYPES[code][0]) != len(new_inside):
                continue
            vec = expected_new_rays(code, ys)
            if {v for lab, v in vec.items() if lab.startswith("x")} != new_inside:
                continue
            labels = {lab: source.ray_index[v] for lab, v in vec.items()}
            back = {i: lab for lab, i in labels.items()}
            actual = sorted(
                (
                    tuple(sorted(back[i] for i in r.collection)),
                    tuple(sorted((back[i], a) for i, a in zip(r.focus, r.coefficients))),
                )
                for r in rel_src
            )
            if actual != type_relations(code):
                continue
            centers = tuple(tuple(sorted(labels[g] for g in gens)) for gens, _ in type_centers(code))
            matches.append((centers, code, labels))
    if not matches:
        raise RefinementError(f"no subdivision type matches cone {sigma}")
    codes = {m[1] for m in matches}
    if len(codes) != 1:
        raise RefinementError(f"cone {sigma} matches several types {sorted(codes)}")
    centers, code, labels = min(matches, key=lambda m: m[0])
    replay = _replay([target.rays[j] for j in sigma], [[source.rays[i] for i in c] for c in centers])
    if replay.cone_vectors() != local.cone_vectors():
        raise RefinementError(f"replaying type {code} does not reproduce cone {sigma}")
    if code in PROJECTIVE_SPACE_ONLY and picard_number(target) != 1:
        raise RefinementError(f"type {code} requires the target to be projective space")
    center_labels = tuple("<" + ",".join(gens) + ">" for gens, _ in type_centers(code))
    back = {i: lab for lab, i in labels.items()}
    relations = tuple(
        sorted(
            "+".join(back[i] for i in r.collection)
            + "="
            + "+".join((f"{a}" if a != 1 else "") + back[i] for i, a in zip(r.focus, r.coefficients))
            for r in rel_src
        )
    )
    return SubdivisionReport(sigma, code, centers, center_labels, dict(labels), relations, partition)


def _classify_generalized(fmap, sigma, local: Fan, partition) -> SubdivisionReport:
    """Find a star subdivision sequence for ``local`` by undoing blow-ups."""
    source, target = fmap.source, fmap.target
    base_vectors = [target.rays[j] for j in sigma]
    base = frozenset(base_vectors)

    def search(fan: Fan):
        if set(fan.rays) == base:
            return [] if len(fan.max_cones) == 1 else None
        for v in sorted(set(fan.rays) - base):
            i = fan.ray_index[v]
            try:
                coarse, tau = blow_down(fan, i)
            except FanError:
                continue
            rest = search(coarse)
            if rest is not None:
                return rest + [[coarse.rays[t] for t in tau]]
        return None

    seq = search(local)
    if seq is None:
        raise RefinementError(f"cone {sigma} is not an iterated star subdivision")
    centers = tuple(tuple(sorted(source.ray_index[v] for v in vecs)) for vecs in seq)
    return SubdivisionReport(sigma, None, centers, (), {}, (), partition, generalized=True)


# -- factorization ---------------------------------------------------------


@dataclass(frozen=True)
class BlowUpStep:
    center: tuple[Vector, ...]
    new_ray: Vector
    fan: Fan


def factorize(fmap: RefinementMap) -> list[BlowUpStep]:
    """Blow-up sequence from the target to the source.

    Every new ray must be created once. Neighbouring cones may reach the
    same ray through different centers, so each ray keeps all centers
    proposed for it. Centers are applied with non-increasing dimension,
    each a cone of the current fan; the search backtracks until the final
    fan equals the source.
    """
    reports = [classify_subdivision(fmap, s) for s in fmap.target.max_cones]
    src = fmap.source
    options: dict[Vector, set[frozenset]] = {}
    for rep in reports:
        for c in rep.centers:
            vecs = frozenset(src.rays[i] for i in c)
            options.setdefault(lattice.add(*vecs), set()).add(vecs)
    missing = set(src.rays[i] for i in fmap.new_rays) - set(options)
    if missing:
        raise RefinementError(f"new rays without a center: {sorted(missing)}")
    goal = src.cone_vectors()
    moves = sorted(
        ((ray, c) for ray, cs in options.items() for c in cs),
        key=lambda m: (-len(m[1]), sorted(m[1])),
    )

    def search(fan: Fan, done: frozenset, last_dim: int, steps: list):
        if len(done) == len(options):
            return steps if fan.cone_vectors() == goal else None
        for ray, c in moves:
            if ray in done or len(c) > last_dim or not all(v in fan.ray_index for v in c):
                continue
            idx = [fan.ray_index[v] for v in c]
            if not fan.is_cone(idx):
                continue
            nxt = star_subdivide(fan, idx)
            found = search(nxt, done | {ray}, len(c), steps + [BlowUpStep(tuple(sorted(c)), ray, nxt)])
            if found is not None:
                return found
        return None

    steps = search(fmap.target, frozenset(), fmap.target.dim, [])
    if steps is None:
        raise RefinementError("no admissible order of the centers reproduces the source")
    for s in steps:
        rep = validate(s.fan)
        if not (rep.smooth and rep.complete):
            raise RefinementError("intermediate fan is not smooth and complete")
    return steps


def source_is_fano(fmap: RefinementMap) -> bool:
    return is_fano(fmap.source)
