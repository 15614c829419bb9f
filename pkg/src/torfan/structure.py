"""Order-two collections, divisor cases, S3-bundles, flips and the
reduction of a Fano fan with a symmetric pair ``x, -x`` to a P1-bundle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from . import lattice
from .fan import (
    Fan,
    FanError,
    blow_down,
    divisor_fan,
    star_subdivide,
    validate,
)
from .lattice import Vector
from .mori import is_extremal, is_projective
from .primitive import (
    PrimitiveRelation,
    is_fano,
    primitive_collections,
    primitive_relation,
    primitive_relations,
    relation_class,
    rho_diff,
)


class StructureError(FanError):
    pass


def _require_fano(fan: Fan) -> None:
    if not is_fano(fan):
        raise StructureError("fan is not Fano")


# -- order-two profile -----------------------------------------------------


@dataclass(frozen=True)
class Order2Pair:
    partner: int
    kind: str  # "sum_zero" or "sum_ray"
    sum_ray: Optional[int] = None


@dataclass(frozen=True)
class Order2Profile:
    ray_index: int
    pairs: tuple[Order2Pair, ...]


def order2_profile(fan: Fan, ray_index: int) -> Order2Profile:
    """Order-two primitive collections through a ray, with their relations.

    On a Fano fan each is ``x + y = 0`` or ``x + y = z``; two relations of the
    second kind must read ``x + y = -w`` and ``x + w = -y``.
    """
    x = ray_index
    pairs = []
    for p in primitive_collections(fan):
        if len(p) != 2 or x not in p:
            continue
        (y,) = set(p) - {x}
        rel = primitive_relation(fan, p)
        if not rel.focus:
            pairs.append(Order2Pair(y, "sum_zero"))
        elif rel.coefficients == (1,):
            pairs.append(Order2Pair(y, "sum_ray", rel.focus[0]))
        else:
            raise StructureError(f"input not Fano-consistent: order-two relation {rel.describe(fan)}")
    sums = [p for p in pairs if p.kind == "sum_ray"]
    for a, b in itertools.combinations(sums, 2):
        vx, vy, vw = fan.rays[x], fan.rays[a.partner], fan.rays[b.partner]
        if vw != lattice.neg(lattice.add(vx, vy)) or fan.rays[b.sum_ray] != lattice.neg(vy):
            raise StructureError("input not Fano-consistent: two order-two relations violate x+y=-w, x+w=-y")
    if len(pairs) > 3:
        raise StructureError(f"input not Fano-consistent: {len(pairs)} order-two collections through ray {x}")
    return Order2Profile(x, tuple(pairs))


# -- divisor cases ---------------------------------------------------------


@dataclass(frozen=True)
class DivisorCase:
    case: str  # case0, case1, case1_unclassified, case2a, case2b, case3
    ray_index: int
    rho_diff: int
    evidence: dict = field(default_factory=dict, compare=False)


def classify_divisor_case(fan: Fan, ray_index: int) -> DivisorCase:
    """Case of the divisor ``V(x)`` by the Picard drop ``rho_X - rho_D``.

    With drop 2 and pairs ``{x, -x}``, ``{x, y}`` (``x + y = v``), a ray
    ``-y`` makes ``v`` the distinguished generator and a ray ``-v`` makes
    ``y`` the distinguished generator; both then fall under ``case2a``.
    """
    _require_fano(fan)
    x = ray_index
    profile = order2_profile(fan, x)
    drop = rho_diff(fan, x)
    vec = lambda i: list(fan.rays[i])  # noqa: E731
    evidence: dict = {"pairs": [{"partner": vec(p.partner), "kind": p.kind} for p in profile.pairs]}
    neg_x = fan.ray_index.get(lattice.neg(fan.rays[x]))
    if drop == 0:
        return DivisorCase("case0", x, 0, evidence)
    if drop == 1:
        (p,) = profile.pairs
        if p.kind == "sum_zero":
            return DivisorCase("case1", x, 1, evidence)
        evidence["reason"] = "no symmetric generator -x"
        return DivisorCase("case1_unclassified", x, 1, evidence)
    if drop == 2:
        kinds = sorted(p.kind for p in profile.pairs)
        if kinds == ["sum_ray", "sum_ray"]:
            return DivisorCase("case2a", x, 2, evidence)
        if kinds == ["sum_ray", "sum_zero"] and neg_x is not None:
            (p,) = [p for p in profile.pairs if p.kind == "sum_ray"]
            y, v = p.partner, p.sum_ray
            if lattice.neg(fan.rays[y]) in fan.ray_index:
                evidence["relabel"] = {"distinguished": vec(v), "because": "-y is a generator"}
                assert classify_divisor_case(fan, v).case == "case2a"
                return DivisorCase("case2a", x, 2, evidence)
            if lattice.neg(fan.rays[v]) in fan.ray_index:
                evidence["relabel"] = {"distinguished": vec(y), "because": "-v is a generator"}
                assert classify_divisor_case(fan, y).case == "case2a"
                return DivisorCase("case2a", x, 2, evidence)
            evidence["blow_down"] = {"ray": vec(y), "relation": f"(-x) + {vec(v)} = {vec(y)}"}
            return DivisorCase("case2b", x, 2, evidence)
        raise StructureError(f"unexpected order-two pattern {kinds}")
    if drop == 3:
        return DivisorCase("case3", x, 3, evidence)
    raise StructureError(f"Picard drop {drop} exceeds 3; input is not Fano-consistent")


# -- S3-bundles ------------------------------------------------------------


@dataclass(frozen=True)
class S3Bundle:
    hexagon: tuple[int, ...]  # x, y, w, -x, -y, -w
    fiber_plane: tuple[Vector, Vector]
    base: Fan


def _relation_is(fan: Fan, lhs: list[int], rhs: list[int]) -> bool:
    p = tuple(sorted(lhs))
    if p not in primitive_collections(fan):
        return False
    rel = primitive_relation(fan, p)
    return rel.focus == tuple(sorted(rhs)) and all(a == 1 for a in rel.coefficients)


def detect_s3_bundle(fan: Fan) -> Optional[S3Bundle]:
    """Find a hexagon of generators through which the fan is an S3-bundle.

    The base is the image of the fan in ``N / <x, y>``: every maximal cone
    must contain exactly ``n - 2`` rays outside the hexagon, and their
    projections give the base cones.
    """
    _require_fano(fan)
    for x in range(fan.n_rays):
        if rho_diff(fan, x) != 3:
            continue
        profile = order2_profile(fan, x)
        sums = sorted((p for p in profile.pairs if p.kind == "sum_ray"), key=lambda p: p.partner)
        y, w = sums[0].partner, sums[1].partner
        idx = fan.ray_index
        try:
            mx, my, mw = (idx[lattice.neg(fan.rays[i])] for i in (x, y, w))
        except KeyError:
            raise StructureError("hexagon generators missing") from None
        expected = [
            ([x, mx], []), ([x, y], [mw]), ([x, w], [my]),
            ([mx, my], [w]), ([mx, mw], [y]), ([y, w], [mx]),
            ([y, my], []), ([my, mw], [x]), ([w, mw], []),
        ]
        for lhs, rhs in expected:
            if not _relation_is(fan, lhs, rhs):
                raise StructureError(f"hexagon relation fails for collection {sorted(lhs)}")
        hexagon = (x, y, w, mx, my, mw)
        hexset = set(hexagon)
        q = lattice.quotient_map([fan.rays[x], fan.rays[y]], fan.dim)
        outside = sorted(set(range(fan.n_rays)) - hexset)
        images = {i: lattice.apply(q, fan.rays[i]) for i in outside}
        if len(set(images.values())) != len(outside):
            raise StructureError("base rays are not distinct")
        order = {v: k for k, v in enumerate(sorted(set(images.values())))}
        base_rays = tuple(sorted(order, key=order.get))
        cones = set()
        for c in fan.max_cones:
            rest = [i for i in c if i not in hexset]
            if len(rest) != fan.dim - 2:
                raise StructureError(f"maximal cone {c} does not split as fiber plus base")
            cones.add(tuple(sorted(order[images[i]] for i in rest)))
        base = Fan(fan.dim - 2, base_rays, tuple(sorted(cones)))
        rep = validate(base)
        if not rep.ok:
            raise StructureError("projected base is not a smooth complete fan: " + "; ".join(rep.defects[:3]))
        if not is_fano(base):
            raise StructureError("base of the S3-bundle is not Fano")
        return S3Bundle(hexagon, (fan.rays[x], fan.rays[y]), base)
    return None


# -- flips -----------------------------------------------------------------


def flip(fan: Fan, relation: PrimitiveRelation) -> Fan:
    """Flip ``sum(P) = sum(focus)`` with unit coefficients.

    Star subdivide the focus cone, then blow the new ray down onto the
    collection. Ray indices are preserved; afterwards the collection is a
    cone and the focus is a primitive collection with the reversed
    relation.
    """
    p, focus = relation.collection, relation.focus
    if any(a != 1 for a in relation.coefficients) or len(focus) < 2 or len(p) < 2:
        raise StructureError("flip needs unit coefficients and at least two rays on each side")
    if set(p) & set(focus):
        raise StructureError("collection and focus overlap")
    up = star_subdivide(fan, focus)
    v = up.n_rays - 1
    down, tau = blow_down(up, v, center=p)
    assert tau == tuple(sorted(p))
    return down


# -- basic construction ----------------------------------------------------


@dataclass(frozen=True)
class PipelineStep:
    kind: str  # "flip" or "blow_down"
    relation: str
    contracted_ray: Optional[Vector]
    fan_after: Fan


@dataclass(frozen=True)
class BasicConstruction:
    steps: tuple[PipelineStep, ...]
    bundle_fan: Fan
    base: Fan

    @property
    def flips(self) -> int:
        return sum(1 for s in self.steps if s.kind == "flip")

    @property
    def blow_downs(self) -> int:
        return sum(1 for s in self.steps if s.kind == "blow_down")


def _describe(vectors_lhs, vectors_rhs) -> str:
    return " + ".join(map(str, map(list, vectors_lhs))) + " = " + (" + ".join(map(str, map(list, vectors_rhs))) or "0")


def basic_construction(fan: Fan, ray_index: int) -> BasicConstruction:
    """Remove every obstruction to ``x + (-x) = 0`` being extremal.

    For each primitive collection ``P = {x, y_1..y_h}`` other than
    ``{x, -x}`` the partner relation ``(-x) + z_1..z_h = y_1..y_h`` is either
    blown down (``h = 1``, contracting ``V(y)``) or flipped. The star of
    ``x`` never changes. The result is a P1-bundle whose base is the divisor
    fan of ``x``.
    """
    _require_fano(fan)
    vx = fan.rays[ray_index]
    vmx = lattice.neg(vx)
    if vmx not in fan.ray_index:
        raise StructureError("-x is not a generator")
    pair = tuple(sorted((ray_index, fan.ray_index[vmx])))
    obstructions = [
        frozenset(fan.rays[i] for i in p)
        for p in primitive_collections(fan)
        if ray_index in p and p != pair
    ]
    star_x = _star_vectors(fan, vx)
    steps: list[PipelineStep] = []
    current = fan
    for obs in obstructions:
        idx = current.ray_index
        p = [idx[v] for v in obs]
        if tuple(sorted(p)) not in primitive_collections(current):
            raise StructureError(f"obstruction {sorted(obs)} is no longer primitive")
        rel = primitive_relation(current, p)
        ys = [i for i in rel.collection if current.rays[i] != vx]
        zs = list(rel.focus)
        if rel.degree != 1 or any(a != 1 for a in rel.coefficients):
            raise StructureError(f"obstruction relation {rel.describe(current)} is not balanced of degree one")
        partner = tuple(sorted([idx[vmx]] + zs))
        prel = primitive_relation(current, partner)
        if prel.focus != tuple(sorted(ys)) or any(a != 1 for a in prel.coefficients):
            raise StructureError(f"partner relation {prel.describe(current)} has the wrong shape")
        if not is_extremal(current, relation_class(current, prel)):
            raise StructureError(f"partner relation {prel.describe(current)} is not extremal")
        text = _describe([vmx] + [current.rays[i] for i in zs], [current.rays[i] for i in ys])
        if len(ys) == 1:
            (y,) = ys
            contracted = current.rays[y]
            current, _ = blow_down(current, y, center=partner)
            steps.append(PipelineStep("blow_down", text, contracted, current))
        else:
            current = flip(current, prel)
            back = primitive_relation(current, [current.ray_index[current.rays[i]] for i in ys])
            if back.degree != -1:
                raise StructureError("flip did not produce a degree -1 relation")
            steps.append(PipelineStep("flip", text, None, current))
        rep = validate(current)
        if not rep.ok:
            raise StructureError("intermediate fan is not smooth and complete: " + "; ".join(rep.defects[:3]))
        if not is_projective(current):
            raise StructureError("intermediate fan is not projective")
        if _star_vectors(current, vx) != star_x:
            raise StructureError("the star of x changed")

    xi, mxi = current.ray_index[vx], current.ray_index[vmx]
    others = [p for p in primitive_collections(current) if (xi in p or mxi in p) and p != tuple(sorted((xi, mxi)))]
    if others:
        raise StructureError(f"obstructions remain: {others}")
    cls = relation_class(current, primitive_relation(current, (xi, mxi)))
    if not is_extremal(current, cls):
        raise StructureError("x + (-x) = 0 is not extremal at the end")
    for c in current.max_cones:
        if (xi in c) == (mxi in c):
            raise StructureError(f"maximal cone {c} does not contain exactly one of x, -x")
    base = divisor_fan(current, xi)
    if not _same_projection(current, xi, mxi, base):
        raise StructureError("the two sections project to different fans")
    return BasicConstruction(tuple(steps), current, base)


def _star_vectors(fan: Fan, v: Vector) -> frozenset:
    i = fan.ray_index[v]
    return frozenset(frozenset(fan.rays[j] for j in c) for c in fan.max_cones if i in c)


def _same_projection(fan: Fan, xi: int, mxi: int, base: Fan) -> bool:
    other = divisor_fan(fan, mxi)
    q = lattice.quotient_map([fan.rays[xi]], fan.dim)
    # both sections project along x; compare cone sets as vectors
    def projected(section):
        return frozenset(
            frozenset(lattice.apply(q, fan.rays[j]) for j in c if j != section)
            for c in fan.max_cones
            if section in c
        )

    return projected(xi) == projected(mxi) and len(base.max_cones) == len(other.max_cones)
