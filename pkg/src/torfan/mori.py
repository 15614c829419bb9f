"""Curve classes on smooth complete toric varieties: effectiveness,
contractibility, extremality and projectivity.

On a projective toric variety the cone of effective curves is spanned by the
classes of primitive relations, so extremality becomes an LP question over
those finitely many classes.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from . import lattice
from .fan import Fan, FanError, require_smooth_complete
from .lp import LPProblem, find_nonnegative_combination
from .primitive import (
    PrimitiveRelation,
    RelationClass,
    primitive_relation,
    primitive_relations,
    relation_class,
)


def effective_by_criterion(fan: Fan, cls: RelationClass) -> bool:
    """Sufficient test: the negative entries of the class sit on a cone.

    ``False`` means the test is inconclusive, not that the class is not
    effective.
    """
    cls.check(fan)
    return fan.is_cone(cls.negative_support())


def _walls(fan: Fan):
    """Yield ``(u, w, wall, coeffs)`` with ``u + w == sum(coeffs * wall)``."""
    seen = {}
    for c in fan.max_cones:
        for u in c:
            wall = tuple(i for i in c if i != u)
            seen.setdefault(wall, []).append(u)
    for wall, (u, w) in sorted(seen.items()):
        target = lattice.add(fan.rays[u], fan.rays[w])
        coeffs = lattice.solve_in_span(fan.generators(wall), target)
        yield u, w, wall, [int(a) for a in coeffs]


@functools.lru_cache(maxsize=1024)
def ample_heights(fan: Fan) -> Optional[tuple[int, ...]]:
    """Integer values on the rays of a strictly convex support function.

    Strictness is imposed wall by wall (slack at least 1), which for a
    complete simplicial fan is equivalent to global strict convexity.
    Returns ``None`` when the fan is not projective.
    """
    require_smooth_complete(fan)
    lp = LPProblem()
    h = [lp.add_variable(f"h{i}", free=True) for i in range(fan.n_rays)]
    for i in fan.max_cones[0]:
        lp.add_constraint({h[i]: 1}, "==", 0)
    rows = set()
    for u, w, wall, coeffs in _walls(fan):
        row = [0] * fan.n_rays
        row[u] += 1
        row[w] += 1
        for j, a in zip(wall, coeffs):
            row[j] -= a
        rows.add(tuple(row))
    for row in sorted(rows):
        lp.add_constraint({h[i]: a for i, a in enumerate(row) if a}, ">=", 1)
    sol = lp.solve()
    if sol is None:
        return None
    values = [sol[v] for v in h]
    scale = lcm(*(Fraction(x).denominator for x in values))
    return tuple(int(x * scale) for x in values)


def is_projective(fan: Fan) -> bool:
    return ample_heights(fan) is not None


def _require_projective(fan: Fan) -> None:
    if not is_projective(fan):
        raise FanError("fan is not projective; primitive relations need not span the effective cone")


def _rank_one(a: Sequence[int], b: Sequence[int]) -> bool:
    return lattice.rank([a, b]) <= 1


@functools.lru_cache(maxsize=1024)
def relation_classes(fan: Fan) -> tuple[RelationClass, ...]:
    return tuple(relation_class(fan, r) for r in primitive_relations(fan))


def is_extremal(fan: Fan, cls: RelationClass) -> bool:
    """The class spans an extremal ray of the cone of effective curves.

    Decided by exact LP: the class is extremal iff it is not a nonnegative
    combination of the primitive-relation classes that are not proportional
    to it.
    """
    cls.check(fan)
    _require_projective(fan)
    others = [c.entries for c in relation_classes(fan) if any(c.entries) and not _rank_one(c.entries, cls.entries)]
    return find_nonnegative_combination(others, cls.entries) is None


def is_effective(fan: Fan, cls: RelationClass) -> bool:
    """Exact membership in the cone spanned by the primitive-relation classes."""
    cls.check(fan)
    _require_projective(fan)
    gens = [c.entries for c in relation_classes(fan)]
    return find_nonnegative_combination(gens, cls.entries) is not None


def is_contractible(fan: Fan, collection: Sequence[int]) -> bool:
    """Reid's wall condition for the class of a primitive collection.

    For every cone ``nu`` avoiding the collection and the focus with
    ``focus + nu`` a cone, each ``collection - {x} + focus + nu`` must be a
    cone. It is enough to test the largest such ``nu`` inside each maximal
    cone through the focus.
    """
    rel = primitive_relation(fan, collection)
    p = set(rel.collection)
    focus = set(rel.focus)
    for m in fan.cones_containing(rel.focus):
        nu = set(m) - focus - p
        for x in rel.collection:
            if not fan.is_cone((p - {x}) | focus | nu):
                return False
    return True


@dataclass(frozen=True)
class DecompositionTerm:
    relation: PrimitiveRelation
    cls: RelationClass
    multiplicity: int


@dataclass(frozen=True)
class Decomposition:
    target: RelationClass
    terms: tuple[DecompositionTerm, ...]

    def total(self) -> RelationClass:
        out = RelationClass((0,) * len(self.target.entries))
        for t in self.terms:
            out = out + t.cls * t.multiplicity
        return out


class DecompositionError(RuntimeError):
    pass


def decompose_into_contractibles(fan: Fan, cls: RelationClass) -> Optional[Decomposition]:
    """Write an effective class as a positive integer sum of contractible classes.

    With integer ample heights ``h`` every primitive-relation class pairs to
    at least 1 with ``h``, so the total multiplicity is at most ``h . cls``;
    the search below is exhaustive within that bound. Candidates are tried
    with fewest terms (counted with multiplicity) first, then in collection
    order.
    """
    cls.check(fan)
    _require_projective(fan)
    if not is_effective(fan, cls):
        raise DecompositionError("class is not in the cone of effective curves")
    if not any(cls.entries):
        return Decomposition(cls, ())
    h = ample_heights(fan)
    rels = [r for r in primitive_relations(fan) if is_contractible(fan, r.collection)]
    classes = [relation_class(fan, r) for r in rels]
    weights = [sum(a * b for a, b in zip(h, c.entries)) for c in classes]
    budget = sum(a * b for a, b in zip(h, cls.entries))
    assert all(w >= 1 for w in weights)

    for size in range(1, budget + 1):
        for combo in _multisets(len(classes), size, weights, budget):
            total = [0] * fan.n_rays
            for k in combo:
                for i, a in enumerate(classes[k].entries):
                    total[i] += a
            if tuple(total) == cls.entries:
                counts: dict[int, int] = {}
                for k in combo:
                    counts[k] = counts.get(k, 0) + 1
                terms = tuple(DecompositionTerm(rels[k], classes[k], m) for k, m in sorted(counts.items()))
                return Decomposition(cls, terms)
    return None


def _multisets(n: int, size: int, weights: list[int], budget: int):
    """Nondecreasing index tuples of the given size with exact weight ``budget``."""

    def rec(start, left, remaining, prefix):
        if left == 0:
            if remaining == 0:
                yield tuple(prefix)
            return
        for k in range(start, n):
            w = weights[k]
            if w * left > remaining:
                continue
            prefix.append(k)
            yield from rec(k, left - 1, remaining - w, prefix)
            prefix.pop()

    yield from rec(0, size, budget, [])


@dataclass(frozen=True)
class Degree2Decomposition:
    kind: str  # "contractible", "A", "B" or "C"
    witnesses: tuple[PrimitiveRelation, ...]


def classify_degree2_decomposition(fan: Fan, collection: Sequence[int]) -> Degree2Decomposition:
    """Shape of a degree-two relation ``x1 + x2 + x3 = x`` on a Fano 4-fold.

    Non-contractible relations split as two degree-one relations; the split
    is one of

    * ``A``: ``x1 + x = y`` and ``y + x2 + x3 = 2x``
    * ``B``: ``x1 + w = z`` and ``z + x2 + x3 = w + x``
    * ``C``: ``x1 + z + w = 2x`` and ``x + x2 + x3 = z + w``
    """
    if fan.dim != 4:
        raise FanError("degree-two classification applies to 4-dimensional fans")
    rel = primitive_relation(fan, collection)
    if len(rel.collection) != 3 or len(rel.focus) != 1 or rel.coefficients != (1,):
        raise FanError("relation is not of the form x1 + x2 + x3 = x")
    if is_contractible(fan, rel.collection):
        return Degree2Decomposition("contractible", (rel,))
    target = relation_class(fan, rel).entries
    (x,) = rel.focus
    xs = set(rel.collection)
    deg1 = [r for r in primitive_relations(fan) if r.degree == 1]
    found: dict[str, tuple[PrimitiveRelation, PrimitiveRelation]] = {}
    for r1, r2 in itertools.permutations(deg1, 2):
        c1, c2 = relation_class(fan, r1).entries, relation_class(fan, r2).entries
        if tuple(a + b for a, b in zip(c1, c2)) != target:
            continue
        kind = _degree2_kind(r1, r2, x, xs)
        if kind is not None:
            found.setdefault(kind, (r1, r2))
    if not found:
        raise DecompositionError("no split into two degree-one relations")
    if len(found) != 1:
        raise DecompositionError(f"ambiguous decomposition kinds {sorted(found)}")
    ((kind, pair),) = found.items()
    return Degree2Decomposition(kind, pair)


def _degree2_kind(r1: PrimitiveRelation, r2: PrimitiveRelation, x: int, xs: set[int]) -> Optional[str]:
    p1, p2 = set(r1.collection), set(r2.collection)
    f1 = dict(zip(r1.focus, r1.coefficients))
    f2 = dict(zip(r2.focus, r2.coefficients))
    if len(p1) == 2 and len(f1) == 1:
        (x1,) = p1 & xs if len(p1 & xs) == 1 else (None,)
        if x1 is None:
            return None
        (other,) = p1 - {x1}
        (img,) = f1
        rest = xs - {x1}
        if other == x and p2 == rest | {img} and f2 == {x: 2}:
            return "A"
        if other != x and p2 == rest | {img} and f2 == {other: 1, x: 1}:
            return "B"
        return None
    if len(p1) == 3 and f1 == {x: 2}:
        inter = p1 & xs
        if len(inter) != 1:
            return None
        (x1,) = inter
        zw = p1 - {x1}
        if p2 == (xs - {x1}) | {x} and f2 == {k: 1 for k in zw}:
            return "C"
    return None
