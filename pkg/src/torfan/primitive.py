"""Primitive collections, primitive relations and their curve classes."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Sequence

from . import lattice
from .fan import Cone, Fan, FanError, divisor_fan, locate, require_smooth_complete


@dataclass(frozen=True)
class PrimitiveRelation:
    """``sum(collection) == sum(coefficients[i] * focus[i])``."""

    collection: Cone
    focus: Cone
    coefficients: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.collection) - sum(self.coefficients)

    def describe(self, fan: Fan) -> str:
        lhs = " + ".join(str(list(fan.rays[i])) for i in self.collection)
        rhs = " + ".join(
            (f"{a}*" if a != 1 else "") + str(list(fan.rays[i])) for i, a in zip(self.focus, self.coefficients)
        )
        return f"{lhs} = {rhs or '0'}"


@dataclass(frozen=True)
class RelationClass:
    """Integer vector indexed by the rays of a fan, summing the rays to zero."""

    entries: tuple[int, ...]

    @property
    def degree(self) -> int:
        return sum(self.entries)

    def __add__(self, other: "RelationClass") -> "RelationClass":
        return RelationClass(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __mul__(self, k: int) -> "RelationClass":
        return RelationClass(tuple(k * a for a in self.entries))

    __rmul__ = __mul__

    def negative_support(self) -> Cone:
        return tuple(i for i, a in enumerate(self.entries) if a < 0)

    def check(self, fan: Fan) -> None:
        if len(self.entries) != fan.n_rays:
            raise FanError(f"class has {len(self.entries)} entries, fan has {fan.n_rays} rays")
        if any(lattice.combination(self.entries, fan.rays, fan.dim)):
            raise FanError("class entries do not sum the rays to zero")


@functools.lru_cache(maxsize=2048)
def primitive_collections(fan: Fan) -> tuple[Cone, ...]:
    """Minimal non-faces, sorted by size then lexicographically.

    Candidates of size ``k`` are built from faces of size ``k - 1`` and kept
    only when every ``(k-1)``-subset is a face. A set of more than ``n + 1``
    rays always contains a non-face of size at most ``n + 1`` (its ``n + 1``
    element subsets cannot all be cones), so growth stops there.
    """
    require_smooth_complete(fan)
    faces = fan.faces
    out: list[Cone] = []
    layer = sorted(c for c in faces if len(c) == 1)
    for size in range(2, fan.dim + 2):
        found = set()
        for base in layer:
            for j in range(base[-1] + 1, fan.n_rays):
                cand = base + (j,)
                if cand in faces or cand in found:
                    continue
                if all(sub in faces for sub in itertools.combinations(cand, size - 1)):
                    found.add(cand)
        out.extend(sorted(found))
        layer = sorted(c for c in faces if len(c) == size)
    return tuple(out)


def primitive_collections_bruteforce(fan: Fan) -> tuple[Cone, ...]:
    """Reference enumeration over every subset of up to ``n + 1`` rays."""
    faces = fan.faces
    out = []
    for size in range(1, fan.dim + 2):
        for cand in itertools.combinations(range(fan.n_rays), size):
            if cand not in faces and all(s in faces for s in itertools.combinations(cand, size - 1)):
                out.append(cand)
    return tuple(out)


def primitive_relation(fan: Fan, collection: Sequence[int]) -> PrimitiveRelation:
    collection = tuple(sorted(collection))
    total = lattice.add(*fan.generators(collection))
    cone, coeffs = locate(fan, total)
    if any(not isinstance(a, int) for a in coeffs):  # pragma: no cover - smooth fans give integers
        raise FanError("non-integral primitive relation; fan is not smooth")
    return PrimitiveRelation(collection, cone, tuple(coeffs))


@functools.lru_cache(maxsize=2048)
def primitive_relations(fan: Fan) -> tuple[PrimitiveRelation, ...]:
    return tuple(primitive_relation(fan, p) for p in primitive_collections(fan))


def relation_class(fan: Fan, relation: PrimitiveRelation) -> RelationClass:
    entries = [0] * fan.n_rays
    for i in relation.collection:
        entries[i] += 1
    for i, a in zip(relation.focus, relation.coefficients):
        entries[i] -= a
    cls = RelationClass(tuple(entries))
    assert cls.degree == relation.degree
    return cls


def is_fano(fan: Fan) -> bool:
    """Every primitive relation has positive degree."""
    return all(r.degree >= 1 for r in primitive_relations(fan))


def picard_number(fan: Fan) -> int:
    require_smooth_complete(fan)
    return fan.n_rays - fan.dim


def rho_diff(fan: Fan, ray_index: int) -> int:
    """Order-two primitive collections through the ray.

    Equals the drop in Picard number from the variety to the invariant
    divisor of the ray; both computations are made and compared.
    """
    count = sum(1 for p in primitive_collections(fan) if len(p) == 2 and ray_index in p)
    direct = picard_number(fan) - picard_number(divisor_fan(fan, ray_index))
    if direct != count:  # pragma: no cover - would be a bug in the fan code
        raise AssertionError(f"rho_diff mismatch: {count} collections vs {direct} from divisor fan")
    return count
