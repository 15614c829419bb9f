"""Simplicial lattice fans and fan surgery.

A :class:`Fan` is just rays plus maximal cones given as index tuples. All
geometry (membership, expansions, smoothness) is decided with exact integer
or rational arithmetic.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb
from typing import Optional, Sequence

from . import lattice
from .lattice import Vector

Cone = tuple[int, ...]


class FanError(ValueError):
    """Raised for malformed fans or violated preconditions."""


@dataclass(frozen=True)
class Fan:
    """A fan of simplicial cones in ``Z^dim``.

    ``rays`` are primitive integer vectors; ``max_cones`` are sorted index
    tuples into ``rays``. Construction only checks structure (index ranges,
    zero or non-primitive rays, duplicates); use :func:`validate` for the
    geometric conditions.
    """

    dim: int
    rays: tuple[Vector, ...]
    max_cones: tuple[Cone, ...]

    def __post_init__(self):
        rays = tuple(tuple(int(c) for c in r) for r in self.rays)
        cones = tuple(tuple(sorted(int(i) for i in c)) for c in self.max_cones)
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "max_cones", cones)
        if self.dim < 0:
            raise FanError(f"dimension must be nonnegative, got {self.dim}")
        for k, r in enumerate(rays):
            if len(r) != self.dim:
                raise FanError(f"ray {k} has length {len(r)}, expected {self.dim}")
            if not any(r):
                raise FanError(f"ray {k} is zero")
            if not lattice.is_primitive(r):
                raise FanError(f"ray {k} {r} is non-primitive")
        if len(set(rays)) != len(rays):
            raise FanError("duplicate rays")
        for k, c in enumerate(cones):
            if len(set(c)) != len(c):
                raise FanError(f"cone {k} repeats a ray index")
            for i in c:
                if not 0 <= i < len(rays):
                    raise FanError(f"cone {k} references ray {i} out of range")

    # -- combinatorics -------------------------------------------------

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    @cached_property
    def ray_index(self) -> dict[Vector, int]:
        return {r: i for i, r in enumerate(self.rays)}

    @cached_property
    def faces(self) -> frozenset[Cone]:
        """Every cone of the fan, the zero cone ``()`` included."""
        out = set()
        for c in self.max_cones:
            for k in range(len(c) + 1):
                out.update(itertools.combinations(c, k))
        return frozenset(out)

    def is_cone(self, indices) -> bool:
        return tuple(sorted(indices)) in self.faces

    def cones_containing(self, indices) -> list[Cone]:
        s = set(indices)
        return [c for c in self.max_cones if s.issubset(c)]

    def neighbors(self, i: int) -> list[int]:
        """Rays ``j != i`` with ``<i, j>`` a cone."""
        out = set()
        for c in self.max_cones:
            if i in c:
                out.update(c)
        out.discard(i)
        return sorted(out)

    def generators(self, cone) -> list[Vector]:
        return [self.rays[i] for i in cone]

    @cached_property
    def _inverses(self) -> tuple[Optional[list[list]], ...]:
        """Inverse generator matrix per maximal cone (``None`` if singular)."""
        out = []
        for c in self.max_cones:
            if len(c) != self.dim:
                out.append(None)
                continue
            cols = [[self.rays[i][r] for i in c] for r in range(self.dim)]
            try:
                inv = lattice.inverse(cols)
            except ValueError:
                out.append(None)
                continue
            if all(x.denominator == 1 for row in inv for x in row):
                inv = [[int(x) for x in row] for row in inv]
            out.append(inv)
        return tuple(out)

    def coordinates(self, k: int, p: Sequence[int]) -> list:
        """Coordinates of ``p`` in the generators of maximal cone ``k``."""
        inv = self._inverses[k]
        if inv is None:
            raise FanError(f"maximal cone {k} is not full-dimensional and independent")
        return [sum(a * b for a, b in zip(row, p)) for row in inv]

    # -- identity ------------------------------------------------------

    def canonical(self) -> "Fan":
        """Same fan with rays sorted lexicographically and cones sorted."""
        order = sorted(range(len(self.rays)), key=lambda i: self.rays[i])
        new = {old: k for k, old in enumerate(order)}
        cones = sorted(tuple(sorted(new[i] for i in c)) for c in self.max_cones)
        return Fan(self.dim, tuple(self.rays[i] for i in order), tuple(cones))

    def same_as(self, other: "Fan") -> bool:
        """Structural equality up to reordering of rays and cones."""
        if self.dim != other.dim or len(self.rays) != len(other.rays):
            return False
        a, b = self.canonical(), other.canonical()
        return a.rays == b.rays and a.max_cones == b.max_cones

    def cone_vectors(self) -> frozenset[frozenset[Vector]]:
        return frozenset(frozenset(self.rays[i] for i in c) for c in self.max_cones)


# -- validation ------------------------------------------------------------


@dataclass
class ValidationReport:
    smooth: bool
    complete: bool
    fan_condition: bool
    defects: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.smooth and self.complete and self.fan_condition


@functools.lru_cache(maxsize=4096)
def validate(fan: Fan) -> ValidationReport:
    """Check smoothness, completeness and the fan condition.

    Completeness is the combinatorial condition: every wall (codimension-one
    face of a maximal cone) lies in exactly two maximal cones and the
    wall-adjacency graph is connected. For such fans the fan condition is
    certified by checking that the two cones at each wall lie on opposite
    sides of it and that a generic point is covered exactly once; otherwise
    (and to locate offending pairs) every pair of maximal cones is tested by
    exact LP.
    """
    n = fan.dim
    defects: list[str] = []
    if n == 0:
        ok = fan.max_cones == ((),)
        if not ok:
            defects.append("a zero-dimensional fan has exactly the zero cone")
        return ValidationReport(ok, ok, ok, defects)
    smooth = True
    full = True
    for k, c in enumerate(fan.max_cones):
        if len(c) != n:
            smooth = full = False
            defects.append(f"maximal cone {k} {c} has {len(c)} generators, expected {n}")
            continue
        d = lattice.det(fan.generators(c))
        if d == 0:
            smooth = full = False
            defects.append(f"maximal cone {k} {c} is degenerate (det 0)")
        elif abs(d) != 1:
            smooth = False
            defects.append(f"maximal cone {k} {c} is singular (det {d})")

    walls: dict[Cone, list[int]] = {}
    if full:
        for k, c in enumerate(fan.max_cones):
            for w in itertools.combinations(c, n - 1):
                walls.setdefault(w, []).append(k)
    complete = full and bool(fan.max_cones)
    for w, ks in sorted(walls.items()):
        if len(ks) != 2:
            complete = False
            defects.append(f"wall {w} lies in {len(ks)} maximal cone(s)")
    if complete and not _connected(len(fan.max_cones), walls.values()):
        complete = False
        defects.append("wall adjacency graph is disconnected")

    fan_ok = True
    if full:
        certified = False
        if complete:
            opposite = True
            for w, (a, b) in sorted(walls.items()):
                if not _opposite_sides(fan, w, a, b):
                    opposite = False
                    defects.append(f"maximal cones {a} and {b} lie on the same side of wall {w}")
            certified = opposite and _generic_cover_count(fan) == 1
        if not certified:
            bad = _overlapping_pairs(fan)
            for a, b in bad:
                defects.append(f"maximal cones {a} and {b} meet outside a common face")
            fan_ok = not bad and not (complete and not certified)
            if complete and not certified and not bad:
                defects.append("maximal cones do not cover space exactly once")
    else:
        fan_ok = False
    return ValidationReport(smooth=smooth, complete=complete, fan_condition=fan_ok, defects=defects)


def _connected(nodes: int, edges) -> bool:
    parent = list(range(nodes))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for ks in edges:
        for a, b in zip(ks, ks[1:]):
            parent[find(a)] = find(b)
    return len({find(a) for a in range(nodes)}) <= 1


def _opposite_sides(fan: Fan, wall: Cone, a: int, b: int) -> bool:
    (u,) = set(fan.max_cones[a]) - set(wall)
    (w,) = set(fan.max_cones[b]) - set(wall)
    base = fan.generators(wall)
    da = lattice.det(base + [fan.rays[u]])
    db = lattice.det(base + [fan.rays[w]])
    return da * db < 0


def _generic_cover_count(fan: Fan) -> int:
    n = fan.dim
    gens = fan.generators(fan.max_cones[0])
    for attempt in range(1, 200):
        weights = [1 + ((i + 1) * (attempt * 37 + 11)) % 101 for i in range(n)]
        p = lattice.combination(weights, gens, n)
        count = 0
        generic = True
        for k in range(len(fan.max_cones)):
            coords = fan.coordinates(k, p)
            if any(c < 0 for c in coords):
                continue
            if any(c == 0 for c in coords):
                generic = False
                break
            count += 1
        if generic:
            return count
    raise FanError("could not find a generic point")  # pragma: no cover


def _overlapping_pairs(fan: Fan) -> list[tuple[int, int]]:
    from .lp import LPProblem

    bad = []
    for a, b in itertools.combinations(range(len(fan.max_cones)), 2):
        ca, cb = fan.max_cones[a], fan.max_cones[b]
        common = set(ca) & set(cb)
        lp = LPProblem()
        av = {i: lp.add_variable(f"a{i}") for i in ca}
        bv = {j: lp.add_variable(f"b{j}") for j in cb}
        for r in range(fan.dim):
            coeffs = {av[i]: fan.rays[i][r] for i in ca}
            for j in cb:
                coeffs[bv[j]] = -fan.rays[j][r]
            lp.add_constraint(coeffs, "==", 0)
        lp.add_constraint({av[i]: 1 for i in ca if i not in common}, ">=", 1)
        if lp.solve() is not None:
            bad.append((a, b))
    return bad


def require_smooth_complete(fan: Fan) -> None:
    rep = validate(fan)
    if not rep.ok:
        raise FanError("fan is not smooth and complete: " + "; ".join(rep.defects[:3]))


# -- point location --------------------------------------------------------


def locate(fan: Fan, p: Sequence[int]) -> tuple[Cone, tuple]:
    """Minimal cone containing ``p`` in its relative interior.

    Returns the cone and the positive coefficients of ``p`` in its
    generators (ints for smooth fans). ``p = 0`` gives ``((), ())``.
    """
    if not validate(fan).complete:
        raise FanError("locate requires a complete fan")
    p = tuple(p)
    if len(p) != fan.dim:
        raise FanError(f"point has length {len(p)}, expected {fan.dim}")
    if not any(p):
        return (), ()
    for k, c in enumerate(fan.max_cones):
        coords = fan.coordinates(k, p)
        if all(x >= 0 for x in coords):
            pairs = [(i, x) for i, x in zip(c, coords) if x != 0]
            return tuple(i for i, _ in pairs), tuple(_norm(x) for _, x in pairs)
    raise FanError(f"point {p} is not covered by the fan")  # pragma: no cover


def _norm(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x


# -- surgery ---------------------------------------------------------------


def star_subdivide(fan: Fan, tau: Sequence[int]) -> Fan:
    """Star subdivision at ``tau``: the equivariant blow-up of ``V(tau)``.

    The new ray ``sum(tau)`` is appended after the existing rays.
    """
    tau = tuple(sorted(tau))
    if len(tau) < 2:
        raise FanError(f"center {tau} must have dimension at least 2")
    if tau not in fan.faces:
        raise FanError(f"center {tau} is not a cone of the fan")
    v = lattice.add(*fan.generators(tau))
    if v in fan.ray_index:  # pragma: no cover - impossible for simplicial fans
        raise FanError(f"new ray {v} already present")
    m = len(fan.rays)
    ts = set(tau)
    cones = []
    for c in fan.max_cones:
        if ts.issubset(c):
            for t in tau:
                cones.append(tuple(sorted((set(c) - {t}) | {m})))
        else:
            cones.append(c)
    return Fan(fan.dim, fan.rays + (v,), tuple(cones))


def blow_down(fan: Fan, ray_index: int, center: Optional[Sequence[int]] = None) -> tuple[Fan, Cone]:
    """Inverse of :func:`star_subdivide` at ``ray_index``.

    Finds a set ``tau`` of rays summing to the given ray such that removing
    the ray and merging its star yields a fan whose star subdivision at
    ``tau`` is ``fan`` again. ``center`` (indices in ``fan``) forces the
    choice of ``tau``. Returns the coarse fan and ``tau`` in its indexing;
    rays after ``ray_index`` shift down by one.

    Across a flop the same fan can be a star subdivision of two coarse
    fans; without ``center`` the candidate with the smallest ``tau`` wins.
    :func:`blow_downs` lists them all.
    """
    found = blow_downs(fan, ray_index, center, first_only=True)
    if not found:
        raise FanError(f"not blow-downable at ray {ray_index}")
    return found[0]


def blow_downs(
    fan: Fan, ray_index: int, center: Optional[Sequence[int]] = None, first_only: bool = False
) -> list[tuple[Fan, Cone]]:
    """Every valid ``(coarse, tau)`` for :func:`blow_down`, ordered by ``tau``."""
    n = fan.dim
    i = ray_index
    if not 0 <= i < len(fan.rays):
        raise FanError(f"ray index {i} out of range")
    v = fan.rays[i]
    star = [c for c in fan.max_cones if i in c]
    others = [c for c in fan.max_cones if i not in c]
    if center is not None:
        candidates = [tuple(sorted(center))]
    else:
        nbrs = fan.neighbors(i)
        candidates = []
        for k in range(2, n + 1):
            for t in itertools.combinations(nbrs, k):
                if lattice.add(*fan.generators(t)) == v:
                    candidates.append(t)
    remap = {j: (j if j < i else j - 1) for j in range(len(fan.rays)) if j != i}
    rays = fan.rays[:i] + fan.rays[i + 1:]
    out: list[tuple[Fan, Cone]] = []
    for t in candidates:
        if i in t or lattice.add(*fan.generators(t)) != v:
            continue
        merged = set()
        ok = True
        for c in star:
            new = (set(c) - {i}) | set(t)
            if len(new) != n:
                ok = False
                break
            merged.add(tuple(sorted(remap[j] for j in new)))
        if not ok:
            continue
        cones = sorted(merged | {tuple(remap[j] for j in c) for c in others})
        coarse = Fan(n, rays, tuple(cones))
        tau = tuple(sorted(remap[j] for j in t))
        try:
            again = star_subdivide(coarse, tau)
        except FanError:
            continue
        if again.same_as(fan):
            out.append((coarse, tau))
            if first_only:
                break
    return out


def star_quotient(fan: Fan, cone: Sequence[int]) -> tuple[Fan, tuple[int, ...]]:
    """Fan of the orbit closure ``V(cone)`` in ``N / span(cone)``.

    A maximal cone gives the zero-dimensional fan of a point.

    Returns the quotient fan and, for each of its rays, the index of the
    ray of ``fan`` it comes from.
    """
    cone = tuple(sorted(cone))
    if cone not in fan.faces:
        raise FanError(f"{cone} is not a cone of the fan")
    k = len(cone)
    q = lattice.quotient_map(fan.generators(cone), fan.dim)
    star = fan.cones_containing(cone)
    old = sorted({j for c in star for j in c} - set(cone))
    new = {j: t for t, j in enumerate(old)}
    rays = tuple(lattice.apply(q, fan.rays[j]) for j in old)
    cones = tuple(sorted(tuple(sorted(new[j] for j in c if j not in cone)) for c in star))
    return Fan(fan.dim - k, rays, cones), tuple(old)


def divisor_fan(fan: Fan, ray_index: int) -> Fan:
    """Fan of the invariant divisor ``V(x)`` for ``x = rays[ray_index]``."""
    require_smooth_complete(fan)
    return star_quotient(fan, (ray_index,))[0]


def orbit_picard_number(fan: Fan, cone: Sequence[int]) -> int:
    """Picard number of ``V(cone)``: star rays minus the quotient rank."""
    cone = tuple(sorted(cone))
    if cone not in fan.faces:
        raise FanError(f"{cone} is not a cone of the fan")
    star = fan.cones_containing(cone)
    nbrs = {j for c in star for j in c} - set(cone)
    return len(nbrs) - (fan.dim - len(cone))


# -- f-vectors ---------------------------------------------------------------


def f_vector(fan: Fan) -> tuple[int, ...]:
    """``f[i]`` = number of ``(i+1)``-dimensional cones."""
    counts = [0] * fan.dim
    for c in fan.faces:
        if c:
            counts[len(c) - 1] += 1
    return tuple(counts)


@dataclass
class FVectorReport:
    dim: int
    f: tuple[int, ...]
    fano: bool
    ds5: Optional[bool]
    batyrev: Optional[bool]
    spade: Optional[bool]
    manu_hypothesis: bool
    manu_bound: Optional[bool]
    notes: list[str] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(x is not False for x in (self.ds5, self.batyrev, self.spade, self.manu_bound))


def fvector_checks(fan: Fan) -> FVectorReport:
    """f-vector relations for smooth complete (and, where needed, Fano) fans.

    * ``ds5``: the three Dehn-Sommerville equations in dimension 5.
    * ``batyrev``: ``12 f[n-3] >= (3n-4) f[n-2]``, Fano fans with ``n >= 3``.
    * ``spade``: ``7 f[1] <= 45 (f[0] - 2)``, Fano fans in dimension 5.
    * ``manu_bound``: at most ``3/4 f[0]`` primitive collections of order two,
      evaluated only when the order-two pattern hypothesis holds.
    """
    from .primitive import is_fano, primitive_collections

    require_smooth_complete(fan)
    n = fan.dim
    f = f_vector(fan)
    fano = is_fano(fan)
    notes: list[str] = []

    ds5 = spade = None
    if n == 5:
        ds5 = (
            f[2] == 4 * f[1] - 10 * f[0] + 20
            and f[3] == 5 * f[1] - 15 * f[0] + 30
            and f[4] == 2 * f[1] - 6 * f[0] + 12
        )
    batyrev = None
    if n >= 3:
        if fano:
            batyrev = 12 * f[n - 3] >= (3 * n - 4) * f[n - 2]
        else:
            notes.append("batyrev: skipped, fan is not Fano")
    if n == 5:
        if fano:
            spade = 7 * f[1] <= 45 * (f[0] - 2)
        else:
            notes.append("spade: skipped, fan is not Fano")

    pairs = [p for p in primitive_collections(fan) if len(p) == 2]
    assert len(pairs) == comb(f[0], 2) - f[1]
    hyp = _manu_hypothesis(fan, pairs)
    manu = None
    if not fano:
        notes.append("manu_bound: skipped, fan is not Fano")
    elif hyp:
        manu = 4 * (comb(f[0], 2) - f[1]) <= 3 * f[0]
    else:
        notes.append("manu_bound: hypothesis fails (order-two collection pattern), bound not applicable")
    return FVectorReport(n, f, fano, ds5, batyrev, spade, hyp, manu, notes)


def _manu_hypothesis(fan: Fan, pairs) -> bool:
    by_ray: dict[int, list[int]] = {}
    for a, b in pairs:
        by_ray.setdefault(a, []).append(b)
        by_ray.setdefault(b, []).append(a)
    for x, partners in by_ray.items():
        if len(partners) > 2:
            return False
        if len(partners) == 2:
            vx = fan.rays[x]
            mx = lattice.neg(vx)
            if mx not in fan.ray_index or fan.ray_index[mx] not in partners:
                return False
            (y,) = [p for p in partners if fan.rays[p] != mx]
            vy = fan.rays[y]
            if lattice.neg(vy) in fan.ray_index or lattice.neg(lattice.add(vx, vy)) in fan.ray_index:
                return False
    return True
