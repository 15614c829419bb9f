"""Explicit fan constructions: projective spaces, products, face fans and
the del Pezzo surfaces and 3- and 4-folds used throughout the catalog."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

from . import lattice
from .fan import Fan, FanError, star_subdivide


def projective_space(n: int) -> Fan:
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)] + [tuple([-1] * n)]
    cones = list(itertools.combinations(range(n + 1), n))
    return Fan(n, tuple(rays), tuple(cones))


def product(a: Fan, b: Fan) -> Fan:
    """Product fan; rays of ``a`` come first, padded with zeros."""
    rays = [r + (0,) * b.dim for r in a.rays] + [(0,) * a.dim + r for r in b.rays]
    off = a.n_rays
    cones = [ca + tuple(off + j for j in cb) for ca in a.max_cones for cb in b.max_cones]
    return Fan(a.dim + b.dim, tuple(rays), tuple(cones))


def subdivide_by_vectors(fan: Fan, generator_sets: Sequence[Sequence[Sequence[int]]]) -> Fan:
    """Apply star subdivisions at cones named by their generator vectors."""
    for vecs in generator_sets:
        idx = [fan.ray_index[tuple(v)] for v in vecs]
        fan = star_subdivide(fan, idx)
    return fan


def del_pezzo_surface(k: int) -> Fan:
    """``P^2`` blown up in ``k <= 3`` torus-fixed points."""
    fan = projective_space(2)
    centers = [((1, 0), (0, 1)), ((0, 1), (-1, -1)), ((1, 0), (-1, -1))]
    if not 0 <= k <= 3:
        raise FanError("only 0..3 torus-fixed points can be blown up")
    return subdivide_by_vectors(fan, centers[:k])


def projective_bundle_o_o_o1() -> Fan:
    """``P(O + O + O(1))`` over ``P^1``.

    Fiber rays ``e1, e2, -e1-e2``; base rays ``e3`` and ``-e3 + e1``.
    """
    fiber = [(1, 0, 0), (0, 1, 0), (-1, -1, 0)]
    base = [(0, 0, 1), (1, 0, -1)]
    cones = [(i, j, 3 + b) for i, j in itertools.combinations(range(3), 2) for b in range(2)]
    return Fan(3, tuple(fiber + base), tuple(cones))


def s3_bundle_f() -> Fan:
    """The bundle above with the three fiber 2-cones star subdivided."""
    return subdivide_by_vectors(
        projective_bundle_o_o_o1(),
        [((1, 0, 0), (0, 1, 0)), ((0, 1, 0), (-1, -1, 0)), ((1, 0, 0), (-1, -1, 0))],
    )


def face_fan(vertices: Sequence[Sequence[int]]) -> Fan:
    """Fan over the faces of ``conv(vertices)``, which must contain 0 inside.

    Facets are found by testing every ``n``-subset of vertices for a
    supporting hyperplane ``<a, v> = 1``; each facet must be a simplex.
    """
    verts = [tuple(v) for v in vertices]
    n = len(verts[0])
    cones = set()
    for sub in itertools.combinations(range(len(verts)), n):
        rows = [verts[i] for i in sub]
        if lattice.det(rows) == 0:
            continue
        inv = lattice.inverse(rows)
        normal = [sum(inv[r][c] for c in range(n)) for r in range(n)]
        values = [sum(Fraction(a) * b for a, b in zip(normal, v)) for v in verts]
        if any(x > 1 for x in values):
            continue
        on = tuple(i for i, x in enumerate(values) if x == 1)
        if len(on) != n:
            raise FanError(f"facet through {on} is not a simplex")
        cones.add(on)
    return Fan(n, tuple(verts), tuple(sorted(cones)))


def del_pezzo_v(n: int) -> Fan:
    """Face fan of ``conv(+-e_i, +-(e_1 + ... + e_n))`` for even ``n``."""
    if n % 2:
        raise FanError("del Pezzo variety needs even dimension")
    unit = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    total = tuple([1] * n)
    return face_fan(unit + [lattice.neg(e) for e in unit] + [total, lattice.neg(total)])


def pseudo_del_pezzo_v(n: int) -> Fan:
    """Face fan of ``conv(+-e_i, e_1 + ... + e_n)`` for even ``n``."""
    if n % 2:
        raise FanError("pseudo del Pezzo variety needs even dimension")
    unit = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return face_fan(unit + [lattice.neg(e) for e in unit] + [tuple([1] * n)])


def hirzebruch(a: int) -> Fan:
    return Fan(2, ((1, 0), (0, 1), (-1, a), (0, -1)), ((0, 1), (1, 2), (2, 3), (0, 3)))
