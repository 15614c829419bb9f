"""Independent floating-point and brute-force oracles used by the tests."""

import itertools

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from torfan.birational import expected_new_rays, type_centers
from torfan.constructions import projective_space
from torfan.fan import locate
from torfan.mori import _walls, relation_classes

TOL = 1e-9


def projective_by_scipy(fan) -> bool:
    """Maximise the smallest wall slack of a support function (float LP)."""
    n = fan.n_rays
    a_ub, b_ub = [], []
    for u, w, wall, coeffs in _walls(fan):
        row = [0.0] * (n + 1)
        row[u] -= 1
        row[w] -= 1
        for j, c in zip(wall, coeffs):
            row[j] += c
        row[n] = 1
        a_ub.append(row)
        b_ub.append(0.0)
    cost = [0.0] * n + [-1.0]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * n + [(None, 1)])
    return res.status == 0 and -res.fun > 1e-7


def _relation_space(fan):
    _, s, vt = np.linalg.svd(np.array(fan.rays, dtype=float).T)
    return vt[int(np.sum(s > TOL)):]


def extremal_by_facets(fan, cls) -> bool:
    """Facet enumeration of the cone of curves.

    A generator spans an extremal ray iff the facets through it cut out a line.
    """
    basis = _relation_space(fan)
    rho = basis.shape[0]
    if rho == 1:
        return True
    pts = np.array([c.entries for c in relation_classes(fan)], dtype=float) @ basis.T
    target = np.array(cls.entries, dtype=float) @ basis.T
    facets = []
    for sub in itertools.combinations(range(len(pts)), rho - 1):
        m = pts[list(sub)]
        if np.linalg.matrix_rank(m, tol=TOL) < rho - 1:
            continue
        normal = np.linalg.svd(m)[2][-1]
        vals = pts @ normal
        if np.all(vals >= -TOL):
            facets.append(normal)
        elif np.all(vals <= TOL):
            facets.append(-normal)
    on = [f for f in facets if abs(f @ target) < TOL]
    return bool(on) and np.linalg.matrix_rank(np.array(on), tol=TOL) == rho - 1


def extremal_by_hull(fan, cls) -> bool:
    """Vertices of the slice ``degree = 1`` of the cone of curves (qhull).

    Needs every generator to have positive degree, which holds on Fano fans.
    """
    basis = _relation_space(fan)
    rho = basis.shape[0]
    if rho == 1:
        return True
    gens = [c for c in relation_classes(fan)]
    assert all(c.degree > 0 for c in gens) and cls.degree > 0
    pts = np.array([np.array(c.entries, dtype=float) / c.degree for c in gens]) @ basis.T
    target = (np.array(cls.entries, dtype=float) / cls.degree) @ basis.T
    # coordinates inside the affine slice
    _, s, vt = np.linalg.svd(pts - pts[0])
    frame = vt[: int(np.sum(s > TOL))]
    assert frame.shape[0] == rho - 1
    local = (pts - pts[0]) @ frame.T
    here = (target - pts[0]) @ frame.T
    if rho == 2:
        coords = local[:, 0]
        return bool(abs(here[0] - coords.min()) < TOL or abs(here[0] - coords.max()) < TOL)
    hull = ConvexHull(local)
    return any(np.allclose(local[v], here, atol=1e-7) for v in hull.vertices)


def p4_type_configurations(codes):
    """Assign subdivision types to distinct maximal cones of P4.

    Yields ``(labelings, centers)`` for every labelling of the chosen cones
    whose combined new rays put, inside each chosen cone, exactly the rays
    its type prescribes. The automorphisms of P4 permute its maximal cones
    transitively, so the cones are fixed as the first ``len(codes)`` ones.
    """
    p4 = projective_space(4)
    cones = [c for c in p4.max_cones][: len(codes)]
    per_cone = []
    for cone, code in zip(cones, codes):
        options = []
        for order in itertools.permutations(cone):
            vec = expected_new_rays(code, [p4.rays[j] for j in order])
            centers = {vec[new]: tuple(vec[g] for g in gens) for gens, new in type_centers(code)}
            options.append((order, centers))
        per_cone.append(options)
    hosts = {}
    for combo in itertools.product(*per_cone):
        union = frozenset().union(*(centers for _, centers in combo))
        ok = True
        for cone, (_, new) in zip(cones, combo):
            inside = set()
            for v in union:
                if v not in hosts:
                    hosts[v] = set(locate(p4, v)[0])
                if hosts[v] <= set(cone):
                    inside.add(v)
            if inside != set(new):
                ok = False
                break
        if ok:
            merged = {}
            for _, centers in combo:
                merged.update(centers)
            yield [order for order, _ in combo], merged


def realise_types(codes):
    """A refinement of P4 whose first maximal cones have the given types, or None."""
    from torfan.birational import build_refinement, classify_subdivision
    from torfan.fan import star_subdivide

    p4 = projective_space(4)
    for _, centers in p4_type_configurations(codes):
        fan = p4
        # largest centers first, as in any blow-up sequence of these types
        for gens in sorted(centers.values(), key=lambda g: -len(g)):
            idx = [fan.ray_index.get(v) for v in gens]
            if None in idx or not fan.is_cone(idx):
                break
            fan = star_subdivide(fan, idx)
        else:
            fmap = build_refinement(fan, p4)
            if [classify_subdivision(fmap, c).type_code for c in p4.max_cones[: len(codes)]] == list(codes):
                return fmap
    return None
