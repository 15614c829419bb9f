import pytest
from hypothesis import given, settings

from conftest import blown_up_fans, catalog_fans, fano_catalog_fans
from oracles import extremal_by_facets, extremal_by_hull, projective_by_scipy
from torfan.birational import expected_new_rays
from torfan.catalog import catalog
from torfan.constructions import del_pezzo_surface, projective_space
from torfan.fan import FanError
from torfan.mori import (
    classify_degree2_decomposition,
    decompose_into_contractibles,
    effective_by_criterion,
    is_contractible,
    is_extremal,
    is_projective,
)
from torfan.primitive import RelationClass, primitive_relation, primitive_relations, relation_class


def _labels(name, code):
    fan = catalog(name).fan
    vec = expected_new_rays(code, projective_space(4).rays[:4])
    return fan, {k: fan.ray_index[v] for k, v in vec.items()}


# -- effectiveness and contractibility --------------------------------------


def test_effective_by_criterion_examples():
    s1 = del_pezzo_surface(1)
    assert effective_by_criterion(s1, RelationClass((1, 1, 0, -1)))
    assert effective_by_criterion(projective_space(2), RelationClass((1, 1, 1)))


def test_criterion_on_partner_classes():
    """``(-x) + z = y`` with the ``y`` rays spanning a cone is effective."""
    for name, fan in fano_catalog_fans().items():
        for rel in primitive_relations(fan):
            if rel.focus and fan.is_cone(rel.focus):
                assert effective_by_criterion(fan, relation_class(fan, rel))


def test_contractible_examples():
    s1 = del_pezzo_surface(1)
    assert is_contractible(s1, (0, 1))
    assert is_contractible(projective_space(2), (0, 1, 2))
    fan, lab = _labels("subdiv-14", 14)
    assert not is_contractible(fan, tuple(sorted(lab[k] for k in ("y1", "y2", "y3", "y4"))))


# -- extremality and projectivity -------------------------------------------


def test_extremal_examples():
    p2 = projective_space(2)
    assert is_extremal(p2, RelationClass((1, 1, 1)))
    fan = catalog("Vtilde4").fan
    x = fan.ray_index[(1, 0, 0, 0)]
    mx = fan.ray_index[(-1, 0, 0, 0)]
    cls = relation_class(fan, primitive_relation(fan, (x, mx)))
    assert not is_extremal(fan, cls)


def test_extremal_refuses_non_projective():
    fan = catalog("nonprojective").fan
    cls = relation_class(fan, primitive_relations(fan)[0])
    with pytest.raises(FanError):
        is_extremal(fan, cls)


@pytest.mark.parametrize("name", sorted(n for n, f in fano_catalog_fans().items() if f.dim <= 4))
def test_extremality_agrees_with_oracles(name):
    fan = fano_catalog_fans()[name]
    # facet enumeration is exponential in the Picard number
    use_facets = fan.n_rays - fan.dim <= 5
    for rel in primitive_relations(fan):
        cls = relation_class(fan, rel)
        exact = is_extremal(fan, cls)
        assert exact == extremal_by_hull(fan, cls)
        if use_facets:
            assert exact == extremal_by_facets(fan, cls)
        if rel.degree == 1:
            assert is_extremal(fan, cls)


def test_projectivity_examples():
    assert is_projective(projective_space(4))
    assert not is_projective(catalog("nonprojective").fan)
    assert not projective_by_scipy(catalog("nonprojective").fan)


@pytest.mark.parametrize("name", sorted(catalog_fans()))
def test_projectivity_agrees_with_scipy(name):
    fan = catalog_fans()[name]
    assert is_projective(fan) == projective_by_scipy(fan)
    if name in fano_catalog_fans():
        assert is_projective(fan)


@given(blown_up_fans(bases=("P2", "S3", "P3", "bundle")))
@settings(max_examples=25, deadline=None)
def test_projectivity_agrees_with_scipy_on_blow_ups(fan):
    assert is_projective(fan) == projective_by_scipy(fan)


# -- decompositions ----------------------------------------------------------


def _check_sum(dec):
    total = [0] * len(dec.target.entries)
    for t in dec.terms:
        for i, a in enumerate(t.cls.entries):
            total[i] += t.multiplicity * a
    assert tuple(total) == dec.target.entries
    assert sum(t.multiplicity * t.cls.degree for t in dec.terms) == dec.target.degree


def test_contractible_class_decomposes_to_itself():
    s1 = del_pezzo_surface(1)
    rel = primitive_relation(s1, (0, 1))
    dec = decompose_into_contractibles(s1, relation_class(s1, rel))
    assert [(t.relation, t.multiplicity) for t in dec.terms] == [(rel, 1)]


def test_symmetric_pair_splits_into_partner_relations():
    fan = catalog("Vtilde4").fan
    x, mx = fan.ray_index[(1, 0, 0, 0)], fan.ray_index[(-1, 0, 0, 0)]
    dec = decompose_into_contractibles(fan, relation_class(fan, primitive_relation(fan, (x, mx))))
    _check_sum(dec)
    assert sorted(t.multiplicity for t in dec.terms) == [1, 1]
    p, q = (t.relation for t in dec.terms)
    if mx in p.collection:
        p, q = q, p
    assert x in p.collection and q.collection == tuple(sorted((mx,) + p.focus))


def test_type_14_decomposition():
    fan, lab = _labels("subdiv-14", 14)
    rel = primitive_relation(fan, tuple(sorted(lab[k] for k in ("y1", "y2", "y3", "y4"))))
    dec = decompose_into_contractibles(fan, relation_class(fan, rel))
    _check_sum(dec)
    got = sorted((t.relation.collection, t.relation.focus, t.relation.coefficients) for t in dec.terms)
    want = sorted(
        [
            (tuple(sorted((lab["x1"], lab["y1"]))), (lab["x2"],), (1,)),
            (tuple(sorted((lab["x2"], lab["y2"], lab["y3"], lab["y4"]))), (lab["x1"],), (2,)),
        ]
    )
    assert got == want


@pytest.mark.parametrize("name", ["S3", "F", "V4", "subdiv-10", "subdiv-16", "blowup-2b"])
def test_every_relation_decomposes(name):
    fan = catalog_fans()[name]
    for rel in primitive_relations(fan):
        dec = decompose_into_contractibles(fan, relation_class(fan, rel))
        assert dec is not None
        _check_sum(dec)
        assert all(is_contractible(fan, t.relation.collection) for t in dec.terms)


@pytest.mark.parametrize("code, kind", [(3, "contractible"), (6, "A"), (7, "B")])
def test_degree_two_shapes(code, kind):
    fan, lab = _labels(f"subdiv-{code}", code)
    coll = tuple(sorted(lab[k] for k in ("y1", "y2", "y3")))
    assert classify_degree2_decomposition(fan, coll).kind == kind


def test_degree_two_never_c_on_subdivision_fixtures():
    for code in range(1, 18):
        fan = catalog_fans()[f"subdiv-{code}"]
        for rel in primitive_relations(fan):
            if len(rel.collection) == 3 and rel.coefficients == (1,) and len(rel.focus) == 1:
                assert classify_degree2_decomposition(fan, rel.collection).kind != "C"
