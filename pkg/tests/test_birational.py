import pytest

from conftest import catalog_fans
from oracles import p4_type_configurations, realise_types
from torfan import lattice
from torfan.birational import (
    PROJECTIVE_SPACE_ONLY,
    SUBDIVISION_TYPES,
    RefinementError,
    build_refinement,
    center_partition,
    check_puh,
    classify_subdivision,
    exceptional_sets,
    expected_new_rays,
    factorize,
    parse_relation,
    type_relations,
)
from torfan.catalog import catalog, lattice_isomorphic
from torfan.constructions import del_pezzo_surface, projective_space
from torfan.fan import validate
from torfan.primitive import picard_number

P4 = projective_space(4)
SIGMA = (0, 1, 2, 3)
REFINEMENTS = sorted(n for n in catalog_fans() if n.startswith(("subdiv-", "multi-")))


def _fmap(name):
    entry = catalog(name)
    return build_refinement(entry.fan, entry.target)


def test_identity_refinement():
    fmap = build_refinement(P4, P4)
    assert fmap.new_rays == () and all(len(c) == 1 for c in fmap.ray_to_cone)
    assert factorize(fmap) == []


def test_non_refinements_are_rejected():
    with pytest.raises(RefinementError, match="missing"):
        build_refinement(P4, catalog("V4").fan)
    with pytest.raises(RefinementError, match="dimensions"):
        build_refinement(projective_space(3), P4)
    # a flop: same rays, different cones
    s1 = del_pezzo_surface(1)
    with pytest.raises(RefinementError):
        build_refinement(projective_space(2), s1)


def test_blow_up_of_plane_point():
    fmap = build_refinement(del_pezzo_surface(1), projective_space(2))
    (z,) = fmap.new_rays
    assert fmap.source.rays[z] == (1, 1) and fmap.ray_to_cone[z] == (0, 1)
    part = center_partition(fmap, (0, 1))
    assert [fmap.source.rays[i] for i in part.cone] == [(1, 1)] and part.blocks == ((0, 1),)


def test_partition_of_type_5():
    fmap = _fmap("subdiv-5")
    part = center_partition(fmap, SIGMA)
    assert sorted(part.blocks) == [(0, 1), (2, 3)]


def test_partition_of_type_1_is_singletons():
    part = center_partition(_fmap("subdiv-1"), SIGMA)
    assert sorted(part.blocks) == [(0,), (1,), (2,), (3,)]


@pytest.mark.parametrize("name", REFINEMENTS)
def test_partition_exists_for_every_target_cone(name):
    fmap = _fmap(name)
    for tau in fmap.target.faces:
        part = center_partition(fmap, tau)
        total = lattice.add(*fmap.target.generators(tau)) if tau else (0,) * 4
        got = lattice.add(*fmap.source.generators(part.cone)) if part.cone else (0,) * 4
        assert got == total


def test_exceptional_sets_of_point_blow_up():
    fmap = _fmap("subdiv-4")
    ex = exceptional_sets(fmap, SIGMA)
    assert [fmap.source.rays[i] for i in ex.g_set] == [(1, 1, 1, 1)]
    assert [fmap.source.rays[i] for i in ex.h_set] == [(-1, -1, -1, -1)]


def test_exceptional_sets_of_type_14():
    fmap = _fmap("subdiv-14")
    ex = exceptional_sets(fmap, SIGMA)
    assert len(ex.g_set) == 2 and len(ex.h_set) == 1


def test_exceptional_sets_of_zero_cone():
    fmap = _fmap("subdiv-10")
    ex = exceptional_sets(fmap, ())
    assert ex.h_set == () and len(ex.g_set) == fmap.source.n_rays


@pytest.mark.parametrize("name", REFINEMENTS)
def test_exceptional_sets_hold_on_every_cone(name):
    fmap = _fmap(name)
    for eta in fmap.target.faces:
        exceptional_sets(fmap, eta)


@pytest.mark.parametrize("name", REFINEMENTS)
def test_picard_drop(name):
    fmap = _fmap(name)
    entries = check_puh(fmap)
    assert len(entries) == len(fmap.new_rays)
    assert all(0 <= e.drop <= 3 for e in entries)


def test_point_image_of_type_4():
    (entry,) = check_puh(_fmap("subdiv-4"))
    assert entry.point_image and entry.drop == 1 and entry.image_cone == SIGMA


def test_parse_relation():
    assert parse_relation("y2+y3+x2=2x1") == (("x2", "y2", "y3"), (("x1", 2),))
    with pytest.raises(ValueError):
        parse_relation("2y1=x1")


@pytest.mark.parametrize("code", sorted(SUBDIVISION_TYPES))
def test_every_type_is_recognised(code):
    fmap = _fmap(f"subdiv-{code}")
    rep = classify_subdivision(fmap, SIGMA)
    assert rep.type_code == code
    assert sorted(parse_relation(r) for r in rep.relations) == type_relations(code)
    vec = expected_new_rays(code, P4.rays[:4])
    assert {fmap.source.rays[i] for i in fmap.new_rays} == {v for k, v in vec.items() if k.startswith("x")}
    # lower-dimensional centers also subdivide neighbouring cones
    for other in fmap.target.max_cones:
        assert classify_subdivision(fmap, other).type_code in SUBDIVISION_TYPES
    if code in PROJECTIVE_SPACE_ONLY:
        assert picard_number(fmap.target) == 1
        assert lattice_isomorphic(fmap.target, P4) is not None


def test_type_17_details():
    rep = classify_subdivision(_fmap("subdiv-17"), SIGMA)
    assert rep.center_labels == ("<y1,y2,y3,y4>", "<y1,y2>", "<x1,x2>")
    assert len(rep.centers) == 3 and [len(c) for c in rep.centers] == [4, 2, 2]


def test_classify_rejects_non_maximal_cone():
    with pytest.raises(RefinementError):
        classify_subdivision(_fmap("subdiv-2"), (0, 1))


def test_generalized_classification_outside_dimension_four():
    fmap = build_refinement(del_pezzo_surface(1), projective_space(2))
    rep = classify_subdivision(fmap, (0, 1))
    assert rep.generalized and rep.type_code is None and len(rep.centers) == 1


def test_factorize_plane_point():
    steps = factorize(build_refinement(del_pezzo_surface(1), projective_space(2)))
    assert len(steps) == 1 and steps[0].new_ray == (1, 1)


@pytest.mark.parametrize("name", REFINEMENTS)
def test_factorize_rebuilds_source(name):
    fmap = _fmap(name)
    steps = factorize(fmap)
    assert len(steps) == len(fmap.new_rays)
    dims = [len(s.center) for s in steps]
    assert dims == sorted(dims, reverse=True)
    for s in steps:
        assert validate(s.fan).ok
    end = steps[-1].fan if steps else fmap.target
    assert end.cone_vectors() == fmap.source.cone_vectors()


def test_factorize_center_dimensions():
    assert [len(s.center) for s in factorize(_fmap("subdiv-15"))] == [4, 3, 2]
    assert len(factorize(_fmap("multi-5+2"))) == 2
    assert len(factorize(_fmap("multi-10+2"))) == 4


@pytest.mark.parametrize("codes", [(2, 5), (10, 2), (2, 2), (10, 7)])
def test_type_configuration_search_finds_realisable_pairs(codes):
    fmap = realise_types(codes)
    assert fmap is not None
    steps = factorize(fmap)
    assert len(steps) == len(fmap.new_rays)
    assert steps[-1].fan.cone_vectors() == fmap.source.cone_vectors()


def test_types_five_and_ten_never_share_p4():
    assert next(p4_type_configurations((5, 10)), None) is None
    assert realise_types((5, 10)) is None
