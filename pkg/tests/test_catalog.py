import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import enumerated
from torfan import lattice
from torfan.catalog import (
    PINNED_NAMES,
    CatalogError,
    build,
    catalog,
    catalog_names,
    enumerate_smooth_fano,
    lattice_isomorphic,
    regenerate,
)
from torfan.constructions import product, projective_space
from torfan.fan import Fan, validate
from torfan.primitive import is_fano, picard_number

unimodular_3 = st.sampled_from(
    [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[1, 2, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 1, 0], [1, 0, 0], [3, -1, 1]],
        [[1, 1, 1], [0, 1, 1], [0, 0, -1]],
        [[2, 1, 0], [1, 1, 0], [0, 4, 1]],
    ]
)


def _transform(fan, matrix):
    return Fan(fan.dim, tuple(lattice.apply(matrix, r) for r in fan.rays), fan.max_cones)


@pytest.mark.parametrize("name", PINNED_NAMES)
def test_pinned_entry_recomputes(name):
    entry = catalog(name)
    assert entry.check() == []
    assert validate(entry.fan).ok
    assert entry.expected["picard"] == picard_number(entry.fan)
    assert entry.expected["fano"] == is_fano(entry.fan)


@pytest.mark.parametrize("name", PINNED_NAMES)
def test_pinned_file_matches_fresh_build(name):
    fresh = build(name)
    pinned = catalog(name)
    assert fresh.fan.cone_vectors() == pinned.fan.cone_vectors()
    assert fresh.expected == pinned.expected


def test_products_compose_on_demand():
    entry = catalog("S3xP1")
    assert entry.expected["picard"] == 5 and entry.fan.same_as(product(catalog("S3").fan, catalog("P1").fan))
    with pytest.raises(CatalogError):
        catalog("nonsense")


def test_catalog_directory_override(tmp_path, monkeypatch):
    monkeypatch.setenv("TORFAN_CATALOG_DIR", str(tmp_path))
    regenerate(tmp_path)
    assert catalog_names() == sorted(PINNED_NAMES)
    doc = json.loads((tmp_path / "P2.json").read_text())
    doc["expected"]["picard"] = 7
    (tmp_path / "P2.json").write_text(json.dumps(doc))
    with pytest.raises(CatalogError, match="picard"):
        catalog("P2")


def test_isomorphism_examples():
    p2 = projective_space(2)
    permuted = Fan(2, tuple(reversed(p2.rays)), ((0, 1), (1, 2), (0, 2)))
    assert lattice_isomorphic(p2, permuted) is not None
    assert lattice_isomorphic(catalog("S2").fan, catalog("S1").fan) is None
    assert lattice_isomorphic(projective_space(2), projective_space(3)) is None


@given(unimodular_3, st.sampled_from(["F", "P1xP2", "bundle", "S3xP1"]))
@settings(max_examples=20, deadline=None)
def test_isomorphism_finds_unimodular_transforms(matrix, name):
    assert abs(lattice.det(matrix)) == 1
    fan = catalog(name).fan
    moved = _transform(fan, matrix)
    found = lattice_isomorphic(fan, moved)
    assert found is not None and abs(lattice.det(found)) == 1
    assert {tuple(lattice.apply(found, r)) for r in fan.rays} == set(moved.rays)
    assert lattice_isomorphic(moved, fan) is not None


def test_isomorphism_is_transitive_on_examples():
    a = catalog("bundle").fan
    b = _transform(a, [[1, 2, 0], [0, 1, 0], [0, 0, 1]])
    c = _transform(b, [[0, 1, 0], [1, 0, 0], [3, -1, 1]])
    assert lattice_isomorphic(a, b) and lattice_isomorphic(b, c) and lattice_isomorphic(a, c)


def test_enumerate_surfaces():
    found = enumerated(2)
    assert len(found) == 5
    assert all(e.expected["picard"] <= 4 and is_fano(e.fan) for e in found)
    known = [catalog(n).fan for n in ("P2", "P1xP1", "S1", "S2", "S3")]
    for fan in known:
        assert sum(lattice_isomorphic(fan, e.fan) is not None for e in found) == 1


def test_enumerate_surfaces_stable_in_larger_box():
    assert len(enumerated(2, 4)) == 5


def test_enumerate_rejects_other_dimensions():
    with pytest.raises(CatalogError):
        enumerate_smooth_fano(4)


@pytest.mark.slow
def test_enumerate_threefolds():
    found = enumerated(3)
    assert len(found) == 18
    assert Counter(e.fan.n_rays for e in found) == {4: 1, 5: 4, 6: 7, 7: 4, 8: 2}
    for e in found:
        assert validate(e.fan).ok and is_fano(e.fan)
    for name in ("P3", "bundle", "F", "S3xP1", "P1xP1xP1", "P1xP2"):
        fan = catalog(name).fan
        assert sum(lattice_isomorphic(fan, e.fan) is not None for e in found) == 1
