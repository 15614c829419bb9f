import json

import pytest
from hypothesis import given, settings

from conftest import blown_up_fans
from torfan.io import FanFormatError, dumps, fan_from_dict, parse_fan, serialize_fan


@given(blown_up_fans())
@settings(max_examples=30, deadline=None)
def test_round_trip(fan):
    back = fan_from_dict(json.loads(dumps(fan)))
    assert back.rays == fan.rays and back.cone_vectors() == fan.cone_vectors()


def test_file_round_trip(tmp_path):
    from torfan.catalog import catalog

    fan = catalog("F").fan
    serialize_fan(fan, tmp_path / "f.json")
    assert parse_fan(tmp_path / "f.json").same_as(fan)


@pytest.mark.parametrize(
    "doc, message",
    [
        ({"dim": 2, "rays": [[2, 0], [0, 1]], "max_cones": [[0, 1]]}, "non-primitive ray"),
        ({"dim": 2, "rays": [[1, 0], [0, 1]]}, "max_cones"),
        ({"dim": 2, "rays": [[1, 0], [0, 1]], "max_cones": [[0, 1]], "name": "x"}, "unknown key"),
        ({"dim": 3, "rays": [[1, 0], [0, 1]], "max_cones": [[0, 1]]}, "dimension mismatch"),
        ({"dim": 2, "rays": [[1, 0], [0, True]], "max_cones": [[0, 1]]}, "integer"),
        ({"dim": 2, "rays": [[1, 0], [0, 1]], "max_cones": [[0, 4]]}, "out of range"),
        ([1, 2], "JSON object"),
    ],
)
def test_format_errors(doc, message):
    with pytest.raises(FanFormatError, match=message):
        fan_from_dict(doc)


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(FanFormatError, match="malformed"):
        parse_fan(path)
