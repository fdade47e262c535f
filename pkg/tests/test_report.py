"""Tests for result rendering."""

import json
import math

import pytest

from tccp.report import format_value, render, to_csv, to_json


def test_format_value():
    """Test cell formatting for each value kind."""
    assert format_value(None) is None
    assert format_value(True) == "true"
    assert format_value(False) == "false"
    assert format_value(7) == "7"
    assert format_value(1 / 3, digits=4) == "0.3333"
    assert format_value(-0.0) == "0"
    assert format_value(math.nan) == "nan"
    assert format_value(-math.inf) == "-inf"
    assert format_value("ok") == "ok"


def test_to_csv():
    """Test header, ordering and empty cells."""
    records = [{"flux": 0.0, "g_eff": 3.5, "zz_exact": None, "valid": True},
               {"flux": 0.1, "g_eff": -1.25, "zz_exact": -0.2, "valid": False}]
    text = to_csv(records)

    assert text.splitlines() == [
        "flux,g_eff,zz_exact,valid",
        "0,3.5,,true",
        "0.1,-1.25,-0.2,false",
    ]
    assert to_csv(records, columns=["valid", "flux"]).splitlines()[1] == "true,0"


def test_to_json():
    """Test that JSON keeps key order and maps non-finite numbers to null."""
    records = [{"name": "Q1", "omega": 5.5912345, "zz": math.nan, "levels": 5}]
    payload = json.loads(to_json(records, digits=3))

    assert list(payload[0]) == ["name", "omega", "zz", "levels"]
    assert payload[0]["omega"] == 5.59
    assert payload[0]["zz"] is None
    assert payload[0]["levels"] == 5


def test_render():
    """Test format dispatch."""
    records = [{"a": 1.0}]
    assert render(records, "csv") == "a\n1\n"
    assert json.loads(render(records, "json")) == [{"a": 1.0}]
    assert render([], "csv") == "\n"
    with pytest.raises(ValueError, match="unknown output format"):
        render(records, "xml")
