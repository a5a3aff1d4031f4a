import hashlib
import json
import math

import pytest
from hypothesis import given, strategies as st

from mejpa.config import load_config, parse_config_text, reference_config_path
from mejpa.errors import ConfigError, ConsistencyError, InvariantError
from mejpa.results import ResultTable, parse_csv, parse_json, read_table, render, write_atomic


def test_reference_config_defaults_only_stray_inductance():
    run = load_config(reference_config_path())
    assert run.defaults_applied == ["design.squid.l_stray"]
    assert run.design.squid.l_stray == 0.0
    assert run.design.transformer.sections[0].z0 == 38.5
    assert run.design.junctions is not None


def test_config_hash_is_sha256_of_bytes(fixtures_dir):
    path = fixtures_dir / "gain.json"
    run = load_config(path)
    assert run.config_sha256 == hashlib.sha256(path.read_bytes()).hexdigest()
    assert run.base_dir == path.resolve().parent


def test_empty_file_reports_line(fixtures_dir):
    with pytest.raises(ConfigError, match="line 1"):
        load_config(fixtures_dir / "err_empty.json")


def test_syntax_error_reports_line():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config_text('{\n "design": {\n  "squid": ,\n }\n}')


def test_unknown_key_reports_path(fixtures_dir):
    with pytest.raises(ConfigError, match=r"schema violation at tune.*flux_step"):
        load_config(fixtures_dir / "err_unknown_key.json")


def test_wrong_type_reports_nested_path(fixtures_dir):
    data = json.loads((fixtures_dir / "gain.json").read_text())
    data["design"]["transformer"]["sections"][1]["z0"] = "sixty-five"
    with pytest.raises(ConfigError, match=r"design\.transformer\.sections\.1\.z0"):
        parse_config_text(json.dumps(data))


def test_invariant_error_names_type(fixtures_dir):
    with pytest.raises(InvariantError, match="SquidParams"):
        load_config(fixtures_dir / "err_invariant.json")


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/mejpa.json")


def test_junction_totals_must_agree(tmp_path):
    data = json.loads(reference_config_path().read_text())
    data["design"]["squid"]["c_total"] = 5e-12
    p = tmp_path / "c.json"
    p.write_text(json.dumps(data))
    with pytest.raises(ConsistencyError, match="c_total"):
        load_config(p)


def test_absent_block_defaults_and_required(fixtures_dir):
    run = load_config(fixtures_dir / "gain.json")
    tune = run.block("tune")
    assert tune["points"] == 201
    assert "tune.points" in run.defaults_applied
    with pytest.raises(ConfigError, match="sweep"):
        run.block("sweep")


def test_sweep_needs_values_or_range(fixtures_dir):
    data = json.loads((fixtures_dir / "gain.json").read_text())
    data["sweep"] = {"path": "squid.c_total", "values": [1e-12], "range": {"start": 1e-12, "stop": 2e-12, "num": 2}}
    with pytest.raises(ConfigError, match="sweep"):
        parse_config_text(json.dumps(data))


def _table():
    return ResultTable(["f", "g", "flag"], ["Hz", "dB", "1"],
                       [[6.5e9, 20.123456789012, True], [7e9, float("nan"), False], [8e9, float("inf"), 0]],
                       {"a": 1, "b": [1.5, None], "c": "x"})


def test_table_invariants():
    with pytest.raises(InvariantError, match="ResultTable"):
        ResultTable(["a", "b"], ["Hz"], [])
    with pytest.raises(InvariantError):
        ResultTable(["a"], ["Hz"], [[1, 2]])
    with pytest.raises(InvariantError):
        ResultTable(["a"], [""], [])


@pytest.mark.parametrize("fmt,parse", [("csv", parse_csv), ("json", parse_json)])
def test_round_trip(fmt, parse):
    t = _table()
    back = parse(render(t, fmt))
    assert back.columns == t.columns and back.units == t.units
    assert back.metadata == t.metadata
    assert back.rows[0][:2] == [6.5e9, float("%.12g" % 20.123456789012) if fmt == "csv" else 20.123456789012]
    assert math.isnan(back.rows[1][1]) and math.isinf(back.rows[2][1])
    assert back.column("flag") == [1.0, 0.0, 0.0]


def test_unknown_format():
    with pytest.raises(ConfigError):
        render(_table(), "xml")


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=20))
def test_csv_keeps_twelve_digits(xs):
    t = ResultTable(["x"], ["1"], [[x] for x in xs])
    back = parse_csv(render(t, "csv"))
    for a, b in zip(xs, back.column("x")):
        assert b == pytest.approx(a, rel=1e-11, abs=0)


def test_write_atomic_replaces_without_residue(tmp_path):
    out = tmp_path / "r.csv"
    out.write_text("old\n")
    write_atomic(out, render(_table(), "csv"))
    assert read_table(out).columns == ["f", "g", "flag"]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["r.csv"]
    write_atomic(tmp_path / "r.json", render(_table(), "json"))
    assert read_table(tmp_path / "r.json").units == ["Hz", "dB", "1"]
