import csv
import json

import numpy as np
import pytest

from zenga import cli_io
from zenga.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, main, parse_grid, parse_params
from zenga.errors import ValidationError
from zenga.estimator import estimate_surface
from zenga.grid import Measure, Provenance, SurfaceGrid
from zenga.models import BivariateSample
from zenga.cli_io import (
    DatasetSpec,
    RunConfig,
    emit_surface,
    fixture_path,
    load_dataset,
    load_surface,
    rescale_unit,
    surface_to_csv,
    surface_to_json,
)


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


# --------------------------------------------------------------------------- loading


def test_load_two_rows(tmp_path):
    p = _write(tmp_path, "d.csv", "x1,x2\n1.0,2.0\n3.0,4.0")
    s = load_dataset(DatasetSpec(p, "x1", "x2"))
    assert s.n == 2 and s.pairs() == [(1.0, 2.0), (3.0, 4.0)]


def test_load_rejects_negative_with_row_number(tmp_path):
    p = _write(tmp_path, "d.csv", "x1,x2\n1.0,2.0\n3.0,-1\n")
    with pytest.raises(ValidationError, match="row 2") as info:
        load_dataset(DatasetSpec(p, "x1", "x2"))
    assert info.value.row == 2


@pytest.mark.parametrize(
    "body, row",
    [("1,2\n3,\n", 2), ("1,2\nabc,4\n", 2), ("nan,2\n", 1), ("1,inf\n", 1), ("0,2\n", 1), ("1,2\n3\n", 2)],
)
def test_load_rejects_bad_entries(tmp_path, body, row):
    p = _write(tmp_path, "d.csv", "x1,x2\n" + body)
    with pytest.raises(ValidationError) as info:
        load_dataset(DatasetSpec(p, "x1", "x2"))
    assert info.value.row == row


def test_load_structural_errors(tmp_path):
    with pytest.raises(ValidationError, match="not found"):
        load_dataset(DatasetSpec(tmp_path / "missing.csv", "x1", "x2"))
    with pytest.raises(ValidationError, match="no data rows"):
        load_dataset(DatasetSpec(_write(tmp_path, "h.csv", "x1,x2\n"), "x1", "x2"))
    with pytest.raises(ValidationError, match="empty"):
        load_dataset(DatasetSpec(_write(tmp_path, "e.csv", ""), "x1", "x2"))
    with pytest.raises(ValidationError, match="column 'z'"):
        load_dataset(DatasetSpec(_write(tmp_path, "c.csv", "x1,x2\n1,2\n"), "x1", "z"))


def test_load_without_header_and_other_delimiter(tmp_path):
    p = _write(tmp_path, "d.tsv", "a;1.5;2\nb;2.5;3\n")
    s = load_dataset(DatasetSpec(p, 1, 2, delimiter=";", has_header=False))
    assert s.pairs() == [(1.5, 2.0), (2.5, 3.0)]


def test_fixture_has_23_rows():
    s = load_dataset(DatasetSpec(fixture_path(), cli_io.FIXTURE_X1, cli_io.FIXTURE_X2))
    assert s.n == 23
    assert len(set(s.x1.tolist())) == 23 and len(set(s.x2.tolist())) == 23


# --------------------------------------------------------------------------- rescaling


def test_rescale_hand_example():
    s, scales = rescale_unit(BivariateSample.from_pairs([(1, 10), (2, 20), (4, 40)]))
    assert s.pairs() == [(0.25, 0.25), (0.5, 0.5), (1.0, 1.0)]
    assert scales == (4.0, 40.0)


def test_rescale_identity_when_max_is_one():
    base = BivariateSample.from_pairs([(0.2, 1.0), (1.0, 0.5)])
    s, scales = rescale_unit(base)
    assert s.pairs() == base.pairs() and scales == (1.0, 1.0)


def test_rescale_report_consistency():
    base = load_dataset(DatasetSpec(fixture_path(), cli_io.FIXTURE_X1, cli_io.FIXTURE_X2))
    s, (a1, a2) = rescale_unit(base)
    np.testing.assert_allclose(s.x1 * a1, base.x1, rtol=1e-12)
    np.testing.assert_allclose(s.x2 * a2, base.x2, rtol=1e-12)


def test_estimates_invariant_to_rescaling():
    base = load_dataset(DatasetSpec(fixture_path(), cli_io.FIXTURE_X1, cli_io.FIXTURE_X2))
    s, _ = rescale_unit(base)
    a = estimate_surface(base, cli_io.DEFAULT_LEVELS)
    b = estimate_surface(s, cli_io.DEFAULT_LEVELS)
    np.testing.assert_allclose(a.values, b.values, atol=1e-12, rtol=0)
    np.testing.assert_allclose(a.values2, b.values2, atol=1e-12, rtol=0)


# --------------------------------------------------------------------------- emission


def _grid_2x2():
    return SurfaceGrid([0.2, 0.8], [0.3, 0.6], [[0.5, np.nan], [0.1, 0.25]], Measure.I, Provenance.EMPIRICAL)


def test_json_shape_with_nulls(tmp_path):
    p = emit_surface(_grid_2x2(), "json", tmp_path / "g.json")
    d = json.loads(p.read_text())
    assert d["measure"] == "I" and d["provenance"] == "empirical"
    assert d["u1"] == [0.2, 0.8] and d["u2"] == [0.3, 0.6]
    assert sum(len(r) for r in d["values"]) == 4
    assert d["values"][0][1] is None


def test_csv_long_3x3_grid(tmp_path):
    s = load_dataset(DatasetSpec(fixture_path(), cli_io.FIXTURE_X1, cli_io.FIXTURE_X2))
    g = estimate_surface(s, [0.2, 0.5, 0.8])
    p = emit_surface(g, "csv_long", tmp_path / "g.csv")
    rows = list(csv.DictReader(p.open()))
    assert len(rows) == 9
    assert list(rows[0]) == ["u1", "u2", "value12", "value21"]


@pytest.mark.parametrize("fmt", ["json", "csv_long"])
def test_round_trip_is_exact(tmp_path, fmt):
    s = load_dataset(DatasetSpec(fixture_path(), cli_io.FIXTURE_X1, cli_io.FIXTURE_X2))
    g = estimate_surface(s, cli_io.DEFAULT_LEVELS)
    back = load_surface(emit_surface(g, fmt, tmp_path / f"g.{fmt}"))
    assert back.measure is Measure.VBZC
    np.testing.assert_array_equal(back.u1_levels, g.u1_levels)
    np.testing.assert_array_equal(back.values, g.values)
    np.testing.assert_array_equal(back.values2, g.values2)


def test_round_trip_keeps_missing_cells(tmp_path):
    g = _grid_2x2()
    for fmt in ("json", "csv_long"):
        back = load_surface(emit_surface(g, fmt, tmp_path / f"g.{fmt}"), measure="I")
        np.testing.assert_array_equal(back.values, g.values)


def test_emission_is_byte_stable():
    g = _grid_2x2()
    assert surface_to_json(g) == surface_to_json(g)
    assert surface_to_csv(g) == "u1,u2,value\n0.2,0.3,0.5\n0.2,0.6,\n0.8,0.3,0.1\n0.8,0.6,0.25\n"


def test_emit_and_load_errors(tmp_path):
    with pytest.raises(ValidationError):
        emit_surface(_grid_2x2(), "xml", tmp_path / "g.xml")
    with pytest.raises(ValidationError):
        load_surface(tmp_path / "none.json")
    with pytest.raises(ValidationError):
        load_surface(_write(tmp_path, "bad.json", "{not json"))
    with pytest.raises(ValidationError):
        load_surface(_write(tmp_path, "bad.csv", "a,b\n1,2\n"))


def test_run_config_invariants(tmp_path):
    with pytest.raises(ValidationError):
        RunConfig(tmp_path, levels=(0.0, 0.5))
    with pytest.raises(ValidationError):
        RunConfig(tmp_path, fmt="yaml")


# --------------------------------------------------------------------------- command line


def test_parse_grid_and_params():
    assert parse_grid("0.2:0.8:0.1") == cli_io.DEFAULT_LEVELS
    assert parse_grid("0.2,0.5") == (0.2, 0.5)
    assert parse_params("alpha=3") == {"alpha": 3.0}
    assert parse_params('{"c": 2}') == {"c": 2.0}
    with pytest.raises(ValidationError):
        parse_grid("0.5,0.2")
    with pytest.raises(ValidationError):
        parse_params("alpha")


def test_cli_estimate_pipeline_is_complete_and_byte_stable(tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["estimate", "--out", str(out), "--quiet"]) == EXIT_OK
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(
        ["surface_VBZC.json", "summary_3x3.csv"] + [f"slice_{f}_{u}.csv" for f in ("u1", "u2") for u in ("0.2", "0.5", "0.8")]
    )
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    g = load_surface(outs[0] / "surface_VBZC.json")
    assert g.values.shape == (7, 7) and g.n_missing == 0
    assert np.all((g.values >= 0) & (g.values <= 1)) and np.all((g.values2 >= 0) & (g.values2 <= 1))
    assert len((outs[0] / "summary_3x3.csv").read_text().splitlines()) == 10


def test_cli_estimate_with_rescale_and_csv(tmp_path):
    src = _write(tmp_path, "d.csv", "a,b\n1,10\n2,30\n3,20\n4,50\n5,40\n6,60\n")
    out = tmp_path / "o"
    code = main(["estimate", "--data", str(src), "--x1-col", "a", "--x2-col", "b", "--rescale", "--grid", "0.2,0.5",
                 "--format", "csv_long", "--out", str(out), "--quiet"])
    assert code == EXIT_OK
    assert json.loads((out / "scales.json").read_text()) == {"x1": 6.0, "x2": 60.0}
    assert (out / "surface_VBZC.csv").exists()


def test_cli_surface_and_slices(tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["surface", "--model", "power", "--params", "b1=2,b2=3", "--measure", "I", "--grid", "0.5", "--out", str(out)]) == 0
    d = json.loads((out / "surface_I.json").read_text())
    assert d["values"][0][0] == pytest.approx(0.997849, abs=1e-6)
    assert "wrote" in capsys.readouterr().out
    assert main(["estimate", "--out", str(out), "--quiet"]) == 0
    assert main(["slices", "--surface", str(out / "surface_VBZC.json"), "--fix", "u2", "--at", "0.5", "--out", str(out), "--quiet"]) == 0
    lines = (out / "slice_u2_0.5.csv").read_text().splitlines()
    assert lines[1] == "u1,value12,value21" and len(lines) == 9


def test_cli_surface_vbzc_with_tolerance(tmp_path):
    out = tmp_path / "v"
    code = main(["surface", "--model", "pareto-unit", "--params", "c=2", "--measure", "VBZC", "--grid", "0.5",
                 "--tol", "1e-12", "--out", str(out), "--quiet"])
    assert code == 0
    d = json.loads((out / "surface_VBZC.json").read_text())
    assert d["values"][0][0] == pytest.approx(0.653454, abs=1e-6)
    assert d["values2"][0][0] == pytest.approx(0.653454, abs=1e-6)


def test_cli_simulate(tmp_path):
    cfg = _write(tmp_path, "mc.json", json.dumps({"replications": 5, "sizes": [50, 100], "oracle_n": 100000, "points": [[0.5, 0.5]]}))
    out = tmp_path / "m"
    assert main(["simulate", "--config", str(cfg), "--seed", "3", "--out", str(out), "--quiet"]) == 0
    rows = list(csv.DictReader((out / "simulation.csv").open()))
    assert len(rows) == 2
    meta = json.loads((out / "simulation_meta.json").read_text())
    assert meta["master_seed"] == 3 and meta["oracle_n"] == 100000


def test_cli_exit_codes(tmp_path, capsys):
    bad = _write(tmp_path, "bad.csv", "x1,x2\n1.0,2.0\n3.0,-1\n")
    out = str(tmp_path / "o")
    assert main(["estimate", "--data", str(bad), "--x1-col", "x1", "--x2-col", "x2", "--out", out]) == EXIT_INPUT
    assert "row 2" in capsys.readouterr().err
    assert main(["surface", "--model", "pareto-shifted", "--params", "alpha=1", "--out", out]) == EXIT_INPUT
    assert main(["surface", "--model", "power", "--params", "gamma=1", "--out", out]) == EXIT_INPUT
    assert main(["surface", "--model", "pareto-unit", "--params", "c=2", "--measure", "Z", "--grid", "0.5", "--out", out]) == EXIT_INPUT
    assert main(["nonsense"]) == EXIT_INPUT
    assert main(["simulate", "--config", str(tmp_path / "none.json"), "--out", out]) == EXIT_INPUT
    ties = _write(tmp_path, "ties.csv", "x1,x2\n1,1\n1,1\n1,1\n")
    assert main(["estimate", "--data", str(ties), "--x1-col", "x1", "--x2-col", "x2", "--grid", "0.5", "--out", out]) == EXIT_NUMERIC
