import json
import math

import pytest

from speclab import __version__
from speclab.cli import main, zoo_list
from speclab.errors import ConfigInvalid
from speclab.runner import ResultTable, dumps_table, loads_table, parse_config, run


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


NAYAK = {"experiment": "nayak-limit", "operator": {"matrix": [[0.9, 0], [0, 0.4]]}, "schedule": {"n_max": 64}}
EXAMPLE2 = {
    "experiment": "example2",
    "operator": {"zoo": {"name": "example2-shift", "m": 40}},
    "schedule": {"n_lo": 1, "n_hi": 32},
}


def test_nayak_inline_diagonal():
    out = run(parse_config(NAYAK))
    assert out.status == "ok"
    assert out.table.column("error") == pytest.approx([0.0, 0.0], abs=1e-12)


def test_example2_table_closed_forms():
    table = run(parse_config(EXAMPLE2)).table
    for p, value, kind in zip(table.column("p"), table.column("value"), table.column("kind")):
        if kind == "2^n":
            assert value == pytest.approx(0.5, abs=1e-12)
        elif kind == "2^n-1":
            assert value == pytest.approx(2 ** (-1 / p), abs=1e-12)


@pytest.mark.parametrize("fmt", ["csv", "records"])
def test_deterministic_output(tmp_path, fmt):
    texts = []
    for _ in range(2):
        table = run(parse_config(EXAMPLE2)).table
        table.metadata.pop("wall_time")
        texts.append(dumps_table(table, fmt))
    assert texts[0] == texts[1]


@pytest.mark.parametrize("fmt", ["csv", "records"])
def test_round_trip(fmt):
    table = ResultTable(
        ["n", "x", "label"],
        [[1, 0.1, "a"], [2, 1 / 3, "b,c"], [3, math.pi * 1e-300, "d"], [4, -2.5e17, "e"]],
        {"config_hash": "abc", "version": __version__},
        ("n", "x", "label"),
    )
    back = loads_table(dumps_table(table, fmt))
    assert back.header == table.header
    assert back.rows == table.rows
    assert back.metadata == table.metadata
    assert back.plot == table.plot


def test_round_trip_run_output():
    table = run(parse_config({**NAYAK, "experiment": "yamamoto", "schedule": {"n_list": [1, 7, 30]}})).table
    back = loads_table(dumps_table(table, "csv"))
    assert back.rows == table.rows
    assert back.metadata == table.metadata


def test_config_hash_tracks_semantics():
    base = parse_config(NAYAK).config_hash()
    assert parse_config(dict(NAYAK)).config_hash() == base
    assert parse_config({**NAYAK, "output": {"path": "x.csv"}}).config_hash() == base
    assert parse_config({**NAYAK, "seed": 0}).config_hash() == base
    assert parse_config({**NAYAK, "seed": 1}).config_hash() != base
    assert parse_config({**NAYAK, "schedule": {"n_max": 128}}).config_hash() != base
    assert parse_config({**NAYAK, "tolerances": {"tol_cauchy": 1e-6}}).config_hash() != base
    assert parse_config({**NAYAK, "operator": {"matrix": [[0.9, 0], [0, "0.4+0j"]]}}).config_hash() == base


@pytest.mark.parametrize(
    "cfg,path",
    [
        ({"experiment": "bogus"}, "experiment"),
        ({**NAYAK, "schedule": {}}, "schedule"),
        ({**NAYAK, "schedule": {"n_max": 6}}, "schedule.n_max"),
        ({**NAYAK, "operator": {"matrix": [[1, 2]]}}, "operator.matrix"),
        ({**NAYAK, "operator": {"matrix": [["x"]]}}, "operator.matrix[0][0]"),
        ({**NAYAK, "seed": -1}, "seed"),
        ({**NAYAK, "tolerances": {"tol_cauchy": 0}}, "tolerances.tol_cauchy"),
        ({**NAYAK, "extra": 1}, "extra"),
        ({**EXAMPLE2, "operator": {"zoo": {"name": "nope", "m": 4}}}, "operator.zoo.name"),
        ({**EXAMPLE2, "operator": {"zoo": {"name": "left-shift"}}}, "operator.zoo.m"),
        ({**EXAMPLE2, "operator": {"matrix": [[1]]}}, "operator"),
    ],
)
def test_config_errors_name_the_field(cfg, path):
    with pytest.raises(ConfigInvalid) as info:
        parse_config(cfg)
    assert info.value.path == path


def test_cli_run_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "out.csv"
    assert main(["run", str(write(tmp_path, NAYAK)), "--out", str(out)]) == 0
    assert loads_table(out.read_text()).column("error") == pytest.approx([0, 0], abs=1e-12)
    assert "nayak-limit" in capsys.readouterr().err
    assert main(["run", str(write(tmp_path, {"experiment": "bogus"}, "bad.json"))]) == 2
    assert main(["run", str(tmp_path / "missing.json")]) == 4
    assert main(["run", str(write(tmp_path, NAYAK)), "--out", str(tmp_path / "no" / "dir.csv")]) == 4


def test_cli_flagged_result_exit_3(tmp_path):
    cfg = {"experiment": "nayak-limit", "operator": {"matrix": [[0.5, 1], [0, 0.5]]}, "schedule": {"n_max": 64}}
    out = tmp_path / "j.csv"
    assert main(["run", str(write(tmp_path, cfg)), "--out", str(out)]) == 3
    table = loads_table(out.read_text())
    assert table.metadata["status"] == "flagged"
    assert len(table.rows) == 2


def test_cli_records_format(tmp_path):
    out = tmp_path / "r.jsonl"
    assert main(["run", str(write(tmp_path, EXAMPLE2)), "--out", str(out), "--format", "records"]) == 0
    lines = out.read_text().splitlines()
    assert "meta" in json.loads(lines[0])
    rec = json.loads(lines[1])
    assert set(rec) == {"x", "y", "series", "row"}


def test_cli_zoo_and_version(capsys):
    assert main(["zoo", "list"]) == 0
    listing = capsys.readouterr().out
    assert "left-shift" in listing and "example2-shift" in listing
    assert listing == zoo_list() + "\n"
    assert main(["version"]) == 0
    assert capsys.readouterr().out.strip() == __version__


@pytest.mark.parametrize(
    "cfg",
    [
        {"experiment": "power-seq", "operator": {"matrix": [[0.5, 1], [0, 0.2]]}, "schedule": {"n_list": [1, 2, 8]}},
        {"experiment": "riesz", "operator": {"matrix": [[0.9, 0], [0, 0.3]]}, "params": {"radius": 0.5}},
        {"experiment": "riesz", "operator": {"matrix": [[0.9, 0], [0, 0.3]]}, "params": {"radius": 0.1, "center": 0.9}},
        {"experiment": "v-estimate", "operator": {"matrix": [[0.9, 0], [0, 0.3]]}, "schedule": {"n_lo": 4, "n_hi": 16}},
        {
            "experiment": "truncate-study",
            "operator": {"zoo": {"name": "diagonal", "params": {"scale_to": 0.9}, "m": 8}},
            "schedule": {"n_lo": 1, "n_hi": 16},
        },
        {
            "experiment": "tail-diagnostic",
            "operator": {"zoo": {"name": "left-shift", "params": {"c": 0.9}, "m": 16}},
            "schedule": {"n_max": 8},
        },
        {"experiment": "bc-check", "params": {"trials": 5}, "seed": 3},
        {"experiment": "bc-check", "params": {"coefficients": [0, 1], "r": 1, "R": 2}},
    ],
)
def test_every_experiment_runs(cfg):
    out = run(parse_config(cfg))
    assert out.status == "ok"
    assert out.table.rows
    assert out.table.metadata["experiment"] == cfg["experiment"]


def test_riesz_module_error_is_config_exit(tmp_path):
    cfg = {"experiment": "riesz", "operator": {"matrix": [[0.5, 0], [0, 0.1]]}, "params": {"radius": 0.5}}
    assert main(["run", str(write(tmp_path, cfg))]) == 2
