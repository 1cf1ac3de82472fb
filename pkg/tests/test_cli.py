import json
import os

import numpy as np
import pytest

from stdmaplab.cli import config_hash, main, parse_grid, resolve_config


def run_cli(args):
    return main(args)


def test_bounds_artifact_and_determinism(tmp_path):
    out = str(tmp_path / "b")
    assert run_cli(["bounds", "--lambda-grid", "2:4:0.5", "--out", out]) == 0
    first = open(f"{out}_table.csv").read()
    assert run_cli(["bounds", "--lambda-grid", "2:4:0.5", "--out", out]) == 0
    assert open(f"{out}_table.csv").read() == first
    lines = first.splitlines()
    assert lines[0].startswith("# stdmaplab v") and "config_hash=" in lines[0]
    assert lines[1] == "lambda,M0,C,C_E2,hadamard_E2,entropy_lower,entropy_upper,pesin_lower"
    # the table reproduces the lambda0 crossing of the entropy lower bound
    rows = [l.split(",") for l in lines[2:]]
    lams = np.array([float(r[0]) for r in rows])
    lower = np.array([float(r[5]) for r in rows])
    sign_change = np.where(np.diff(np.sign(lower)) > 0)[0]
    assert len(sign_change) == 1
    assert abs(lams[sign_change[0]] - 3.1547) < 0.5


def test_config_file_and_unknown_key(tmp_path):
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps({"lambda_grid": "2:3:0.5",
                                   "out": str(tmp_path / "x")}))
    assert run_cli(["bounds", "--config", str(cfgfile)]) == 0
    cfgfile.write_text(json.dumps({"nonsense": 1}))
    assert run_cli(["bounds", "--config", str(cfgfile)]) == 2


def test_invalid_suite_name_exits_2(tmp_path):
    assert run_cli(["suite", "--name", "nosuch", "--out", str(tmp_path / "s")]) == 2


def test_parse_grid_and_hash_stability():
    g = parse_grid("1:2:0.25")
    assert np.allclose(g, [1.0, 1.25, 1.5, 1.75, 2.0])
    with pytest.raises(Exception):
        parse_grid("nope")
    h1 = config_hash({"a": 1, "b": 2.0})
    h2 = config_hash({"b": 2.0, "a": 1})
    assert h1 == h2


def test_lyapunov_subcommand_small(tmp_path):
    out = str(tmp_path / "ly")
    assert run_cli(["lyapunov", "--lambda", "10", "--grid", "8",
                    "--steps", "2000", "--out", out]) == 0
    payload = json.load(open(f"{out}_summary.json"))
    assert payload["config_hash"]
    assert abs(payload["excess_over_log_half_lam"]) < 0.3
    grid_lines = open(f"{out}_grid.csv").read().splitlines()
    assert len(grid_lines) == 2 + 64


def test_herman_subcommand(tmp_path):
    out = str(tmp_path / "h")
    assert run_cli(["herman", "--lambda", "10", "--betas", "4",
                    "--steps", "4000", "--out", out]) == 0
    lines = open(f"{out}.csv").read().splitlines()
    assert lines[1] == "beta,exponent,uniform"
    assert len(lines) == 2 + 4


def test_detprod_subcommand(tmp_path):
    out = str(tmp_path / "d")
    assert run_cli(["detprod", "--potential", "period4", "--truncation", "200",
                    "--out", out]) == 0
    payload = json.load(open(f"{out}.json"))
    assert payload["residual"] < 0.05


def test_wspectrum_subcommand(tmp_path):
    out = str(tmp_path / "w")
    assert run_cli(["wspectrum", "--lax-k", "7", "--lambda", "2.1",
                    "--wgrid", "120", "--extent", "1.6", "--out", out]) == 0
    payload = json.load(open(f"{out}_summary.json"))
    assert payload["band_count"] >= 2
    assert payload["cells_in_spectrum"] > 0
