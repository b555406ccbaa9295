import json
from pathlib import Path

import numpy as np
import pytest

from rareexit import ConfigError
from rareexit.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from rareexit.config import load_spec, parse_spec
from rareexit.sampler import GridResult

SPECS = sorted((Path(__file__).parents[1] / "specs").glob("*.ini"))

SMALL = """
[model]
kind = linear
[domain]
kind = symmetric
half_width = 1
[scheme]
kind = mollified-linear
xhat = 1
M = 4
[grid]
eps = 0.2, 0.16
T = 1.5, 2.5
[run]
n = 500
seed = 7
"""


@pytest.mark.parametrize("path", SPECS, ids=lambda p: p.stem)
def test_shipped_specs_parse(path):
    spec = load_spec(path)
    assert spec.eps and spec.T and spec.n > 0
    spec.rule.params(spec.problem, spec.eps[0], spec.T[-1])


def test_small_spec_fields():
    s = parse_spec(SMALL)
    assert s.eps == [0.2, 0.16] and s.T == [1.5, 2.5]
    assert s.seed == 7 and s.dt == 1e-3 and s.rule.kind == "mollified-linear"
    assert s.raw["scheme"]["m"] == "4"


@pytest.mark.parametrize("edit, path", [
    (("T = 1.5, 2.5", "T ="), "grid.T"),
    (("eps = 0.2, 0.16", "eps = 0.2, -1"), "grid.eps"),
    (("M = 4", "M = 4\nbogus = 1"), "scheme.bogus"),
    (("[run]", "[extra]\nx = 1\n[run]"), "extra"),
    (("kind = linear", "kind = cubic"), "model.kind"),
    (("kind = mollified-linear", "kind = magic"), "scheme.kind"),
    (("seed = 7", "seed = -1"), "run.seed"),
    (("n = 500", "n = 500\ndt = 3"), "run.dt"),
    (("half_width = 1", "half_width = -1"), "domain"),
    (("T = 1.5, 2.5", "T = 1.5, nan"), "grid.t"),
])
def test_config_errors_name_the_field(edit, path):
    with pytest.raises(ConfigError) as info:
        parse_spec(SMALL.replace(*edit))
    assert info.value.path.lower() == path.lower()


def test_missing_section():
    with pytest.raises(ConfigError) as info:
        parse_spec(SMALL.split("[grid]")[0])
    assert info.value.path == "grid"


def test_xhat_power_below_kappa():
    base = SMALL.replace("M = 4\n", "kappa = 0.4\n")
    parse_spec(base.replace("xhat = 1", "xhat = 1\nxhat_power = 0.2"))
    with pytest.raises(ConfigError, match="xhat_power"):
        parse_spec(base.replace("xhat = 1", "xhat = 1\nxhat_power = 0.4"))


# --- command line -------------------------------------------------------------------

@pytest.fixture
def small_spec(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL)
    return p


def test_exit_code_bad_spec(tmp_path, capsys):
    assert main(["estimate", "--spec", str(tmp_path / "nope.ini")]) == EXIT_CONFIG
    bad = tmp_path / "bad.ini"
    bad.write_text(SMALL.replace("T = 1.5, 2.5", "T ="))
    assert main(["table", "--spec", str(bad)]) == EXIT_CONFIG
    assert "grid.T" in capsys.readouterr().err


def test_estimate_command(small_spec, tmp_path, capsys):
    out = tmp_path / "est"
    assert main(["estimate", "--spec", str(small_spec), "--out", str(out), "--n", "300"]) == 0
    rows = (out / "cell.csv").read_text().splitlines()
    assert rows[0].startswith("epsilon,T,scheme,N")
    assert rows[1].split(",")[3] == "300"
    assert "rel error" in capsys.readouterr().out


def test_table_command_and_manifest(small_spec, tmp_path):
    out = tmp_path / "tab"
    assert main(["table", "--spec", str(small_spec), "--out", str(out)]) == EXIT_OK
    eps, T, est = GridResult.parse_table_csv((out / "estimates.csv").read_text())
    assert eps == [0.2, 0.16] and T == [1.5, 2.5]
    assert np.all(est > 0)
    m = json.loads((out / "manifest.json").read_text())
    assert m["resolved"]["seed"] == 7
    assert m["config"]["grid"]["t"] == "1.5, 2.5"
    assert m["cells"]["0.16,2.5"]["stream"] == 3
    assert set(m["versions"]) >= {"python", "numpy", "scipy", "numba"}


def test_overrides_change_results(small_spec, tmp_path):
    def run(*extra):
        out = tmp_path / "-".join(extra or ("base",))
        assert main(["table", "--spec", str(small_spec), "--out", str(out), *extra]) == 0
        return (out / "estimates.csv").read_text(), json.loads((out / "manifest.json").read_text())

    base, _ = run()
    seeded, m = run("--seed", "0x11")
    assert m["resolved"]["seed"] == 17 and seeded != base
    fine, m = run("--dt", "5e-4")
    assert m["resolved"]["dt"] == 5e-4 and fine != base
    assert main(["table", "--spec", str(small_spec), "--dt", "9"]) == EXIT_CONFIG
    assert main(["table", "--spec", str(small_spec), "--workers", "0"]) == EXIT_CONFIG


def test_verify_command(tmp_path, capsys):
    ref = next(p for p in SPECS if p.stem == "reference")
    out = tmp_path / "ver"
    assert main(["verify", "--spec", str(ref), "--out", str(out)]) == EXIT_OK
    assert "all regions certified" in capsys.readouterr().out
    regions = (out / "verify_regions.csv").read_text().splitlines()
    assert len(regions) == 7
    theorem = (out / "verify_theorem.csv").read_text()
    assert theorem.startswith("quantity,value\nbound,")


def test_verify_failure_exit_code(tmp_path):
    spec = tmp_path / "bad.ini"
    spec.write_text(SMALL.replace("xhat = 1", "xhat = 0.2")
                    + "[analysis]\neta = 0\nnt = 41\nnx = 41\n")
    assert main(["verify", "--spec", str(spec), "--eps", "0.1", "--T", "5",
                 "--out", str(tmp_path / "v")]) == EXIT_CHECK


def test_numeric_failure_exit_code(tmp_path):
    spec = tmp_path / "dw.ini"
    spec.write_text(SMALL.replace("kind = linear", "kind = double-well")
                    .replace("kind = symmetric\nhalf_width = 1",
                             "kind = two-sided\nlower = -1.4\nupper = -0.23")
                    .replace("mollified-linear", "eps-zero-hjb"))
    assert main(["table", "--spec", str(spec), "--out", str(tmp_path / "t")]) == EXIT_NUMERIC
