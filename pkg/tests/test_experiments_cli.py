import json
import os

import pytest

from enlargelab import _rng
from enlargelab.cli import main
from enlargelab.errors import ConfigError, UsageError
from enlargelab.experiments import EXPERIMENTS, default_config, load_config, parse_config_text, run, validate

SMALL = {"n_paths": 300, "mesh_exp": 7}


def test_registry_complete():
    assert set(EXPERIMENTS) == {"reversed-brownian", "reversed-diffusion-ou", "discretized-convergence", "pitman",
                                "honest-bessel", "transient-honest", "noisy-future", "weakconv", "girsanov",
                                "insider-pnl"}


def test_config_parsing(tmp_path):
    text = """
    # comment
    experiment = honest-bessel
    paths = 500
    mesh-exp = 8
    eps = 0.3, 0.1   # inline comment
    T_query = 0.8
    """
    values = parse_config_text(text)
    assert values == {"experiment": "honest-bessel", "n_paths": 500, "mesh_exp": 8, "eps": (0.3, 0.1),
                      "T_query": 0.8}
    f = tmp_path / "c.cfg"
    f.write_text(text)
    cfg = load_config(str(f), seed=7, n_paths=400)
    assert cfg.experiment == "honest-bessel" and cfg.n_paths == 400 and cfg.seed == 7 and cfg.mesh_exp == 8
    with pytest.raises(ConfigError) as info:
        parse_config_text("paths = many")
    assert info.value.field == "n_paths"
    with pytest.raises(ConfigError):
        parse_config_text("colour = blue")


@pytest.mark.parametrize("overrides,field", [
    ({"n_paths": 0}, "n_paths"), ({"mesh_exp": 20}, "mesh_exp"), ({"t_max": 0.5}, "t_max"),
    ({"model": "heston"}, "model"), ({"seed": -1}, "seed"), ({"s": 0.4, "t": 0.3}, "s"),
])
def test_validation_errors_name_the_field(overrides, field):
    with pytest.raises(ConfigError) as info:
        validate(default_config("reversed-brownian", **overrides))
    assert info.value.field == field


def test_model_capability_checks():
    with pytest.raises(ConfigError):
        validate(default_config("reversed-diffusion-ou", model="bessel3"))
    with pytest.raises(ConfigError):
        validate(default_config("honest-bessel", model="bm"))
    with pytest.raises(ConfigError):
        validate(default_config("honest-bessel", eps=(0.1, -0.2)))
    with pytest.raises(UsageError):
        default_config("no-such-thing")


def test_invalid_config_writes_nothing(tmp_path):
    with pytest.raises(ConfigError):
        run(default_config("reversed-brownian", n_paths=0, out=str(tmp_path)))
    assert os.listdir(tmp_path) == []


def test_run_writes_reports_and_is_deterministic(tmp_path):
    cfg = default_config("reversed-brownian", out=str(tmp_path / "a"), **SMALL)
    res = run(cfg)
    summary = open(res.files["summary.csv"]).read()
    assert summary.splitlines()[0] == "experiment,test,statistic,lo,hi,expected,pass"
    names = {row["test"] for row in res.rows}
    assert {"qv-over-t@0.2", "slope-compensated", "ks-increments"} <= names
    manifest = json.load(open(res.files["manifest.json"]))
    assert manifest["config"]["n_paths"] == 300 and "summary.csv" in manifest["hashes"]
    res2 = run(default_config("reversed-brownian", out=str(tmp_path / "b"), **SMALL))
    assert open(res2.files["summary.csv"]).read() == summary
    assert open(res2.files["report.json"]).read() == open(res.files["report.json"]).read()


def test_cli_list_and_run(tmp_path, capsys):
    assert main(["list"]) == 0
    assert "pitman" in capsys.readouterr().out
    code = main(["run", "transient-honest", "--paths", "100", "--mesh-exp", "8", "--seed", "3",
                 "--out", str(tmp_path)])
    assert code == 0
    assert os.path.exists(tmp_path / "transient-honest" / "summary.csv")
    assert main(["run", "nope"]) == 2
    assert main(["run", "pitman", "--paths", "0", "--out", str(tmp_path / "x")]) == 2
    assert not os.path.exists(tmp_path / "x")


def test_cli_exit_code_reflects_failures(tmp_path):
    # too few paths for the 2% QV tolerance at a coarse mesh is a legitimate failure
    code = main(["run", "weakconv", "--paths", "100", "--out", str(tmp_path)])
    assert code == 1


def test_worker_env_does_not_change_rows(tmp_path, monkeypatch):
    outs = []
    for w in ("1", "3"):
        monkeypatch.setenv(_rng.WORKERS_ENV, w)
        res = run(default_config("pitman", out=str(tmp_path / w), n_paths=600, mesh_exp=6))
        outs.append(open(res.files["summary.csv"]).read())
    assert outs[0] == outs[1]
