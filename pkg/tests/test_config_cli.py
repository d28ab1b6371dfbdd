import csv
import json
import math

import pytest

from volrates.cli import main
from volrates.config import (
    ConfigError,
    apply_overrides,
    dump_config,
    estimator_to_config,
    estimators_from_config,
    model_from_config,
    model_to_config,
    parse_config,
    plan_from_config,
)
from volrates.estimators import EstimatorConfig, FrequencyRule
from volrates.models import Deterministic, JumpComponent, JumpLaw, ModelSpec, StochasticVolatility

PLAN_TEXT = """
[model]
volatility.value = 1   ; unit Brownian part
class.r = 1.6
class.A = 7.38308

[jump.0]
kind = symmetric-stable
stable_index = 1.5
scale = 1

[estimator.0]
variant = realized

[estimator.1]
variant = truncated
varpi = 0.49
trunc_scale = 4

[estimator.2]
variant = spectral
frequency.r = 1.6
frequency.A = 7.38308

[plan]
n_grid = 64, 128, 256
replications = 20
base_seed = 9
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_model_roundtrip():
    models = [
        ModelSpec.constant(1.0, 0.2, [JumpComponent.stable(1.5, 0.3)], r=1.6, A=3.0),
        ModelSpec(Deterministic((0.0, 0.1), (0.0, 1.0)), Deterministic((1.0, 2.0, 0.5), (0.0, 0.3, 1.0)),
                  (JumpComponent.compound_poisson(2.0, JumpLaw("atoms", (-1.0, 0.5), (0.25, 0.75))),
                   JumpComponent.truncated_stable(1.1, 0.4, 2.0, 1e-3),
                   JumpComponent.compound_poisson(0.5, JumpLaw("normal", mean=0.1, std=0.3)))),
        ModelSpec(volatility=StochasticVolatility(1.2, 3.0, 0.4, 0.2, 2.5, 0.9)),
    ]
    for m in models:
        text = dump_config(model_to_config(m))
        assert model_from_config(parse_config(text)) == m


def test_estimator_roundtrip():
    cfgs = (EstimatorConfig("realized"), EstimatorConfig("truncated", 0.3, 2.5),
            EstimatorConfig("multipower", k=3), EstimatorConfig("spectral", freq_rule=12.5),
            EstimatorConfig("spectral", freq_rule=FrequencyRule(1.6, 7.38308)))
    back = estimators_from_config(parse_config(dump_config(estimator_to_config(cfgs))))
    assert back == cfgs


def test_plan_parse_and_override():
    cp = parse_config(PLAN_TEXT)
    apply_overrides(cp, ["plan.replications=30", "jump.0.scale=0.5", "model.volatility.value=2"])
    plan = plan_from_config(cp)
    assert plan.replications == 30 and plan.n_grid == (64, 128, 256)
    assert plan.model.jumps[0].scale == 0.5
    assert plan.model.volatility.values == (2.0,)
    assert [c.variant for c in plan.estimators] == ["realized", "truncated", "spectral"]


@pytest.mark.parametrize("text", [
    "[model\n",
    "[model]\nvolatility.kind = rough\n",
    "[model]\nvolatility.value = abc\n",
    "[model]\n[jump.0]\nkind = gamma\n",
    "[model]\n[jump.x]\nkind = symmetric-stable\n",
    "[model]\n[jump.0]\nkind = symmetric-stable\nstable_index = 2.5\n",
])
def test_bad_model_configs(text):
    with pytest.raises(ConfigError):
        model_from_config(parse_config(text))


def test_bad_override():
    with pytest.raises(ConfigError):
        apply_overrides(parse_config(""), ["no-equals-sign"])


def test_cli_simulate_rows(tmp_path):
    cfg = write(tmp_path, "m.ini", "[model]\nvolatility.value = 1\n")
    out = tmp_path / "p.csv"
    assert main(["simulate", "--config", cfg, "--n", "4", "--seed", "1", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == ["time", "value"] and len(rows) == 6
    assert [float(r[0]) for r in rows[1:]] == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_cli_simulate_idempotent(tmp_path):
    cfg = write(tmp_path, "m.ini", PLAN_TEXT)
    out = tmp_path / "p.csv"
    args = ["simulate", "--config", cfg, "--n", "50", "--seed", "4", "--out", str(out)]
    main(args)
    first = out.read_bytes()
    main(args)
    assert out.read_bytes() == first and b"\r\n" not in first


def test_cli_estimate_realized(tmp_path):
    path = write(tmp_path, "x.csv", "time,value\n0,0\n0.33,1\n0.67,0\n1,2\n")
    out = tmp_path / "e.csv"
    assert main(["estimate", "--path", path, "--variant", "realized", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == ["estimator", "n", "seed", "value", "tuning_used", "degenerate"]
    assert float(rows[1][3]) == 6.0 and rows[1][1] == "3"


def test_cli_estimate_from_config(tmp_path):
    cfg = write(tmp_path, "m.ini", PLAN_TEXT)
    p = tmp_path / "p.csv"
    main(["simulate", "--config", cfg, "--n", "256", "--seed", "2", "--out", str(p)])
    out = tmp_path / "e.csv"
    assert main(["estimate", "--config", cfg, "--path", str(p), "--out", str(out)]) == 0
    rows = read_rows(out)[1:]
    assert [r[0].split("(")[0] for r in rows] == ["realized", "truncated", "spectral"]
    assert float(rows[1][4]) == pytest.approx(4 * 256**-0.49)


def test_cli_rates(tmp_path):
    cfg = write(tmp_path, "m.ini", PLAN_TEXT)
    out = tmp_path / "rates"
    assert main(["rates", "--config", cfg, "--out", str(out), "--threads", "2"]) == 0
    rows = read_rows(out / "report.csv")
    assert len(rows) == 1 + 3 * 3
    summary = json.loads((out / "summary.json").read_text())
    assert summary["base_seed"] == 9 and summary["log"] == "natural"
    assert set(summary["estimators"]) == {"realized", "truncated(varpi=0.49,scale=4)",
                                          "spectral(r=1.6,A=7.38308)"}


def test_cli_minimax(tmp_path):
    out = tmp_path / "mm.csv"
    dump = tmp_path / "dump"
    assert main(["minimax", "--r", "1.5", "--n-grid", "256,1024,4096", "--out", str(out),
                 "--dump-dir", str(dump), "--threads", "3"]) == 0
    rows = read_rows(out)
    assert rows[0] == ["r", "n", "a_n", "u_n", "norm_eta", "norm_eta_prime", "tv_bound",
                       "grid_spacing", "grid_extent"]
    tv = [float(r[6]) for r in rows[1:]]
    assert len(tv) == 3 and tv[0] > tv[1] > tv[2]
    assert float(rows[1][7]) == pytest.approx(math.pi / (4 * float(rows[1][3])))
    assert (dump / "eta_r1.5_n256.csv").exists()


def test_cli_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "o.csv")
    assert main([]) == 1
    assert main(["frobnicate", "--out", out]) == 1
    assert main(["simulate", "--config", str(tmp_path / "missing.ini"), "--out", out]) == 4
    bad = write(tmp_path, "bad.ini", "[model\nvolatility.value = 1\n")
    assert main(["simulate", "--config", bad, "--n", "4", "--out", out]) == 2
    good = write(tmp_path, "good.ini", "[model]\n")
    assert main(["simulate", "--config", good, "--n", "4", "--out", str(tmp_path / "no" / "x.csv")]) == 4
    assert main(["minimax", "--r", "2.5", "--n-grid", "64", "--out", out]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 6 and all(line.startswith("volrates: ") for line in err)


def test_cli_numeric_error(tmp_path):
    cfg = write(tmp_path, "m.ini", PLAN_TEXT.replace("frequency.r = 1.6", "frequency.r = 1.4"))
    assert main(["rates", "--config", cfg, "--out", str(tmp_path / "r")]) == 3
