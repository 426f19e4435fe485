import json
import subprocess
import sys

import pytest

from wpgeom.cli import main
from wpgeom.modelfile import load_model


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_check_valid(capsys, models_dir):
    code, rep = run(capsys, "check", str(models_dir / "elliptic.toml"))
    assert code == 0 and rep["ok"]
    assert len(rep["model_sha256"]) == 64
    assert rep["untwist"]["cut_residual"] < 1e-10


def test_check_perturbed_fails(capsys, models_dir):
    code, rep = run(capsys, "check", str(models_dir / "perturbed_n.toml"))
    assert code == 1 and not rep["ok"]
    assert not rep["untwist"]["single_valued"]


def test_float_entry_is_parse_error(capsys, models_dir):
    code, rep = run(capsys, "check", str(models_dir / "float_entry.toml"))
    assert code == 2
    assert rep["error"] == "parse" and rep["line"] == 8 and rep["column"] == 10


def test_usage_error(capsys):
    code, rep = run(capsys, "volume")
    assert code == 2 and rep["error"] == "usage"


def test_volume_twelfth(capsys, tmp_path):
    out = tmp_path / "vol.json"
    plot = str(tmp_path / "vol")
    code = main(["volume", "builtin:elliptic", "--chart", "modular", "--eps", "0.1,0.05,0.025",
                 "--max-den", "100", "--out", str(out), "--plot", plot,
                 "--csv-cells", str(tmp_path / "cells.csv")])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["candidate"] == "1/12" and rep["unique"]
    assert abs(rep["value"] - 1 / 12) < 1e-3
    assert rep["config"]["eps"] == [0.1, 0.05, 0.025]
    assert (tmp_path / "vol.csv").exists() and (tmp_path / "vol.gp").exists()
    assert (tmp_path / "cells.csv").read_text().startswith("cell,")


def test_chern_minus_sixth(capsys):
    code, rep = run(capsys, "chern", "builtin:elliptic", "--chart", "modular", "--k", "1", "--l", "0",
                    "--max-den", "100")
    assert code == 0 and rep["candidate"] == "-1/6"


def test_constant_volume_is_zero(capsys):
    code, rep = run(capsys, "volume", "builtin:constant", "--chart", "modular", "--max-den", "100")
    assert code == 0 and rep["value"] == 0 and rep["candidate"] == "0"


def test_chern_needs_degrees(capsys):
    code, _ = run(capsys, "chern", "builtin:elliptic", "--chart", "modular")
    assert code == 2


def test_degorder(capsys):
    code, rep = run(capsys, "degorder", "builtin:elliptic")
    assert code == 0
    assert rep["divisors"][0]["tau"] == -1 and rep["divisors"][0]["divisor"] == 1


def test_degorder_product_samples(capsys):
    code, rep = run(capsys, "degorder", "builtin:product", "--divisor", "2", "--samples", "4")
    assert code == 0
    d = rep["divisors"]
    assert len(d) == 1 and d[0]["divisor"] == 2 and d[0]["samples"]["constant"]


def test_degorder_bad_divisor(capsys):
    code, _ = run(capsys, "degorder", "builtin:elliptic", "--divisor", "3")
    assert code == 2


def test_degorder_constant_errors(capsys):
    code, rep = run(capsys, "degorder", "builtin:constant")
    assert code == 3 and rep["error"] == "DegenerateMetricError"


def test_curvature(capsys):
    code, rep = run(capsys, "curvature", "weight3", "--at", "0.01,0.005|0.02,-0.01")
    assert code == 0 and len(rep["points"]) == 2
    for p in rep["points"]:
        assert p["strominger_residual"] < 1e-9
        assert all(ev > 0 for ev in p["metric_eigenvalues"])


def test_reduce(capsys, models_dir, tmp_path):
    out = tmp_path / "reduced.toml"
    code, rep = run(capsys, "reduce", str(models_dir / "order4.toml"), "-o", str(out))
    assert code == 0 and rep["orders"] == [4]
    mf = load_model(out)
    assert mf.monodromies == [[[1, 0], [0, 1]]]
    assert {key[0] for key, _ in mf.model.holomorphic_part.items()} == {(0,), (4,)}


def test_reduce_needs_monodromies(capsys, models_dir, tmp_path):
    code, _ = run(capsys, "reduce", str(models_dir / "elliptic.toml"), "-o", str(tmp_path / "x.toml"))
    assert code == 2


def test_rationalize(capsys):
    code, rep = run(capsys, "rationalize", "0.33333", "1e-4", "--max-den", "100")
    assert code == 0 and rep["rational"]["candidate"] == "1/3"
    code, rep = run(capsys, "rationalize", "0.5", "0.3", "--max-den", "10")
    assert code == 0 and not rep["rational"]["unique"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wpgeom", "rationalize", "1/4", "0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rational"]["candidate"] == "1/4"
