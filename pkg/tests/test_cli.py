import json
import subprocess
import sys

import pytest

from heyde.cli import main
from heyde.scenarios import FAMILIES, random_pair, run_sweep, shifted_torsion_pairs
from heyde.endomorphism import Endo, automorphisms
from heyde.engine import brute_force_conditional_symmetry
from heyde.groups import GroupSpec


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


# -- counterexample --------------------------------------------------------------------


def test_counterexample_default_writes_valid_certificate(tmp_path, capsys):
    out = tmp_path / "cert.json"
    code, cap = run(["counterexample", "--out", str(out)], capsys)
    assert code == 0
    cert = json.loads(out.read_text())
    assert cert["valid"] and cert["k"] == 3
    assert "certificate valid: True" in cap.err


def test_counterexample_kappa_one_exits_1(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"kappa": 1})
    code, cap = run(["counterexample", "--config", cfg], capsys)
    assert code == 1
    assert json.loads(cap.out)["failed_stage"] == "d"


@pytest.mark.parametrize("bad", [
    {"alpha": [[1, 2], [3]]}, {"alpha": [[1, 0], [0, 1]]}, {"kappa": -1}, {"window": "big"}, {"nope": 1},
])
def test_counterexample_invalid_config_exits_2(tmp_path, capsys, bad):
    cfg = write(tmp_path, "c.json", bad)
    code, cap = run(["counterexample", "--config", cfg], capsys)
    assert code == 2 and "error" in cap.err


def test_unparseable_or_missing_config_exits_2(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert run(["counterexample", "--config", str(p)], capsys)[0] == 2
    assert run(["counterexample", "--config", str(tmp_path / "missing.json")], capsys)[0] == 2
    assert run(["no-such-command"], capsys)[0] == 2


# -- check-symmetry --------------------------------------------------------------------


def test_check_symmetry_point_pair(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", {
        "group": {"kind": "finite", "orders": [4]}, "alpha": [[3]],
        "mu1": {"point": [0]}, "mu2": {"point": [0]},
    })
    code, cap = run(["check-symmetry", "--config", cfg], capsys)
    rep = json.loads(cap.out)
    assert code == 0 and rep["verdict"] and rep["methods_agree"]
    assert rep["charfn"]["max_residual"] == 0


def test_check_symmetry_kernel_witness(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", {
        "group": {"kind": "finite", "orders": [3]}, "alpha": [[2]],
        "mu1": {"masses": [0.2, 0.3, 0.5]}, "mu2": {"masses": [0.2, 0.3, 0.5]},
    })
    code, cap = run(["check-symmetry", "--config", cfg], capsys)
    rep = json.loads(cap.out)
    assert code == 0 and rep["verdict"] and rep["brute_force"]["verdict"]


def test_check_symmetry_random_z5_pairs_agree(tmp_path, capsys):
    import numpy as np
    rng = np.random.default_rng(0)
    for alpha in range(1, 5):
        m1, m2 = rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5))
        cfg = write(tmp_path, "s.json", {
            "group": {"kind": "finite", "orders": [5]}, "alpha": [[alpha]],
            "mu1": {"masses": m1.tolist()}, "mu2": {"masses": m2.tolist()},
        })
        code, cap = run(["check-symmetry", "--config", cfg], capsys)
        assert code == 0 and json.loads(cap.out)["methods_agree"]


def test_check_symmetry_counterexample_pair(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", {"counterexample": {}, "radius": 6})
    code, cap = run(["check-symmetry", "--config", cfg], capsys)
    rep = json.loads(cap.out)
    assert code == 0 and rep["verdict"] and "brute_force" not in rep


def test_check_symmetry_library_errors_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", {
        "group": {"kind": "finite", "orders": [4]}, "alpha": [[1]],
        "mu1": {"masses": [0.5, 0.5, 0.5, 0.5]}, "mu2": {"point": [0]},
    })
    assert run(["check-symmetry", "--config", cfg], capsys)[0] == 2
    cfg = write(tmp_path, "s.json", {"group": {"kind": "finite", "orders": [4]}})
    assert run(["check-symmetry", "--config", cfg], capsys)[0] == 2


# -- decompose / membership ------------------------------------------------------------


def test_decompose_finite_and_torus(tmp_path, capsys):
    cfg = write(tmp_path, "d.json", {
        "group": {"kind": "finite", "orders": [2, 2, 3]},
        "alpha": [[0, 1, 0], [1, 1, 0], [0, 0, 1]],
        "mu1": {"masses": [0.7, 0, 0, 0.1, 0, 0, 0.2, 0, 0, 0, 0, 0]},
        "mu2": {"point": [0, 0, 0]},
    })
    code, cap = run(["decompose", "--config", cfg], capsys)
    rep = json.loads(cap.out)
    assert code == 0 and rep["ok"] and len(rep["decomposition"]["constants"]) == 4
    cfg = write(tmp_path, "d2.json", {"counterexample": {}})
    code, cap = run(["decompose", "--config", cfg], capsys)
    assert code == 0 and json.loads(cap.out)["decomposition"]["max_residual"] < 1e-9


def test_membership_commands(tmp_path, capsys):
    cfg = write(tmp_path, "m.json", {"counterexample": {}, "which": "g2"})
    code, cap = run(["membership", "--config", cfg], capsys)
    assert code == 1 and not json.loads(cap.out)["verdict"]
    cfg = write(tmp_path, "m.json", {"group": {"kind": "finite", "orders": [2, 3]},
                                     "measure": {"masses": [0.5, 0, 0, 0.5, 0, 0]}})
    code, cap = run(["membership", "--config", cfg], capsys)
    assert code == 0 and json.loads(cap.out)["verdict"]
    cfg = write(tmp_path, "m.json", {"counterexample": {}, "which": "g3"})
    assert run(["membership", "--config", cfg], capsys)[0] == 2


# -- sweep -----------------------------------------------------------------------------


def test_sweep_small_ok_and_csv(tmp_path, capsys):
    cfg = write(tmp_path, "w.json", {"max_order": 6, "pairs": 12})
    csv = tmp_path / "rows.csv"
    code, cap = run(["sweep", "--config", cfg, "--csv", str(csv)], capsys)
    assert code == 0
    summary = json.loads(cap.out)["summary"]
    assert summary["agreement_rate"] == 1.0 and summary["violations"] == 0
    lines = csv.read_text().splitlines()
    assert lines[0].startswith("group,alpha,case,family")
    assert len(lines) == 1 + summary["cases"]


def test_sweep_fault_injection_exits_1(tmp_path, capsys):
    cfg = write(tmp_path, "w.json", {"max_order": 4, "pairs": 3, "fault": "convolve"})
    code, cap = run(["sweep", "--config", cfg], capsys)
    assert code == 1
    bad = json.loads(cap.out)["violations"]
    assert bad and bad[0]["family"] in FAMILIES and float(bad[0]["convolution_residual"]) > 1e-3


@pytest.mark.parametrize("cfg", [{"max_order": 1}, {"pairs": 0}, {"families": []}, {"families": ["bogus"]}])
def test_sweep_empty_or_invalid_exits_2(tmp_path, capsys, cfg):
    assert run(["sweep", "--config", write(tmp_path, "w.json", cfg)], capsys)[0] == 2


def test_sweep_deterministic_and_seed_env(tmp_path, capsys, monkeypatch):
    cfg = write(tmp_path, "w.json", {"max_order": 5, "pairs": 6})
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert run(["sweep", "--config", cfg, "--out", str(out), "--csv", str(out) + ".csv"], capsys)[0] == 0
        outs.append((out.read_bytes(), (tmp_path / (name + ".csv")).read_bytes()))
    assert outs[0] == outs[1]
    monkeypatch.setenv("HEYDE_SEED", "5")
    out = tmp_path / "c.json"
    run(["sweep", "--config", cfg, "--out", str(out), "--csv", str(out) + ".csv"], capsys)
    assert json.loads(out.read_text())["summary"]["seed"] == 5
    assert (tmp_path / "c.json.csv").read_bytes() != outs[0][1]
    # explicit flag beats the environment
    run(["sweep", "--config", cfg, "--seed", "0", "--out", str(out)], capsys)
    assert json.loads(out.read_text())["summary"]["seed"] == 0


def test_env_config_and_bad_env_value(tmp_path, capsys, monkeypatch):
    cfg = write(tmp_path, "c.json", {"kappa": 1})
    monkeypatch.setenv("HEYDE_CONFIG", cfg)
    assert run(["counterexample"], capsys)[0] == 1
    monkeypatch.setenv("HEYDE_SEED", "seven")
    assert run(["counterexample"], capsys)[0] == 2


def test_console_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "heyde.cli", "check-symmetry"],
                          capture_output=True, text=True)
    assert proc.returncode == 2  # no measures supplied


# -- scenario helpers -------------------------------------------------------------------


def test_random_pair_families_produce_measures():
    import numpy as np
    spec = GroupSpec.finite(2, 4)
    alpha = automorphisms(spec)[1]
    rng = np.random.default_rng(0)
    for fam in FAMILIES:
        mu1, mu2 = random_pair(spec, alpha, rng, fam)
        assert mu1.spec == spec and abs(mu1.flat.sum() - 1) < 1e-12
    with pytest.raises(ValueError):
        random_pair(spec, alpha, rng, "nope")


def test_shifted_torsion_pairs_pass_oracle():
    spec = GroupSpec.finite(2, 2, 3)
    alpha = Endo(spec, ((0, 1, 0), (1, 1, 0), (0, 0, 1)))
    for mu1, mu2 in shifted_torsion_pairs(spec, alpha, 5, seed=2):
        assert brute_force_conditional_symmetry(mu1, mu2, alpha).verdict
        assert abs(mu1.charfn_table()).min() > 0


def test_run_sweep_rejects_unknown_fault():
    with pytest.raises(ValueError):
        run_sweep(4, 2, fault="gremlin")
