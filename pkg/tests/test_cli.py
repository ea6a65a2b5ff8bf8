import csv

import pytest

from grpburgers.cli import EXIT_BLOWUP, EXIT_CHECK, EXIT_CONFIG, EXIT_OK, load_config, main
from grpburgers.errors import ConfigError


def write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


SINE = "[run]\ndim = 2\nn = 8\nt_end = 0.05\noutput_every = 2\n[initial]\nkind = sine\n"


def test_missing_config_names_path(tmp_path, capsys):
    missing = tmp_path / "nope.ini"
    assert main(["run", "--config", str(missing)]) == EXIT_CONFIG
    assert str(missing) in capsys.readouterr().err


def test_c1_out_of_range(tmp_path, capsys):
    cfg = write(tmp_path, "[run]\nc1 = 0.1\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "1/24" in capsys.readouterr().err


@pytest.mark.parametrize("text", [
    "[run]\nspeed = 1\n", "[solver]\nn = 4\n", "[run]\np = 1.2\n", "[run]\ncfl = 2\n",
    "[run]\nn = four\n", "[initial]\nkind = gauss\n", "[initial]\nkind = riemann\nmean = 1\n",
    "[run]\nentropy_inequality = maybe\n", "[experiment]\ncommand = plot\n",
])
def test_config_rejections(tmp_path, text):
    cfg = write(tmp_path, text)
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_load_config_types(tmp_path):
    cfg = load_config(write(tmp_path, SINE + "[convergence]\nlevels = 8, 16\n"
                            "[audit]\ndt_over_h = 0.1 0.5\n"))
    assert cfg["run"]["n"] == 8 and cfg["convergence"]["levels"] == [8, 16]
    assert cfg["audit"]["dt_over_h"] == [0.1, 0.5]
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "n = 4\n[run]\n", "top.ini"))


def test_run_writes_snapshots_and_report(tmp_path):
    cfg = write(tmp_path, SINE)
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    summary = dict(rows(out / "run_summary.csv")[1:])
    steps = int(summary["steps"])
    report = rows(out / "entropy_report.csv")
    assert report[0][0] == "t" and len(report) == 1 + steps
    snaps = sorted(out.glob("snapshot_*.csv"))
    assert len(snaps) >= 2 and rows(snaps[0])[0] == ["i0", "i1", "x0", "x1", "value"]
    assert float(summary["mass_drift"]) <= 1e-12


def test_run_is_byte_deterministic(tmp_path):
    cfg = write(tmp_path, SINE)
    for d in ("a", "b"):
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / d)]) == EXIT_OK
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_command_from_config(tmp_path):
    out = tmp_path / "res"
    cfg = write(tmp_path, SINE + f"[experiment]\ncommand = entropy-report\nout = {out}\n")
    assert main(["--config", str(cfg)]) == EXIT_OK
    assert (out / "entropy_report.csv").exists() and (out / "entropy_summary.csv").exists()
    assert not list(out.glob("snapshot_*"))


def test_entropy_inequality_summary(tmp_path):
    cfg = write(tmp_path, SINE.replace("t_end = 0.05", "t_end = 0.05\nentropy_inequality = true"))
    out = tmp_path / "o"
    assert main(["entropy-report", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    summary = dict(rows(out / "entropy_summary.csv")[1:])
    assert summary["entropy_inequality_passed"] == "true"


def test_audit_empty_and_deterministic(tmp_path):
    cfg = write(tmp_path, "[audit]\nsamples = 0\n")
    assert main(["audit", "--config", str(cfg), "--out", str(tmp_path / "e")]) == EXIT_OK
    assert len(rows(tmp_path / "e" / "audit.csv")) == 1
    cfg = write(tmp_path, "[audit]\nsamples = 3000\n", "a.ini")
    for d in ("a", "b"):
        assert main(["audit", "--config", str(cfg), "--out", str(tmp_path / d),
                     "--seed", "11"]) == EXIT_OK
    assert (tmp_path / "a" / "audit.csv").read_bytes() == (tmp_path / "b" / "audit.csv").read_bytes()
    body = rows(tmp_path / "a" / "audit.csv")[1:]
    assert {r[5] for r in body} == {"0"}


def test_convergence_three_levels(tmp_path):
    cfg = write(tmp_path, "[run]\ndim = 1\nn = 16\nt_end = 0.3\n")
    out = tmp_path / "o"
    assert main(["convergence", "--config", str(cfg), "--out", str(out), "--levels", "3"]) == EXIT_OK
    table = rows(out / "convergence.csv")
    l1 = [float(r[4]) for r in table[1:]]
    assert len(l1) == 3 and l1[0] > l1[1] > l1[2]


def test_convergence_single_level(tmp_path):
    cfg = write(tmp_path, "[run]\ndim = 1\nn = 16\nt_end = 0.1\n")
    out = tmp_path / "o"
    assert main(["convergence", "--config", str(cfg), "--out", str(out), "--levels", "1"]) == EXIT_OK
    table = rows(out / "convergence.csv")
    assert len(table) == 2 and table[1][7:10] == ["", "", ""]


def test_convergence_unstabilized_flags_failures(tmp_path):
    cfg = write(tmp_path, "[run]\ndim = 1\nn = 16\nt_end = 0.2\nscheme = grp\n"
                          "[initial]\nkind = riemann\n[convergence]\nlevels = 16, 32\n")
    out = tmp_path / "o"
    assert main(["convergence", "--config", str(cfg), "--out", str(out)]) == EXIT_CHECK
    check = rows(out / "entropy_check.csv")
    assert check[0][-1] == "stability_violations"
    assert all(int(r[-1]) > 0 for r in check[1:])


def test_blowup_exit_code(tmp_path):
    # the scheme is stable under the CFL cap; overflow of u^2 is what breaks it
    cfg = write(tmp_path, "[run]\ndim = 1\nn = 16\nt_end = 0.1\n"
                          "[initial]\nkind = sine\nmean = 0\namplitude = 1e200\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_BLOWUP
