import csv
import io
import json
import subprocess
import sys

import pytest

from mertens_ising import cli
from mertens_ising.checkpoint import checkpoint_read


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("text, value", [("10", 10), ("10^6", 10**6), ("2*10^6", 2 * 10**6),
                                         ("1e6", 10**6), ("1_000", 1000)])
def test_parse_count(text, value):
    assert cli.parse_count(text) == value


@pytest.mark.parametrize("text", ["0", "-3", "1.5", "ten"])
def test_parse_count_rejects(text):
    with pytest.raises(Exception):
        cli.parse_count(text)


def test_mertens_examples(capsys):
    assert run(capsys, "mertens", "10")[:2] == (0, "-1\n")
    assert run(capsys, "mertens", "1")[:2] == (0, "1\n")
    assert run(capsys, "mertens", "10^6", "--method", "both")[:2] == (0, "212\n")
    assert run(capsys, "mertens", "1000", "--method", "recurrence")[:2] == (0, "2\n")


def test_config_line_first(capsys):
    _, _, err = run(capsys, "mertens", "10")
    first = err.splitlines()[0]
    assert first.startswith("# config {")
    cfg = json.loads(first[len("# config "):])
    assert cfg["command"] == "mertens" and cfg["n"] == 10 and cfg["backend"] in ("numba", "numpy")
    assert run(capsys, "mertens", "10", "-q")[2] == ""


def test_mertens_disagreement_exit_3(capsys, monkeypatch):
    monkeypatch.setattr(cli, "mertens_recurrence", lambda n: 999)
    code, out, err = run(capsys, "mertens", "100", "--method", "both")
    assert code == 3 and out == "" and "disagree" in err


def test_mertens_checkpoint_resume(capsys, tmp_path):
    ck = tmp_path / "m.ckpt"
    assert run(capsys, "mertens", "10^6", "--checkpoint", str(ck))[:2] == (0, "212\n")
    assert checkpoint_read(ck).n == 10**6
    code, out, err = run(capsys, "mertens", "2*10^6", "--checkpoint", str(ck))
    assert "resuming from checkpoint n=1000000" in err
    fresh = run(capsys, "mertens", "2*10^6")[1]
    assert out == fresh
    assert checkpoint_read(ck).n == 2 * 10**6


def test_mertens_corrupt_checkpoint_exit_2(capsys, tmp_path):
    ck = tmp_path / "m.ckpt"
    ck.write_text("mertens-checkpoint v1\nmethod=linear-sieve\nn=10\nM=-1\ncrc32=00000000\n")
    assert run(capsys, "mertens", "20", "--checkpoint", str(ck))[0] == 2


def test_partition_examples(capsys):
    code, out, _ = run(capsys, "partition", "3", "--x", "2", "--y", "1", "--check-bruteforce")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "Q=41" and "bruteforce=41" in lines and lines[-1].startswith("check=OK")
    assert run(capsys, "partition", "2", "--x", "1", "--y", "1")[1].splitlines()[0] == "Q=9"
    out = run(capsys, "partition", "1000", "--x", "1", "--y", "2.718")[1]
    assert out.splitlines()[0] == "Q=overflow (log-domain result)"
    assert out.splitlines()[1] == "lnQ=1407.55"


def test_partition_eigen(capsys):
    out = run(capsys, "partition", "4", "--y", "2", "--eigen")[1]
    assert "eigenvalues=3.5,0,0" in out


def test_partition_too_long_for_bruteforce(capsys):
    assert run(capsys, "partition", "20", "--check-bruteforce")[0] == 2


def test_bounds_examples(capsys):
    assert run(capsys, "bounds", "10000", "--bound", "rw_cheb", "--alpha", "0.05")[1] == "365.148\n"
    assert run(capsys, "bounds", "79", "--bound", "macleod")[1] == "6.5\n"
    assert run(capsys, "bounds", "10000", "--bound", "rw_cheb", "--precision", "10")[1] == "365.1483717\n"


def test_bounds_domain_error_exit_2(capsys):
    code, out, err = run(capsys, "bounds", "142193", "--bound", "elmarraki_sqrtlog")
    assert code == 2 and "142194" in err


def test_bounds_all_and_compare(capsys):
    code, out, _ = run(capsys, "bounds", "1000", "--all", "--compare")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 13
    byname = {r["bound_name"]: r for r in rows}
    assert byname["ramare"]["value"] == "domain-error"
    assert byname["macleod"]["M"] == "2" and byname["macleod"]["satisfied"] == "true"
    js = json.loads(run(capsys, "bounds", "1000", "--all", "--format", "json")[1])
    assert len(js) == 13


def test_bounds_list(capsys):
    out = run(capsys, "bounds", "--list")[1]
    assert len(out.splitlines()) == 13
    assert "elmarraki_sqrtlog\tparams=-\tvalid_from=142194\ttheorem" in out


def test_sweep_csv_and_summary(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "10^4", "--bound", "macleod", "--bound", "statmech3:beta=2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["n"] for r in rows[:5]] == ["1", "10", "100", "1000", "10000"]
    out = run(capsys, "sweep", "1000", "--grid", "all", "--format", "summary", "--bound", "macleod")[1]
    assert "0.894427 at n=5" in out
    gp = tmp_path / "gp"
    run(capsys, "sweep", "100", "--bound", "macleod", "--gnuplot-dir", str(gp))
    assert (gp / "macleod.dat").exists()


def test_sweep_output_file(capsys, tmp_path):
    target = tmp_path / "s.json"
    code, out, _ = run(capsys, "sweep", "100", "--bound", "macleod", "--format", "json", "-o", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())[0]["bound_name"] == "macleod"


def test_simulate_example(capsys):
    code, out, _ = run(capsys, "simulate", "--model", "uniform3", "--n", "10000", "--trials", "10000",
                       "--bound", "rw_cheb", "--alpha", "0.05")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1
    assert tuple(rows[0]) == ("model", "n", "beta", "alpha", "bound", "trials", "rate", "ci")
    assert float(rows[0]["rate"]) <= 0.05


def test_simulate_repeatable(capsys):
    argv = ("simulate", "--model", "canonical", "--beta", "0.5", "--n", "300", "--trials", "2000", "--seed", "9")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_moments_and_trajectory(capsys):
    out = run(capsys, "moments", "--model", "canonical", "--beta", "1", "--n", "1000", "--samples", "20000")[1]
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["expected_mean"] == "575.21"
    out = run(capsys, "trajectory", "--limit", "10", "--trials", "100")[1]
    assert out.splitlines()[-1].startswith("# fraction_below=")
    assert [r["M"] for r in csv.DictReader(io.StringIO("\n".join(out.splitlines()[:-1])))] == \
        ["1", "0", "-1", "-1", "-2", "-1", "-2", "-2", "-2", "-1"]


def test_crossover_cli(capsys):
    assert run(capsys, "crossover", "statmech3:beta=1", "rw_cheb:alpha=0.05")[1] == "7\n"
    out = run(capsys, "crossover", "ramare", "macleod", "--hi", "1000")[1]
    assert out.startswith("# domains do not overlap")


@pytest.mark.parametrize("argv", [["frobnicate"], ["mertens"], ["mertens", "ten"], ["bounds", "10", "--bogus"],
                                  ["simulate", "--trials", "10"], ["sweep", "10", "--format", "xml"]])
def test_usage_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 1
    assert "usage:" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["bounds", "10", "--bound", "nope"], ["simulate", "--n", "10", "--alpha", "2"],
                                  ["simulate", "--model", "uniform3", "--beta", "1", "--n", "10"],
                                  ["sweep", "10", "--grid", "random"]])
def test_domain_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_theorem_violation_exit_3(capsys, monkeypatch):
    import numpy as np

    from mertens_ising import verify_harness
    from mertens_ising.mobius_core import MertensTable

    def fake_prefix(limit, **kw):
        return MertensTable(1, np.full(limit, 100, dtype=np.int64), "trial")

    monkeypatch.setattr(verify_harness, "mertens_prefix", fake_prefix)
    assert run(capsys, "sweep", "100", "--bound", "macleod")[0] == 3


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "mertens_ising.cli", "mertens", "100", "-q"],
                         capture_output=True, text=True, check=True)
    assert res.stdout == "1\n" and res.stderr == ""
