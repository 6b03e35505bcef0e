import csv

import pytest

from qfreq.commands import verify
from qfreq.curve_eval import dump_curve, make_constant_curve
from qfreq.errors import EXIT_INVARIANT, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE
from qfreq.main import main


def read_rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


@pytest.fixture
def sqrt_file(tmp_path, sqrt_curve):
    path = tmp_path / "sqrt.json"
    dump_curve(sqrt_curve, path, label="w^2 = z")
    return path


@pytest.fixture
def identity_file(tmp_path, identity_curve):
    path = tmp_path / "identity.json"
    dump_curve(identity_curve, path)
    return path


def test_help():
    assert main(["--help"]) == EXIT_OK


def test_unknown_command():
    assert main(["explode"]) == EXIT_USAGE


def test_frequency_of_example(tmp_path):
    out = tmp_path / "out"
    argv = ["frequency", "--example", "g", "--eps", "0.1", "--rmin", "0.01", "--rmax", "2", "--samples", "6"]
    assert main(argv + ["--out", str(out)]) == EXIT_OK
    rows = read_rows(out / "profile.csv")
    assert len(rows) == 6
    assert float(rows[-1]["I"]) == pytest.approx(1.0, abs=0.05)
    assert float(rows[0]["I"]) == pytest.approx(0.5, abs=0.05)
    assert (out / "profile.gp").is_file()


def test_frequency_of_curve_file(tmp_path, sqrt_file):
    out = tmp_path / "out"
    assert main(["frequency", "--curve", str(sqrt_file), "--samples", "5", "--out", str(out)]) == EXIT_OK
    for row in read_rows(out / "profile.csv"):
        assert float(row["I"]) == pytest.approx(0.5, abs=1e-4)


def test_frequency_output_is_deterministic(tmp_path, sqrt_file):
    argv = ["frequency", "--curve", str(sqrt_file), "--samples", "4", "--out"]
    assert main(argv + [str(tmp_path / "a")]) == EXIT_OK
    assert main(argv + [str(tmp_path / "b")]) == EXIT_OK
    assert (tmp_path / "a" / "profile.csv").read_bytes() == (tmp_path / "b" / "profile.csv").read_bytes()


def test_usage_errors(tmp_path, sqrt_file):
    out = ["--out", str(tmp_path)]
    assert main(["frequency", "--curve", str(tmp_path / "missing.json")] + out) == EXIT_USAGE
    assert main(["frequency"] + out) == EXIT_USAGE
    assert main(["frequency", "--curve", str(sqrt_file), "--example", "g"] + out) == EXIT_USAGE
    assert main(["count", "--example", "g", "--lambda", "0.5"] + out) == EXIT_USAGE
    assert main(["frequency", "--example", "g", "--rmin", "2", "--rmax", "1"] + out) == EXIT_USAGE


def test_malformed_curve_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"degree_w": 2}')
    assert main(["frequency", "--curve", str(path), "--out", str(tmp_path)]) == EXIT_USAGE


def test_singular_of_two_valued_example(tmp_path, capsys):
    assert main(["singular", "--example", "g", "--eps", "0.1", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "singular.csv")
    assert [row["is_full_multiplicity"] for row in rows] == ["1", "1"]
    assert "count=2" in capsys.readouterr().out


def test_singular_of_four_valued_example(tmp_path, capsys):
    assert main(["singular", "--example", "f", "--eps", "0.001", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "singular.csv")
    assert len(rows) == 4
    assert sum(row["is_full_multiplicity"] == "1" for row in rows) == 1
    assert "count=1" in capsys.readouterr().out


def test_singular_of_single_valued_map(tmp_path, identity_file, capsys):
    assert main(["singular", "--curve", str(identity_file), "--out", str(tmp_path)]) == EXIT_OK
    assert read_rows(tmp_path / "singular.csv") == []
    assert "count=0" in capsys.readouterr().out


def test_count(tmp_path, capsys):
    assert main(["count", "--example", "g", "--eps", "0.1", "--out", str(tmp_path)]) == EXIT_OK
    line = capsys.readouterr().out
    assert "count=2" in line
    assert "cert=(4/0.1^2)^1=400" in line
    assert (tmp_path / "certificate.txt").read_text().startswith("count=2")
    trace = (tmp_path / "trace.csv").read_text().splitlines()
    assert trace[0] == "level,center_re,center_im,N_k,J_k,xi"
    assert trace[-1].startswith("# summary")


def test_count_of_homogeneous_map(tmp_path, sqrt_file, capsys):
    assert main(["count", "--curve", str(sqrt_file), "--out", str(tmp_path)]) == EXIT_OK
    line = capsys.readouterr().out
    assert "count=1" in line
    assert "^0=1" in line


def test_count_with_oversized_delta(tmp_path):
    assert main(["count", "--example", "g", "--delta", "10", "--out", str(tmp_path)]) == EXIT_NUMERIC


def test_verify(tmp_path, capsys):
    argv = ["verify", "--example", "g", "--eps", "0.1", "--rmin", "0.05", "--rmax", "1", "--samples", "5"]
    assert main(argv + ["--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "verify.csv")
    checks = {row["check"] for row in rows}
    assert {"nondecreasing", "monotonicity_identity", "height_sandwich", "poincare"} <= checks
    assert all(row["passed"] == "1" for row in rows)


def test_verify_single_valued_map(tmp_path, identity_file):
    argv = ["verify", "--curve", str(identity_file), "--rmin", "0.1", "--rmax", "1", "--samples", "5"]
    assert main(argv + ["--out", str(tmp_path)]) == EXIT_OK


def test_verify_reports_corrupted_profile(tmp_path, sqrt_file, monkeypatch):
    def corrupt(profile):
        values = list(profile.I)
        values[-1] = values[0] - 0.1
        return profile.model_copy(update={"I": values})

    monkeypatch.setattr(verify, "profile_hook", corrupt)
    argv = ["verify", "--curve", str(sqrt_file), "--rmin", "0.1", "--rmax", "1", "--samples", "5"]
    assert main(argv + ["--out", str(tmp_path)]) == EXIT_INVARIANT


def test_minimize(tmp_path, sqrt_file, capsys):
    argv = ["minimize", "--curve", str(sqrt_file), "--resolution", "10", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    for name in ("vertices.csv", "edges.csv", "labels.csv", "convergence.csv", "discrete_profile.csv"):
        assert (tmp_path / name).is_file()
    assert len(read_rows(tmp_path / "vertices.csv")) == 1 + 3 * 10 * 11
    assert "energy=" in capsys.readouterr().out


def test_minimize_single_valued_map(tmp_path, identity_file):
    argv = ["minimize", "--curve", str(identity_file), "--resolution", "10", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    rows = read_rows(tmp_path / "convergence.csv")
    assert [row["iteration"] for row in rows] == ["0", "1"]


def test_minimize_with_iteration_cap_zero(tmp_path, sqrt_file):
    argv = ["minimize", "--curve", str(sqrt_file), "--resolution", "6", "--max-iter", "0", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    assert len(read_rows(tmp_path / "convergence.csv")) == 1


def test_minimize_of_constant_map(tmp_path):
    path = tmp_path / "zero.json"
    dump_curve(make_constant_curve(2), path)
    argv = ["minimize", "--curve", str(path), "--resolution", "5", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    assert not (tmp_path / "discrete_profile.csv").exists()
