"""End-to-end tests of the command-line interface (exit codes and files)."""

import json
import subprocess
import sys

import numpy as np
import pytest

from qleb import cli, matio, models


def run_cli(*argv):
    return cli.main(list(argv))


@pytest.fixture
def pair_files(tmp_path):
    rng = np.random.default_rng(31)
    z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    rho = z @ z.conj().T
    rho /= np.trace(rho).real
    w = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    sigma = w @ w.conj().T
    sigma /= np.trace(sigma).real
    rho_path = tmp_path / "rho.json"
    sigma_path = tmp_path / "sigma.json"
    matio.dump_matrix(rho, rho_path)
    matio.dump_matrix(sigma, sigma_path)
    return str(rho_path), str(sigma_path)


def write_matrix(tmp_path, name, m):
    path = tmp_path / name
    matio.dump_matrix(np.asarray(m, dtype=complex), path)
    return str(path)


class TestDecompose:
    def test_report_file(self, pair_files, tmp_path, capsys):
        rho, sigma = pair_files
        out = tmp_path / "dec.json"
        assert run_cli("decompose", "--rho", rho, "--sigma", sigma,
                       "--out", str(out)) == 0
        doc = json.loads(out.read_text())
        assert doc["config"]["command"] == "decompose"
        assert set(doc["payload"]) == {"block", "direct", "route_gap"}
        assert doc["payload"]["block"]["route"] == "block"
        assert doc["payload"]["route_gap"] <= 1e-8
        printed = capsys.readouterr().out
        assert f"wrote {out}" in printed
        assert "route gap" in printed

    def test_reruns_are_byte_identical(self, pair_files, tmp_path):
        rho, sigma = pair_files
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        run_cli("decompose", "--rho", rho, "--sigma", sigma, "--out", str(a))
        run_cli("decompose", "--rho", rho, "--sigma", sigma, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_stdout_mode(self, pair_files, capsys):
        rho, sigma = pair_files
        assert run_cli("decompose", "--rho", rho, "--sigma", sigma) == 0
        lines = capsys.readouterr().out.splitlines()
        json.loads(lines[0])

    def test_route_disagreement_exit_code(self, pair_files, capsys):
        rho, sigma = pair_files
        # generic pair: the two routes agree to rounding but not exactly
        assert run_cli("decompose", "--rho", rho, "--sigma", sigma,
                       "--route-tol", "0.0") == 3
        assert "routes disagree" in capsys.readouterr().err

    def test_malformed_input(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        ok = write_matrix(tmp_path, "ok.json", np.eye(2))
        assert run_cli("decompose", "--rho", str(bad), "--sigma", ok) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        ok = write_matrix(tmp_path, "ok.json", np.eye(2))
        assert run_cli("decompose", "--rho", str(tmp_path / "nope.json"),
                       "--sigma", ok) == 2

    def test_non_hermitian_input(self, tmp_path, capsys):
        ok = write_matrix(tmp_path, "ok.json", np.eye(2))
        lopsided = write_matrix(tmp_path, "lopsided.json",
                                [[1.0, 0.1], [0.1001, 1.0]])
        assert run_cli("decompose", "--rho", ok, "--sigma", lopsided) == 2
        # widening the tolerance admits (and symmetrizes) it
        assert run_cli("decompose", "--rho", ok, "--sigma", lopsided,
                       "--hermitian-tol", "1e-3") == 0

    def test_csv_rejected(self, pair_files, capsys):
        rho, sigma = pair_files
        assert run_cli("decompose", "--rho", rho, "--sigma", sigma,
                       "--format", "csv") == 2


class TestCheck:
    def test_singular_true(self, tmp_path, capsys):
        rho = write_matrix(tmp_path, "r.json", np.diag([1.0, 0.0]))
        sigma = write_matrix(tmp_path, "s.json", np.diag([0.0, 1.0]))
        assert run_cli("check", "singular", "--rho", rho, "--sigma", sigma) == 0
        out = capsys.readouterr().out
        assert "singular: True" in out and "criteria consistent: True" in out

    def test_singular_false(self, tmp_path):
        rho = write_matrix(tmp_path, "r.json", np.diag([1.0, 0.0]))
        sigma = write_matrix(tmp_path, "s.json", np.full((2, 2), 0.5))
        assert run_cli("check", "singular", "--rho", rho, "--sigma", sigma) == 1

    def test_ac_true(self, tmp_path, capsys):
        rho = write_matrix(tmp_path, "r.json", np.diag([1.0, 0.0]))
        sigma = write_matrix(tmp_path, "s.json", np.full((2, 2), 0.5))
        assert run_cli("check", "ac", "--rho", rho, "--sigma", sigma) == 0
        assert "witness residual" in capsys.readouterr().out

    def test_ac_false(self, tmp_path):
        rho = write_matrix(tmp_path, "r.json", np.eye(2) / 2)
        sigma = write_matrix(tmp_path, "s.json", np.diag([1.0, 0.0]))
        assert run_cli("check", "ac", "--rho", rho, "--sigma", sigma) == 1

    def test_mutual(self, tmp_path):
        rho = write_matrix(tmp_path, "r.json", np.diag([0.6, 0.4]))
        sigma = write_matrix(tmp_path, "s.json", np.diag([0.3, 0.7]))
        assert run_cli("check", "mutual", "--rho", rho, "--sigma", sigma) == 0

    def test_unknown_predicate(self, tmp_path):
        rho = write_matrix(tmp_path, "r.json", np.eye(2))
        with pytest.raises(SystemExit) as exc:
            run_cli("check", "bogus", "--rho", rho, "--sigma", rho)
        assert exc.value.code == 2


class TestQlan:
    def test_qclt_pass(self, tmp_path, capsys):
        out = tmp_path / "rep.json"
        rc = run_cli("qlan", "--model", "spin-pure", "--n", "100,1000",
                     "--xi", "1,0", "--out", str(out))
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["payload"]["verdict"] == "pass"
        assert doc["config"]["model"] == "spin-pure"
        assert doc["config"]["study"] == "qclt"
        assert "study qclt: pass" in capsys.readouterr().out

    def test_oh2_control_fails(self, capsys):
        rc = run_cli("qlan", "--model", "spin-perturbed:squared", "--study", "oh2")
        assert rc == 1
        assert "study oh2: fail" in capsys.readouterr().out

    def test_multi_study_file_naming(self, tmp_path):
        out = tmp_path / "multi.json"
        rc = run_cli("qlan", "--model", "spin-perturbed:quartic",
                     "--study", "qclt", "--study", "oh2",
                     "--n", "100,1000", "--xi", "1,0", "--out", str(out))
        assert rc == 0
        qclt = json.loads((tmp_path / "multi.qclt.json").read_text())
        oh2 = json.loads((tmp_path / "multi.oh2.json").read_text())
        assert qclt["payload"]["verdict"] == "pass"
        assert oh2["payload"]["verdict"] == "pass"
        assert not out.exists()

    def test_csv_output(self, tmp_path):
        out = tmp_path / "rep.csv"
        rc = run_cli("qlan", "--model", "spin-pure", "--n", "100,1000",
                     "--xi", "1,0", "--format", "csv", "--out", str(out))
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "n,error" and lines[1].startswith("100,")

    def test_reruns_are_byte_identical(self, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        for out in (a, b):
            run_cli("qlan", "--model", "spin-pure", "--n", "100,1000",
                    "--xi", "1,0", "--out", str(out))
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize("n_arg", ["100", "0,10", "2.5,10", ""])
    def test_n_grid_validation(self, n_arg, capsys):
        assert run_cli("qlan", "--model", "spin-pure", "--n", n_arg,
                       "--xi", "1,0") == 2

    def test_unknown_model(self, capsys):
        assert run_cli("qlan", "--model", "xyz", "--xi", "1,0") == 2
        assert "unknown model" in capsys.readouterr().err

    def test_env_cutoff_is_recorded(self, tmp_path, monkeypatch):
        out = tmp_path / "rep.json"
        monkeypatch.setenv("QLEB_CUTOFF", "1e-09")
        run_cli("qlan", "--model", "spin-pure", "--n", "100,1000",
                "--xi", "1,0", "--out", str(out))
        assert json.loads(out.read_text())["config"]["cutoff"] == 1e-9

    def test_flag_overrides_env_cutoff(self, tmp_path, monkeypatch):
        out = tmp_path / "rep.json"
        monkeypatch.setenv("QLEB_CUTOFF", "1e-09")
        run_cli("qlan", "--model", "spin-pure", "--n", "100,1000",
                "--xi", "1,0", "--cutoff", "1e-10", "--out", str(out))
        assert json.loads(out.read_text())["config"]["cutoff"] == 1e-10

    def test_bad_env_cutoff(self, monkeypatch, capsys):
        monkeypatch.setenv("QLEB_CUTOFF", "lots")
        assert run_cli("qlan", "--model", "spin-pure", "--n", "100,1000",
                       "--xi", "1,0") == 2

    def test_support_violation_exit_code(self, tmp_path, capsys):
        # table model: differentiable at theta0 (the finite-difference probe
        # points are tabulated as pure states) but the tabulated states at the
        # local shifts h / sqrt(n) are orthogonal to the base state
        t0 = np.zeros(2)
        h = np.asarray([0.3, 0.1])
        grid = [t0]
        for i in range(2):
            e = np.zeros(2)
            e[i] = 1.0
            for s in (1e-5, 5e-6):
                grid.append(t0 + s * e)
                grid.append(t0 - s * e)
        states = [models.spin_pure_state(t) for t in grid]
        for n in (100, 1000):
            grid.append(t0 + h / np.sqrt(n))
            states.append(np.diag([0.0, 1.0]))
        doc = {
            "name": "broken-shift",
            "dim": 2,
            "theta_dim": 2,
            "theta0": [0.0, 0.0],
            "states": [
                {"theta": [float(x) for x in t],
                 "matrix": matio.matrix_to_json_dict(s)}
                for t, s in zip(grid, states)
            ],
        }
        path = tmp_path / "table.json"
        path.write_text(json.dumps(doc))
        rc = run_cli("qlan", "--model", f"table:{path}", "--study", "lecam",
                     "--h", "0.3,0.1", "--n", "100,1000", "--xi", "1,0")
        assert rc == 4
        err = capsys.readouterr().err
        assert "support violation" in err and "n = 100" in err


class TestParseXi:
    def test_real_vector(self):
        vec = cli._parse_xi("1,0.5")
        assert vec.dtype == np.float64
        np.testing.assert_array_equal(vec, [1.0, 0.5])

    def test_complex_components(self):
        vec = cli._parse_xi("1:0.5,-2")
        assert vec.dtype == np.complex128
        np.testing.assert_array_equal(vec, [1.0 + 0.5j, -2.0 + 0.0j])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            cli._parse_xi(" , ")


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli("--version")
    assert exc.value.code == 0
    assert capsys.readouterr().out.startswith("qleb ")


def test_console_script_is_wired():
    proc = subprocess.run(["qleb", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("qleb ")


def test_module_entrypoint():
    proc = subprocess.run([sys.executable, "-m", "qleb.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
