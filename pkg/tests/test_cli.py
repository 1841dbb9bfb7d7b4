import json

import pytest

from latfield.cli import main
from latfield.pauli import deserialize


QUENCH_INI = """
[model]
n_sites = 6
mass = 0.5
coupling = 1.0

[algorithm]
t_max = 1.0
steps = 50
record_every = 5
"""

DEUTERON_INI = """
[run]
seed = 11

[model]
level_count = 2

[algorithm]
budget = 300
"""


def run_cli(subcommand, ini_text, tmp_path, name, extra=()):
    cfg = tmp_path / f"{name}.ini"
    cfg.write_text(ini_text)
    out = tmp_path / name
    code = main([subcommand, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


def read_rows(path):
    rows = []
    header = None
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append(line.split(","))
    return header, rows


class TestQuench:
    def test_trajectory_and_metadata(self, tmp_path):
        code, out = run_cli("schwinger-quench", QUENCH_INI, tmp_path, "quench")
        assert code == 0
        text = (out / "trajectory.csv").read_text()
        assert text.startswith("# run.subcommand = schwinger-quench")
        header, rows = read_rows(out / "trajectory.csv")
        assert header == ["step", "time", "energy", "particle_density", "charge"]
        assert float(rows[0][3]) == 0.0  # exact zero density at t = 0
        assert float(rows[-1][3]) > 0.0
        manifest = json.loads((out / "manifest.json").read_text())
        assert "trajectory.csv" in manifest["outputs"]

    def test_manifest_checksums_match(self, tmp_path):
        import hashlib

        code, out = run_cli("schwinger-quench", QUENCH_INI, tmp_path, "sums")
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        for entry in manifest["outputs"].values():
            digest = hashlib.sha256((out / entry["path"].split("/")[-1]).read_bytes()).hexdigest()
            assert digest == entry["sha256"]

    def test_dump_hamiltonian_flag(self, tmp_path):
        code, out = run_cli(
            "schwinger-quench", QUENCH_INI, tmp_path, "dump", extra=["--dump-hamiltonian"]
        )
        assert code == 0
        h = deserialize((out / "hamiltonian.txt").read_text())
        assert h.n_qubits == 6


class TestDeterminism:
    def test_identical_config_and_seed_reproduce_csv_bytes(self, tmp_path):
        _, out1 = run_cli("deuteron-vqe", DEUTERON_INI, tmp_path, "a")
        _, out2 = run_cli("deuteron-vqe", DEUTERON_INI, tmp_path, "b")
        assert (out1 / "vqe_run.csv").read_bytes() == (out2 / "vqe_run.csv").read_bytes()

    def test_seed_flag_overrides_run_section(self, tmp_path):
        _, out1 = run_cli("deuteron-vqe", DEUTERON_INI, tmp_path, "s1", extra=["--seed", "5"])
        manifest = json.loads((out1 / "manifest.json").read_text())
        assert manifest["config"]["run.seed"] == "5"

    def test_vqe_scan_reproduces_bytes(self, tmp_path):
        ini = """
[model]
n_sites = 4
coupling = 2.0
spacing = 0.5

[algorithm]
mass_min = -0.5
mass_max = 0.5
mass_step = 0.5
method = vqe
layers = 2
budget = 120
"""
        _, out1 = run_cli("phase-scan", ini, tmp_path, "ps1", extra=["--seed", "3"])
        _, out2 = run_cli("phase-scan", ini, tmp_path, "ps2", extra=["--seed", "3"])
        assert (out1 / "scan.csv").read_bytes() == (out2 / "scan.csv").read_bytes()


class TestVqeRuns:
    def test_deuteron_csv_shape_and_energy(self, tmp_path):
        code, out = run_cli("deuteron-vqe", DEUTERON_INI, tmp_path, "deut")
        assert code == 0
        header, rows = read_rows(out / "vqe_run.csv")
        assert header == ["evaluation", "energy", "variance", "param_0"]
        energies = [float(r[1]) for r in rows]
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["summary"]["energy"] == pytest.approx(min(energies))

    def test_schwinger_vqe_runs(self, tmp_path):
        ini = """
[model]
n_sites = 4
mass = 0.3
coupling = 1.0

[algorithm]
layers = 2
budget = 120
"""
        code, out = run_cli("schwinger-vqe", ini, tmp_path, "svqe")
        assert code == 0
        header, rows = read_rows(out / "vqe_run.csv")
        assert header[:3] == ["evaluation", "energy", "variance"]
        assert len(header) == 3 + 1 + 4  # one global angle + four local angles


class TestPhaseScanCli:
    def test_dense_method_columns(self, tmp_path):
        ini = """
[model]
n_sites = 6
coupling = 2.0
spacing = 0.5

[algorithm]
mass_min = -1.0
mass_max = 0.0
mass_step = 0.5
method = dense
"""
        code, out = run_cli("phase-scan", ini, tmp_path, "scan")
        assert code == 0
        header, rows = read_rows(out / "scan.csv")
        assert header == ["mass", "energy", "variance", "order_parameter"]
        assert len(rows) == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert "steepest_change_mass" in manifest["summary"]


class TestStructureCli:
    def test_correlator_and_pdf(self, tmp_path):
        ini = """
[model]
n_sites = 6
mass = 0.5
coupling = 0.8

[algorithm]
t_max = 1.0
t_steps = 3
p_plus = 1.0
"""
        code, out = run_cli("thirring-correlator", ini, tmp_path, "corr")
        assert code == 0
        header, rows = read_rows(out / "correlator.csv")
        assert header == ["y", "t", "re", "im"]
        assert len(rows) == 5 * 3  # positions x times
        header, rows = read_rows(out / "pdf.csv")
        assert header == ["x_or_q", "re", "im"]

    def test_tensor_runs(self, tmp_path):
        ini = """
[model]
n_sites = 4
mass = 0.5
coupling = 0.8

[algorithm]
charge = 1
t_max = 2.0
t_steps = 4
omega_min = 0.0
omega_max = 2.0
omega_steps = 5
momentum = 0.5
"""
        code, out = run_cli("hadronic-tensor", ini, tmp_path, "tensor")
        assert code == 0
        header, rows = read_rows(out / "tensor.csv")
        assert header == ["x_or_q", "re", "im"]
        assert len(rows) == 5


class TestThermalCli:
    def test_thermal_run_with_gibbs_dump(self, tmp_path):
        ini = """
[model]
n_sites = 4
mass = 0.6
coupling = 0.9

[algorithm]
beta = 0.8
quench_mass = 0.2
quench_coupling = 1.2
t_max = 1.0
t_steps = 3
threshold = 0.001
dump_gibbs = true
"""
        code, out = run_cli("thermal", ini, tmp_path, "thermal")
        assert code == 0
        header, rows = read_rows(out / "thermal.csv")
        assert header == ["t", "observable", "n_entries", "threshold"]
        assert (out / "gibbs.bin").exists()
        for row in rows:
            float(row[1])  # parseable values, no numpy repr leakage
            assert "np." not in row[1]


class TestErrorPaths:
    def test_missing_key_names_it(self, tmp_path, capsys):
        ini = """
[model]
n_sites = 6
coupling = 1.0

[algorithm]
t_max = 1.0
steps = 10
"""
        code, _ = run_cli("schwinger-quench", ini, tmp_path, "missing")
        assert code == 2
        assert "mass" in capsys.readouterr().err

    def test_unknown_key_rejected(self, tmp_path, capsys):
        ini = QUENCH_INI + "\nwiggle = 3\n"
        code, _ = run_cli("schwinger-quench", ini, tmp_path, "unknown")
        assert code == 2
        assert "wiggle" in capsys.readouterr().err

    def test_resource_cap_exit_code(self, tmp_path):
        ini = """
[model]
n_sites = 16
mass = 0.5
coupling = 0.8

[algorithm]
t_max = 1.0
t_steps = 3
p_plus = 1.0
"""
        code, _ = run_cli("thirring-correlator", ini, tmp_path, "cap")
        assert code == 3

    def test_unreadable_config(self, tmp_path):
        code = main(
            ["schwinger-quench", "--config", str(tmp_path / "absent.ini"), "--out", str(tmp_path)]
        )
        assert code == 2
