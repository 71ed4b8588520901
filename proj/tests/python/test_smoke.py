import json
import math
import os
import subprocess
import sys
import tempfile

import numpy as np
import pytest

try:
    import nearbyorbit as no
except ImportError:
    import _core as no  # build-tree layout


def test_coherent_state_values():
    s = no.SqueezedState.coherent([0.0, 0.0], 1.0)
    vals = no.evaluate(s, np.array([0.0]))
    assert abs(vals[0] - math.pi ** -0.25) < 1e-14
    assert abs(no.wigner(s, [0.0, 0.0]) - 1.0 / math.pi) < 1e-14


def test_norm_by_quadrature():
    m = np.array([[0.4 + 1.7j]])  # M = i(X + iY) with X = 1.7, Y = -0.4
    s = no.SqueezedState([0.3, -0.2], m, 0.5)
    x = np.linspace(-10, 10, 4001)
    vals = no.evaluate(s, x)
    norm = np.sqrt(np.trapezoid(np.abs(vals) ** 2, x))
    assert abs(norm - 1.0) < 1e-8


def test_symplectic_helpers():
    j = no.symplectic_j(1)
    assert no.is_symplectic(j)
    assert no.symplectic_form([1.0, 0.0], [0.0, 1.0]) == -1.0
    s = no.random_symplectic(2, seed=42)
    assert no.is_symplectic(s)
    m = no.cayley_transform(no.symplectic_j(1))
    assert np.allclose(m, 0.5 * np.eye(2))


def test_alpha_rotation_fixes_standard_state():
    theta = 0.9
    rot = np.array([[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]])
    m = no.alpha(rot, np.array([[1j]]))
    assert abs(m[0, 0] - 1j) < 1e-12


def test_harmonic_period_double_cover():
    s = no.SqueezedState.coherent([1.0, 0.0], 0.1)
    out = no.propagate_coherent("harmonic", 1.0, s, 2.0 * math.pi, 1e-3)
    assert np.allclose(out["center"], [1.0, 0.0], atol=1e-6)
    assert abs(out["phase"] + 1.0) < 1e-6
    assert abs(out["gamma"]) < 1e-8


def test_propagation_matches_reference():
    hb = 0.1
    s = no.SqueezedState.coherent([1.0, 0.0], hb)
    out = no.propagate_coherent("harmonic", 1.0, s, 1.5, 1e-3)
    x, psi_ref = no.split_step_reference("harmonic", 1.0, s, 1.5, 1e-4, 8.0, 1024)
    moved = no.SqueezedState(out["center"], out["M"], hb, out["phase"])
    psi_sc = no.evaluate(moved, x)
    err = np.sqrt(np.sum(np.abs(psi_sc - psi_ref) ** 2) * (x[1] - x[0]))
    assert err < 1e-5


def test_error_scaling_law():
    res = no.error_vs_reference("quartic", 1.0, [1.0, 0.0], np.array([[1j]]),
                                [0.2, 0.1, 0.05], 0.5, 1e-3, samples=4)
    assert 0.3 < res["slope"] < 0.8
    errors = [row[1] for row in res["rows"]]
    assert errors == sorted(errors, reverse=True)


def test_transform_peak_and_convention():
    assert no.hwp_convention() == "+sigma/2"
    s = no.SqueezedState.coherent([0.0, 0.0], 1.0)
    field = no.wavepacket_transform(s, 6.0, 81)
    peak = np.unravel_index(np.argmax(np.abs(field)), field.shape)
    assert peak == (40, 40)  # centered
    assert abs(abs(field[40, 40]) - (2 * math.pi) ** -0.5) < 1e-10


@pytest.mark.skipif("NORBIT_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_selftest_and_run():
    cli = os.environ["NORBIT_CLI"]
    with tempfile.TemporaryDirectory() as tmp:
        rc = subprocess.run([cli, "selftest", "--out", os.path.join(tmp, "st")],
                            capture_output=True, text=True)
        assert rc.returncode == 0, rc.stdout + rc.stderr
        report = json.load(open(os.path.join(tmp, "st", "selftest.json")))
        assert report["pass"] is True
        assert report["conventions"]["hwp_convention"] == "+sigma/2"

        config = {
            "schema_version": 1,
            "mode": "coherent",
            "seed": 3,
            "hamiltonian": {"name": "harmonic", "param": 1.0},
            "z0": [1.0, 0.0],
            "state": {"X": 1.0, "Y": 0.0},
            "hbar": 0.1,
            "T": 2.0 * math.pi,
            "dt": 1e-3,
            "samples": 4,
            "output_dir": os.path.join(tmp, "run"),
        }
        cfg_path = os.path.join(tmp, "config.json")
        json.dump(config, open(cfg_path, "w"))
        rc = subprocess.run([cli, "run", cfg_path], capture_output=True, text=True)
        assert rc.returncode == 0, rc.stdout + rc.stderr
        summary = json.load(open(os.path.join(tmp, "run", "summary.json")))
        assert abs(summary["final"]["phase_re"] + 1.0) < 1e-6
        manifest = json.load(open(os.path.join(tmp, "run", "manifest.json")))
        names = {e["file"] for e in manifest["files"]}
        assert {"state.csv", "trajectory.csv", "summary.json"} <= names

        # schema violation: exit code 2
        config["hbar"] = -1.0
        json.dump(config, open(cfg_path, "w"))
        rc = subprocess.run([cli, "run", cfg_path], capture_output=True, text=True)
        assert rc.returncode == 2
