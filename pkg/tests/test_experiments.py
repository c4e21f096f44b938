import json

import numpy as np
import pytest

from motional import config, io
from motional.cli import execute


def _run(tmp_path, text):
    execute(config.parse(text), tmp_path)
    return tmp_path


def test_delta0_scales_time_and_rates(tmp_path):
    # Cauchy with delta0 = 2: R(T) = exp(-2 T) whatever the reset rate
    out = _run(tmp_path, """
delta0: 2.0
kind: coherence
engine: laplace
distribution: {family: student_t, r: 1.0}
process: {type: poisson, rate: 6.0}
times: {stop: 2.0, points: 21}
""")
    cols, data = io.read_csv(out / "coherence" / "coherence.csv")
    T, R = data[:, 0], data[:, 1]
    assert T[-1] == 2.0
    np.testing.assert_allclose(R, np.exp(-2 * T), atol=1e-6)


def test_spectrum_units(tmp_path):
    out = _run(tmp_path, """
delta0: 3.0
kind: spectrum
distribution: {family: stable, alpha: 1.0, c: 1.5}
spectrum_gammas: [0.0, 30.0]
""")
    meta = json.loads((out / "spectrum" / "spectrum.json").read_text())
    # c is a physical rate: Lorentzian of half width 1.5 at any reset rate
    assert meta["fwhm"] == {"0": pytest.approx(3.0, rel=1e-3), "30": pytest.approx(3.0, rel=1e-3)}


def test_zeno_compare_ordering(tmp_path):
    out = _run(tmp_path, """
experiments:
  - {name: r05, kind: zeno-compare, distribution: {family: student_t, r: 0.5},
     interval: 0.25, times: [0.5, 1.0, 2.0], ensemble_size: 20000, seed: 1}
  - {name: r15, kind: zeno-compare, distribution: {family: student_t, r: 1.5},
     interval: 0.25, times: [0.5, 1.0, 2.0], ensemble_size: 20000, seed: 1}
""")
    for name, below in (("r05", True), ("r15", False)):
        cols, d = io.read_csv(out / name / "zeno.csv")
        assert cols == ["T", "R0", "product", "R_mc", "stderr"]
        assert np.all((d[:, 2] < d[:, 1]) == below)
        assert np.all(np.abs(d[:, 3] - d[:, 2]) < 3 * d[:, 4])
