import json
import math

import numpy as np
import pytest

from mcqwalk import catalog, lab, spectral

R2 = 1 / math.sqrt(2)


def test_fit_exact_lines():
    x = np.arange(1.0, 8.0)
    f = lab.fit_least_squares(x, 2 * x + 1, "linear")
    assert f.coefficients == pytest.approx([2, 1])
    assert f.residual_rms == pytest.approx(0, abs=1e-12)
    f = lab.fit_least_squares(x, 3 * x**2, "quadratic")
    assert f.coefficients == pytest.approx([3])
    f = lab.fit_least_squares(x, 0.5 * x, "a0")
    assert f.coefficients == pytest.approx([0.5])


def test_fit_matches_numpy_polyfit(rng):
    x = rng.uniform(0, 10, 30)
    y = 1.5 * x - 2 + rng.normal(size=30)
    f = lab.fit_least_squares(x, y, "linear")
    assert f.coefficients == pytest.approx(list(np.polyfit(x, y, 1)), rel=1e-10)
    resid = y - np.polyval(np.polyfit(x, y, 1), x)
    assert f.residual_rms == pytest.approx(np.sqrt(np.mean(resid**2)))


def test_fit_degenerate():
    with pytest.raises(lab.DegenerateFitError):
        lab.fit_least_squares([2, 2, 2], [1, 2, 3], "linear")
    with pytest.raises(lab.DegenerateFitError):
        lab.fit_least_squares([0, 0], [1, 2], "a0")
    with pytest.raises(ValueError):
        lab.fit_least_squares([1, 2], [1, 2], "cubic")


@pytest.mark.parametrize("g", [0.0, 0.2, R2, 0.9, 1.0])
def test_mean_law_gamma_ghz(g):
    for q in (1, 2, 3):
        r = lab.mean_law_check(catalog.gamma_ghz(g), q, 20)
        assert r.status == "pass"
        assert r.mean_direct**2 == pytest.approx(r.c1_tilde**2 * (2 * g**2 - 1) ** 2, abs=1e-8)
        assert r.mean_direct == pytest.approx(r.mean_integral, abs=1e-6)


def test_mean_law_psi6_middle_qubit():
    e = catalog.psi6(0.5)
    k2 = e.params["kappa2"]
    r = lab.mean_law_check(e, 2, 30)
    assert r.passed
    assert r.lhs == pytest.approx(r.c1_tilde**2 * (1 - 2 * k2**2) ** 2, abs=1e-8)


def test_mean_law_mixed_exception():
    r = lab.mean_law_check(catalog.psi78(1.0), 1, 50)
    assert not r.passed
    assert r.status == "mixed-exception"
    assert abs(r.mean_direct) < 1e-9


def test_variance_law_examples():
    c1, c2 = spectral.c1_tilde(50), spectral.c2_tilde(50)
    r = lab.variance_law_check(catalog.gamma_ghz(R2), 1, 50)
    assert r.passed and r.lhs == pytest.approx(c2, rel=1e-9)
    r = lab.variance_law_check(catalog.gamma_ghz(1.0), 1, 50)
    assert r.passed and r.lhs == pytest.approx(c2 - c1**2, rel=1e-9)
    r = lab.variance_law_check(catalog.psi6(2.0), 2, 50)
    assert r.passed and r.lhs == pytest.approx(c2, rel=1e-9)


def test_sweep_fit_gamma_ghz_small():
    rep = lab.sweep_and_fit_a0("gammaGHZ", np.linspace(0, 1, 11), 1, 20)
    assert rep.fit.coefficients[0] == pytest.approx(spectral.c1_tilde(20) ** 2, rel=1e-9)
    assert rep.fit.residual_rms < 1e-8
    for p in rep.points:
        assert p.mean_direct == pytest.approx(p.mean_integral, abs=1e-6)


def test_sweep_rejects_degenerate_and_short_grids():
    with pytest.raises(lab.DegenerateSweepError):
        lab.sweep_and_fit_a0("phi2", np.linspace(0, 0.5, 11), 1, 10)
    with pytest.raises(ValueError):
        lab.sweep_and_fit_a0("gammaGHZ", [0.1, 0.2], 1, 10)
    with pytest.raises(ValueError, match="mixes"):
        lab.sweep_and_fit_a0("psi78", np.linspace(-3, 3, 11), 2, 10)


def test_sweep_exports(tmp_path):
    rep = lab.sweep_and_fit_a0("psi6", np.linspace(-2, 4, 10), 2, 10)
    lab.write_sweep(rep, tmp_path / "s.csv", tmp_path / "s.json")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "param,ic2_q1,ic2_q2,ic2_q3,mean_direct,mean_integral,second_moment,variance"
    assert len(lines) == 11
    doc = json.loads((tmp_path / "s.json").read_text())
    assert doc["fit"]["model"] == "a0"
    assert doc["fit"]["coefficients"][0] == pytest.approx(spectral.c1_tilde(10) ** 2, rel=1e-9)
    assert "residual_rms" in doc["fit"]


def test_q_time_series_shape_and_t0():
    e = catalog.gamma_ghz(0.3)
    rows = lab.q_time_series(e, 2, [60, 50], 50)
    assert len(rows) == 51
    t0 = rows[0][1]
    assert t0[0].q == pytest.approx(0.3276)
    assert t0[1].q is None
    start = [r[1][0].q for r in rows]
    assert lab.series_range(start) < 1e-10


def test_distribution_symmetry_t0():
    assert lab.distribution_symmetry(catalog.gamma_ghz(0.3), 1, 0) == (0.0, 0.0)


def test_ctilde_fits_shape():
    lin, quad = lab.ctilde_fits(1, 20)
    assert lin.model == "linear" and len(lin.coefficients) == 2
    assert quad.model == "quadratic" and len(quad.coefficients) == 1
