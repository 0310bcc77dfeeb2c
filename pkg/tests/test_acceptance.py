"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``.  The seed is the
package default (12345) unless ``RECORD_MLE_SEED`` is set.
"""

import math

import mpmath
import numpy as np
import pytest

from record_mle import analytic as an
from record_mle.cli import run
from record_mle.family import frechet, gumbel, power_function
from record_mle.montecarlo import (
    Source,
    consistency_curve,
    draw_statistics,
    ks_gamma_gof,
    mc_estimate,
    mc_plugin_curve,
    sample_vs_records_ks,
)
from record_mle.reports import curve_csv, mse_curve, parse_estimand
from record_mle.verification import default_seed

SEED = default_seed()
POWER = power_function()


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}  {detail}".rstrip())
        return ok

    return emit


def test_criterion_01_exact_mse_vs_monte_carlo(report):
    zs = {}
    for n in (3, 5, 10, 30):
        exact = an.mse_theta_power_exact(n, 1.0)
        rep = mc_estimate(POWER, 1.0, source=Source.sample(n), reps=100_000, seed=SEED)
        zs[n] = abs(rep.mse - exact) / rep.stderr_of_mse
    at3 = an.mse_theta_power_exact(3, 1.0)
    printed = an.mse_theta_power_exact(3, 1.0, printed_form=True)
    curve = mse_curve(POWER, 1.0, parse_estimand("theta"), [3, 4, 5], 0, SEED)
    flagged = any("printed closed form" in w for w in curve.warnings)
    ok = all(z <= 3 for z in zs.values()) and abs(at3 - 2.5) < 1e-12 and printed < 0 and flagged
    detail = " ".join(f"z(n={n})={z:.2f}" for n, z in zs.items()) + f" printed(n=3)={printed:g}"
    assert report(1, "exact MSE of theta_hat vs Monte Carlo", ok, detail)


def test_criterion_02_sample_and_records_equal_in_law(report):
    ps = {}
    for member in (POWER, gumbel(), frechet(2.0)):
        _, ps[member.label] = sample_vs_records_ks(member, 1.0, 8, 10_000, SEED)
    ok = all(p > 0.01 for p in ps.values())
    assert report(2, "KS sample vs record theta_hat (n=m=8)", ok, " ".join(f"{k}:p={v:.3f}" for k, v in ps.items()))


def test_criterion_03_record_statistic_is_gamma(report):
    T = draw_statistics(POWER, 2.0, Source.records(5), 10_000, SEED)
    _, p = ks_gamma_gof(T, 5, 2.0)
    assert report(3, "A(R'_5) ~ Gamma(5, rate 2)", p > 0.01, f"p={p:.3f}")


def test_criterion_04_cdf_expectation_series(report):
    x = math.exp(-0.2)
    series = an.expectation_cdf_plugin_series(POWER, 1.0, x, 5).value
    quad = an.plugin_moment_quadrature(POWER, 1.0, x, 5, "cdf")
    pt = mc_plugin_curve(POWER, 1.0, 5, [x], "cdf", 100_000, SEED)[0]
    tol = max(3 * pt.bias_stderr, 1e-2)
    ok = abs(series - 453 / 576) <= 1e-12 and abs(series - quad) <= 1e-2 and abs(series - pt.mean) <= tol
    detail = f"series={series:.10f} quad={quad:.6f} mc={pt.mean:.6f}"
    assert report(4, "truncated E[F_hat] series at m=5", ok, detail)


def test_criterion_05_asymptotic_unbiasedness(report):
    F = 0.8
    c10 = abs(an.expectation_cdf_plugin_series(POWER, 1.0, 0.8, 10).value - F)
    c80 = abs(an.expectation_cdf_plugin_series(POWER, 1.0, 0.8, 80).value - F)
    q80 = abs(an.plugin_moment_quadrature(POWER, 1.0, 0.8, 80, "cdf") - F)
    f = 1.0
    p10 = abs(an.expectation_pdf_plugin_series(POWER, 1.0, 0.5, 10).value - f)
    p80 = abs(an.expectation_pdf_plugin_series(POWER, 1.0, 0.5, 80).value - f)
    pq80 = abs(an.plugin_moment_quadrature(POWER, 1.0, 0.5, 80, "pdf") - f)
    ok = c80 < c10 and c80 < 0.02 * F and q80 < 0.02 * F and p80 < p10 and p80 < 0.02 * f and pq80 < 0.02 * f
    detail = f"cdf err m10={c10:.2e} m80={c80:.2e}; pdf err m10={p10:.2e} m80={p80:.2e}"
    assert report(5, "bias of plug-in CDF/PDF shrinks with m", ok, detail)


def test_criterion_06_consistency(report):
    table = consistency_curve(POWER, 1.0, [0.2], [10, 40], 10_000, SEED)
    p10, p40 = table.at(0.2, 10), table.at(0.2, 40)
    grid = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    c5 = mc_plugin_curve(POWER, 1.0, 5, grid, "cdf", 10_000, SEED)
    c40 = mc_plugin_curve(POWER, 1.0, 40, grid, "cdf", 10_000, SEED)
    lower = all(b.mse < a.mse for a, b in zip(c5, c40))
    ok = p40 <= 0.5 * p10 and lower
    assert report(6, "consistency in m", ok, f"P(m=10)={p10:.4f} P(m=40)={p40:.4f} cdf-mse-lower={lower}")


def test_criterion_07_gamma_ratio_limit(report):
    vals = [an.lemma1_ratio(10**6, i) for i in range(4)]
    seq = [an.lemma1_ratio(10**k, 1) for k in range(2, 7)]
    ok = all(1.0 <= v <= 1.00002 for v in vals) and all(b < a for a, b in zip(seq, seq[1:]))
    assert report(7, "Gamma ratio tends to 1", ok, "n=1e6: " + " ".join(f"{v:.8f}" for v in vals))


def oracle(n, theta):
    with mpmath.workdps(60):
        th = mpmath.mpf(theta)
        e = mpmath.exp(th)
        s = mpmath.fsum(
            (n * th) ** i * mpmath.factorial(n - i - 1) / (mpmath.factorial(i) * mpmath.factorial(n - 1))
            * (2**i - 2 * e)
            for i in range(n)
        )
        return float(s + e * e)


def test_criterion_08_exp_theta_series(report, capsys, tmp_path):
    worst = max(
        abs(an.mse_exp_theta_series(n, t).value - oracle(n, t)) / abs(oracle(n, t))
        for n in range(1, 51)
        for t in (0.1, 0.5, 1.0, 2.0)
    )
    out = tmp_path / "exp"
    code = run(["mse-curve", "--family", "power", "--theta", "1", "--estimand", "exp-theta",
                "--n", "2:10", "--reps", "0", "--out", str(out), "--format", "csv,svg"])
    csv_text = (tmp_path / "exp.csv").read_text()
    flagged = code == 0 and csv_text.count("formal series") == 9 and "formal series" in (tmp_path / "exp.svg").read_text()
    fout = tmp_path / "findings.json"
    produced = run(["findings", "--out", str(fout)]) == 0 and fout.stat().st_size > 0
    capsys.readouterr()
    ok = worst <= 1e-12 and flagged and produced
    assert report(8, "formal exp(theta) MSE series", ok, f"max_rel_err={worst:.1e} flagged={flagged} report={produced}")


def test_criterion_09_determinism(report):
    est = parse_estimand("theta")
    a = curve_csv(mse_curve(POWER, 1.0, est, range(3, 11), 5000, SEED, workers=1))
    b = curve_csv(mse_curve(POWER, 1.0, est, range(3, 11), 5000, SEED, workers=1))
    c = curve_csv(mse_curve(POWER, 1.0, est, range(3, 11), 5000, SEED, workers=4))
    ok = a == b == c
    assert report(9, "byte-identical MSE curve CSV", ok, f"bytes={len(a)}")


def test_criterion_10_mse_curve_shape(report):
    vals = np.array([an.mse_theta_power_exact(n, 1.0) for n in range(3, 301)])
    ok = bool(np.all(np.diff(vals) < 0)) and vals[-1] < 0.01
    assert report(10, "exact MSE decreasing, below 0.01 by n=300", ok, f"n=3:{vals[0]:g} n=300:{vals[-1]:.5f}")
