"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (shown in the pytest terminal summary);
running this file directly prints the same lines.
"""

import csv
import math
import time
from contextlib import contextmanager

import pytest

from conftest import ACCEPTANCE_LINES
from floodtime.analytic import (
    complexity_exact,
    complexity_lower,
    complexity_upper,
    exact_flooding_time,
    incremental_upper,
    lower_bound_flooding_time,
    lower_bound_with_counts,
    sparse_flooding_time,
    upper_bound_flooding_time,
)
from floodtime.cli import main as cli_main
from floodtime.cli import scaling_rows
from floodtime.core import ModelParams, harmonic
from floodtime.oracle import ctmc_exact_flooding, oracle_report
from floodtime.stochastic import OnDurationLaw, monte_carlo


@contextmanager
def criterion(number, title, budget_s):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"AC{number:02d} FAIL  {title}: {exc}")
        raise
    elapsed = time.perf_counter() - start
    if elapsed >= budget_s:
        ACCEPTANCE_LINES.append(f"AC{number:02d} FAIL  {title}: {elapsed:.2f} s over {budget_s} s budget")
        pytest.fail(f"runtime {elapsed:.2f} s exceeds {budget_s} s")
    ACCEPTANCE_LINES.append(f"AC{number:02d} PASS  {title} ({elapsed:.2f} s)")


def P(n, p, lam=1.0):
    return ModelParams.from_p(n, lam, p)


def test_ac01_sparse_envelope():
    with criterion(1, "F0 inside its logarithmic envelope, N in [2, 1e4]", 1.0):
        for n in range(2, 10_001):
            f0 = sparse_flooding_time(P(n, 0.0))
            assert 2 * math.log(n) / n <= f0 <= 2 * (1 + math.log(n - 1)) / n, n


def test_ac02_p0_collapse():
    with criterion(2, "F and F_lower equal F0 at p=0 (1e-12 rel), N in [2, 100]", 5.0):
        for n in range(2, 101):
            params = P(n, 0.0)
            f0 = sparse_flooding_time(params)
            assert abs(exact_flooding_time(params)[0] - f0) <= 1e-12 * f0, n
            assert abs(lower_bound_flooding_time(params) - f0) <= 1e-12 * f0, n


def test_ac03_ordering():
    with criterion(3, "F_lower <= F <= F_upper and F <= F0 on N in [3,100] x 7 p", 30.0):
        for p in (0.01, 0.05, 0.1, 0.12, 0.3, 0.5, 0.9):
            for n in range(3, 101):
                params = P(n, p)
                f = exact_flooding_time(params)[0]
                lo = lower_bound_flooding_time(params)
                up = upper_bound_flooding_time(params)[0]
                assert lo <= f <= up, (n, p, lo, f, up)
                assert f <= sparse_flooding_time(params), (n, p)


def test_ac04_sparse_error_factor():
    with criterion(4, "F0/F > 10 at lambda=1, p=0.1, N=50", 1.0):
        params = P(50, 0.1)
        ratio = sparse_flooding_time(params) / exact_flooding_time(params)[0]
        assert ratio > 10, ratio


def test_ac05_upper_beats_sparse():
    with criterion(5, "F_upper < F0 for all N in [3,100] when p in {0.35, 0.5, 0.9}", 10.0):
        for p in (0.35, 0.5, 0.9):
            for n in range(3, 101):
                params = P(n, p)
                assert upper_bound_flooding_time(params)[0] < sparse_flooding_time(params), (n, p)


def test_ac06_small_p_slopes():
    with criterion(6, "finite-difference slopes at p=1e-6 within 0.1%", 5.0):
        h = 1e-6
        for n in (3, 10, 50):
            for lam in (1.0, 2.0):
                slope = (exact_flooding_time(P(n, h, lam))[0] - exact_flooding_time(P(n, 0.0, lam))[0]) / h
                target = -harmonic(n - 1) / lam
                assert abs(slope - target) <= 1e-3 * abs(target), (n, lam, slope)
                slope_low = (lower_bound_flooding_time(P(n, h, lam)) - lower_bound_flooding_time(P(n, 0.0, lam))) / h
                target_low = -(n - 1) / lam
                assert abs(slope_low - target_low) <= 1e-3 * abs(target_low), (n, lam, slope_low)


def test_ac07_complexity_identities():
    with criterion(7, "operation counts equal the closed forms, N in [3, 50]", 10.0):
        for n in range(3, 51):
            _, _, ops = exact_flooding_time(P(n, 0.2))
            assert ops.multiplications == ops.additions == (n**3 - 6 * n**2 + 17 * n - 18) // 6
            assert (n**3 - 6 * n**2 + 17 * n - 18) % 6 == 0
            assert ops.multiplications == complexity_exact(n)
            _, low_ops = lower_bound_with_counts(P(n, 0.2))
            assert low_ops.multiplications == low_ops.additions == math.comb(n - 1, 2) == complexity_lower(n)
            _, table = upper_bound_flooding_time(P(n, 0.2))
            assert table.ops.multiplications == complexity_exact(n)
        for n in range(4, 51):
            assert complexity_upper(n) == complexity_exact(n)
            assert incremental_upper(n) == complexity_upper(n) - complexity_upper(n - 1)


def test_ac08_generative_agreement():
    with criterion(8, "generative Monte Carlo within 3 stderr in >= 8 of 9 cells", 120.0):
        hits = 0
        for n in (5, 10, 20):
            for p in (0.05, 0.12, 0.3):
                params = P(n, p)
                est = monte_carlo("generative", params, replications=10**5, seed=1000 + n)
                hits += abs(est.mean - exact_flooding_time(params)[0]) <= 3 * est.stderr
        assert hits >= 8, hits


def test_ac09_physical_vs_chain():
    with criterion(9, "physical Monte Carlo matches the chain oracle; N=2 chain = (1-p)/lambda", 60.0):
        value = ctmc_exact_flooding(3, 1.0, 1.0)
        params = ModelParams.from_contact(3, 1.0, 1.0)
        est = monte_carlo("physical", params, OnDurationLaw.exponential(1.0), 10**5, seed=2024)
        assert abs(est.mean - value) <= 3 * est.stderr, (est, value)
        p = 0.5
        assert abs(ctmc_exact_flooding(2, 1.0, 1.0) - (1 - p) / 1.0) <= 1e-10


def test_ac10_fidelity_report(tmp_path):
    with criterion(10, "chain-vs-analytic report: finite deviations, F inside [F_lower, F_upper], CSV", 60.0):
        for n in (3, 4):
            for mu in (0.5, 1.0, 4.0):
                report = oracle_report(n, 1.0, mu)
                for dev in (report.dev_exact, report.dev_lower, report.dev_upper, report.dev_sparse):
                    assert math.isfinite(dev)
                assert report.lower <= report.exact <= report.upper
        out = tmp_path / "oracle.csv"
        code = cli_main(["oracle", "--nodes", "3", "4", "--lambda", "1", "--mu-inv", "2", "1", "0.25",
                         "--output", str(out)])
        assert code == 0
        rows = list(csv.DictReader(out.open(encoding="utf-8")))
        assert len(rows) == 6
        for row in rows:
            assert math.isfinite(float(row["dev_exact"]))
            assert float(row["lower"]) <= float(row["exact"]) <= float(row["upper"])


def test_ac11_scaling():
    with criterion(11, "N*F/ln N below 2(1+ln(N-1))/ln N with p(N)=min(0.9, ln N/N)", 60.0):
        for row in scaling_rows(1.0, range(10, 301), 1.0, 0.9):
            n = row["N"]
            assert row["p"] == min(0.9, math.log(n) / n)
            assert row["normalized"] <= 2 * (1 + math.log(n - 1)) / math.log(n) + 1e-9, n


def test_ac12_determinism(tmp_path):
    with criterion(12, "Monte Carlo output byte-identical for a fixed seed, serial and parallel", 60.0):
        commands = [
            ["simulate", "--kind", "generative", "--nodes", "10", "--p", "0.12", "--reps", "20000", "--seed", "7"],
            ["simulate", "--kind", "physical", "--nodes", "4", "--mu-inv", "0.5", "--reps", "5000", "--seed", "7"],
            ["simulate", "--kind", "physical", "--nodes", "4", "--mu-inv", "0.5", "--on-dist", "det",
             "--reps", "5000", "--seed", "7"],
        ]
        for k, argv in enumerate(commands):
            outputs = []
            for run, extra in enumerate([[], [], ["--workers", "2"]]):
                path = tmp_path / f"mc{k}_{run}.csv"
                assert cli_main(argv + extra + ["--output", str(path)]) == 0
                outputs.append(path.read_bytes())
            assert outputs[0] == outputs[1] == outputs[2], argv


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
