import itertools

import pytest

from floodtime.analytic import sparse_flooding_time
from floodtime.core import ModelParams, ParameterError
from floodtime.oracle import UnsupportedSizeError, ctmc_exact_flooding, oracle_report
from floodtime.stochastic import OnDurationLaw, monte_carlo


@pytest.mark.parametrize("lam,mu", list(itertools.product([0.3, 1.0, 2.5, 7.0, 40.0], [0.5, 4.0])))
def test_two_nodes_matches_formula(lam, mu):
    p = lam / (lam + mu)
    assert ctmc_exact_flooding(2, lam, mu) == pytest.approx((1 - p) / lam, abs=1e-10)


def test_two_nodes_example():
    assert ctmc_exact_flooding(2, 1.0, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_sparse_limit():
    assert ctmc_exact_flooding(3, 1.0, 1e6) == pytest.approx(1.0, abs=1e-3)
    for n in (3, 4):
        f0 = sparse_flooding_time(ModelParams.from_p(n, 1.0, 0.0))
        gaps = [abs(ctmc_exact_flooding(n, 1.0, mu) - f0) for mu in (1e2, 1e4, 1e6)]
        assert gaps[0] > gaps[1] > gaps[2]


def test_matches_physical_simulator():
    value = ctmc_exact_flooding(3, 1.0, 1.0)
    params = ModelParams.from_contact(3, 1.0, 1.0)
    est = monte_carlo("physical", params, OnDurationLaw.exponential(1.0), 10**5, seed=8)
    assert abs(est.mean - value) <= 3 * est.stderr


def test_size_limits():
    with pytest.raises(UnsupportedSizeError):
        ctmc_exact_flooding(5, 1.0, 1.0)
    with pytest.raises(ParameterError):
        ctmc_exact_flooding(3, 0.0, 1.0)


def test_report_two_nodes():
    report = oracle_report(2, 1.0, 1.0)
    assert report.ctmc == pytest.approx(report.exact, rel=1e-12)
    assert report.dev_exact == pytest.approx(0.0, abs=1e-12)


def test_report_sparse_limit():
    report = oracle_report(3, 1.0, 1e6)
    for value in (report.ctmc, report.exact, report.lower, report.sparse):
        assert value == pytest.approx(1.0, abs=1e-3)
    assert report.upper == pytest.approx(1.5, abs=1e-3)


def test_report_well_posed():
    report = oracle_report(4, 2.0, 2.0)
    row = report.as_row()
    for key in ("ctmc", "exact", "lower", "upper", "sparse"):
        assert 0 < row[key] < float("inf")
    assert report.lower <= report.exact <= report.upper
