import numpy as np
import pytest
from scipy import stats

from hierlab.analysis import analyze, loglog_slope, powerlaw_fit
from hierlab.generators import hnm_generate


def test_loglog_slope_exact():
    table = {k: 5.0 * k ** -1.5 for k in (1, 2, 4, 8, 16)}
    assert loglog_slope(table) == pytest.approx(-1.5)
    with pytest.raises(ValueError):
        loglog_slope({1: 1.0})


def test_powerlaw_recovers_exponent():
    x = stats.zipf(2.5).rvs(size=200_000, random_state=np.random.default_rng(0))
    fit = powerlaw_fit(x, xmin=10)
    assert fit.alpha == pytest.approx(2.5, abs=0.05)


def test_analyze_hnm(tmp_path):
    g, _ = hnm_generate(4, 5)
    s = analyze(g, tmp_path)
    assert s["clustering_slope"] == pytest.approx(-1.0, abs=0.2)
    rows = (tmp_path / "clustering_by_degree.csv").read_text().splitlines()
    assert rows[0] == "k,C" and len(rows) > 5
    assert (tmp_path / "degree_histogram.csv").exists()
