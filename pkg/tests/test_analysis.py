import csv
import io
import math

import numpy as np
import pytest

from xychain import analysis, closedform
from xychain.analysis import ScanGrid
from xychain.errors import DomainError


def test_fit_recovers_exact_synthetic_data():
    fit = analysis.fit_gap_scaling([(n, 0.5 / n) for n in (10, 20, 40, 80)])
    assert fit.a == pytest.approx(0.5, abs=1e-14)
    assert abs(fit.delta_inf) < 1e-15
    assert fit.residual_norm < 1e-16
    assert fit.stderr_a >= 0 and fit.stderr_delta_inf >= 0


def test_fit_with_offset_and_noise_has_sane_errors():
    rng = np.random.default_rng(0)
    ns = np.arange(50, 1001, 50)
    pts = [(n, 0.3 / n + 1e-3 + 1e-6 * rng.standard_normal()) for n in ns]
    fit = analysis.fit_gap_scaling(pts)
    assert abs(fit.a - 0.3) < 5 * fit.stderr_a + 1e-9
    assert abs(fit.delta_inf - 1e-3) < 5 * fit.stderr_delta_inf
    assert fit.n_range == (50, 1000)


def test_fit_preconditions():
    with pytest.raises(DomainError):
        analysis.fit_gap_scaling([(10, 0.1), (20, 0.05)])
    with pytest.raises(DomainError):
        analysis.fit_gap_scaling([(10, 0.1), (10, 0.1), (10, 0.1)])
    with pytest.raises(DomainError):
        analysis.fit_gap_scaling([(10, 0.1), (10, 0.1), (20, 0.05)])


def test_fit_range_sensitivity_shape():
    pts = [(n, 0.5 / n + 8.0 / n**3) for n in analysis.default_gap_ladder()]
    fits = analysis.fit_range_sensitivity(pts)
    assert len(fits) == 3
    # dropping short chains shrinks the 1/N^3 bias
    assert abs(fits[1].delta_inf) < abs(fits[0].delta_inf)


def test_default_ladder():
    ladder = analysis.default_gap_ladder()
    assert ladder[0] == 50 and ladder[-1] == 1000
    assert ladder == sorted(set(ladder))


def test_scan_grid_validation():
    with pytest.raises(DomainError):
        ScanGrid((0, 1, 1), (0, 1, 3))
    with pytest.raises(DomainError):
        ScanGrid((0, math.inf, 3), (0, 1, 3))
    with pytest.raises(DomainError):
        ScanGrid((0, 1, 3), (0, 1, 3), quantity="entropy")
    with pytest.raises(DomainError):
        ScanGrid((0, 1, 3), (0, 1, 3), quantity="gap")
    with pytest.raises(DomainError):
        ScanGrid((0, 1, 3), (0, 1, 3), quantity="circle-derivative", order=1)
    with pytest.raises(DomainError):
        ScanGrid((0, 1, 3), (0, 2, 3))


def test_energy_scan_contains_circle_value_and_order():
    grid = ScanGrid((0.0, 1.2, 7), (0.0, 0.8, 5))
    rows = analysis.scan(grid)
    assert [(r.alpha, r.gamma) for r in rows] == [(a, g) for a in grid.alphas for g in grid.gammas]
    node = [r for r in rows if math.isclose(r.alpha, 0.6) and math.isclose(r.gamma, 0.8)]
    assert node[0].value == pytest.approx(-0.5, abs=1e-15)


def test_magnetization_row_at_zero_field():
    rows = analysis.scan(ScanGrid((0.0, 1.0, 3), (0.0, 1.0, 6), quantity="magnetization"))
    assert all(r.value == 0.0 for r in rows if r.alpha == 0.0)


def test_susceptibility_scan_flags_lines_and_peaks_near_critical():
    grid = ScanGrid((0.0, 2.0, 201), (0.0, 1 / 3, 2), quantity="susceptibility")
    rows = analysis.scan(grid)
    flagged = {(r.alpha, r.gamma): r.status for r in rows if r.status != "ok"}
    assert all(status == "divergent_line" for status in flagged.values())
    assert all(g == 0.0 or a == 1.0 for a, g in flagged)
    column = [r for r in rows if r.gamma > 0 and r.status == "ok"]
    peak = max(column, key=lambda r: r.value)
    assert abs(peak.alpha - 1.0) <= 0.01 + 1e-12  # one grid step


def test_circle_derivative_scan_uses_circle_alpha():
    rows = analysis.scan(ScanGrid((0, 1, 2), (0.0, 0.6, 3), quantity="circle-derivative", order=2))
    assert rows[0].status == "domain_error"
    assert rows[-1].alpha == pytest.approx(0.8)
    assert rows[-1].value == pytest.approx(-1 / 2.4)


def test_parallel_scan_is_identical():
    grid = ScanGrid((0.0, 2.0, 21), (0.0, 1.0, 11), quantity="susceptibility")
    assert analysis.csv_text(analysis.scan(grid, workers=1)) == analysis.csv_text(analysis.scan(grid, workers=3))


def test_csv_format_and_round_trip():
    grid = ScanGrid((0.0, 2.0, 5), (0.0, 1.0, 3), quantity="susceptibility")
    rows = analysis.scan(grid)
    text = analysis.csv_text(rows)
    assert text.splitlines()[0] == "alpha,gamma,quantity,value,status"
    parsed = list(csv.DictReader(io.StringIO(text)))
    for row, rec in zip(rows, parsed):
        if row.status == "ok":
            assert float(rec["value"]) == row.value
        else:
            assert rec["value"] == "nan"
    assert analysis.csv_text(analysis.scan(grid)) == text


def test_gap_series_cyclic_strong_field():
    series = analysis.gap_series(1.5, 0.6, [2, 4, 10, 64], boundary="c-cyclic")
    for n, d in series:
        assert n * d == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(DomainError):
        analysis.gap_series(1.5, 0.6, [10, 5])


def test_gap_series_threads_match_serial():
    ns = [20, 40, 80]
    assert analysis.gap_series(0.7, 0.4, ns, workers=3) == analysis.gap_series(0.7, 0.4, ns)


def test_gap_on_circle_vanishes():
    series = analysis.gap_series(0.8, 0.6, [100, 200, 400, 1000])
    assert all(d < 1e-14 for _, d in series)


def test_local_minima_count_grows_with_n():
    alphas = np.linspace(0.0, 0.8, 801)[1:-1]
    counts = [analysis.count_local_minima(analysis.gap_alpha_sweep(0.6, n, alphas)) for n in (20, 50)]
    assert counts[0] <= counts[1]


def test_count_local_minima_basic():
    assert analysis.count_local_minima([3, 1, 2, 0, 5]) == 2
    assert analysis.count_local_minima([1, 2]) == 0
    assert analysis.count_local_minima([1, 1, 1]) == 0


@pytest.mark.parametrize("kind", ["map", "lines", "gap"])
def test_plot_script_is_valid_python(kind):
    src = analysis.plot_script(kind, "out/fig.csv", "title", "energy")
    compile(src, "plot.py", "exec")
    assert "fig.csv" in src and "savefig" in src


def test_plot_script_rejects_unknown_kind():
    with pytest.raises(DomainError):
        analysis.plot_script("pie", "x.csv", "t")


def test_circle_fd_matches_closed_form_order_two():
    d = analysis.circle_fd_derivative(2, 0.6, side=-1)
    assert abs(d.value - closedform.circle_derivative(2, 0.6)) < 1e-7
