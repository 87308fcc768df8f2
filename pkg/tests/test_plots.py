import math

import pytest

from fracbec.errors import PreconditionError
from fracbec.plots import VERDICT_CODE, crossing_from_trace, emit_plots
from fracbec.sweep import SweepRow, SweepTable
from fracbec.thresholds import compute_thresholds, gamma_bounds

A = 2.4693776727513992


def row(cell, u1, u2, ub, gamma, verdict="Exists"):
    a1, a2, b = u1 * A, u2 * A, ub * A
    th = compute_thresholds(a1, a2, A)
    lo, hi = gamma_bounds(a1, a2, b, A)
    return SweepRow(cell, A, a1, a2, b, th.beta_lower if th.beta_lower is not None else math.nan,
                    th.beta_upper, gamma, lo, hi, verdict, "rule", 0.0, 0.0, 0.0, 1, True, False, 0.0)


def test_empty_table_is_an_error(tmp_path):
    with pytest.raises(PreconditionError):
        emit_plots(SweepTable([]), tmp_path)


def test_three_by_three_single_beta(tmp_path):
    rows = [row(k, u1, u2, 0.1, 1.5) for k, (u1, u2) in
            enumerate((u1, u2) for u1 in (0.2, 0.4, 0.6) for u2 in (0.2, 0.4, 0.6))]
    files = emit_plots(SweepTable(rows), tmp_path)
    names = sorted(f.name for f in files)
    assert names == ["phase_beta0.csv", "phase_beta0.gp"]
    lines = (tmp_path / "phase_beta0.csv").read_text().splitlines()
    assert lines[0] == "a1_over_astar,a2_over_astar,verdict_code,gamma" and len(lines) == 10
    script = (tmp_path / "phase_beta0.gp").read_text()
    assert "phase_beta0.csv" in script and "plot" in script


def test_diagonal_crossing_is_a_star_minus_a(tmp_path):
    rows, k = [], 0
    for u in (0.2, 0.4, 0.6):
        for ub in (0.1, 0.3, 0.5, 0.7, 0.9):
            rows.append(row(k, u, u, ub, 1 / (u + ub)))
            k += 1
    emit_plots(SweepTable(rows), tmp_path)
    lines = (tmp_path / "crossing.csv").read_text().splitlines()[1:]
    assert len(lines) == 3
    for line in lines:
        u1, u2, lo, hi, cross = map(float, line.split(","))
        assert cross == pytest.approx(1 - u1, rel=1e-12)
        assert lo == pytest.approx(1 - u1) and hi == pytest.approx(1 - u1)
    assert (tmp_path / "crossing.gp").exists()


def test_crossing_from_trace():
    assert math.isnan(crossing_from_trace([0.1, 0.2], [1.2, 1.1]))  # never reaches 1
    assert crossing_from_trace([0.1, 0.3], [1.25, 0.8]) == pytest.approx(0.1 + 0.2 * 0.2 / 0.45)
    assert crossing_from_trace([0.3, 0.1], [0.8, 1.25]) == pytest.approx(0.1 + 0.2 * 0.2 / 0.45)
    assert crossing_from_trace([0.1, 0.2], [1.0, 0.9]) == 0.1
    assert math.isnan(crossing_from_trace([0.1, 0.2], [math.nan, math.nan]))


def test_verdict_codes_cover_all_verdicts():
    from fracbec.classify import VERDICTS
    assert set(VERDICT_CODE) == set(VERDICTS)
