"""CSV slices and gnuplot scripts for a sweep table.

Nothing is rendered here; the scripts are plain text for gnuplot.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path

from .errors import PreconditionError

VERDICT_CODE = {"NotExists": -1, "Indeterminate": 0, "Exists": 1, "ExistsNearBetaLower": 2}


def _g(v):
    return format(v, ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_g(v) if isinstance(v, float) else v for v in r])


def crossing_from_trace(betas, gammas):
    """First beta where Gamma reaches 1, from samples ordered by beta.

    1/Gamma is interpolated linearly; on the diagonal a1 = a2 = a it equals
    (a + beta)/a* exactly, so there the interpolation is exact.  NaN when
    the samples never reach 1.
    """
    pts = [(b, g) for b, g in zip(betas, gammas) if math.isfinite(g) and g > 0]
    pts.sort()
    for (b0, g0), (b1, g1) in zip(pts, pts[1:]):
        if g0 >= 1.0 >= g1:
            r0, r1 = 1.0 / g0, 1.0 / g1
            if r1 == r0:
                return b0
            return b0 + (1.0 - r0) * (b1 - b0) / (r1 - r0)
    if pts and pts[0][1] == 1.0:
        return pts[0][0]
    return math.nan


def emit_plots(table, out_dir):
    """Phase-diagram slices per beta and beta-crossing curves; returns the paths."""
    rows = list(table.rows)
    if not rows:
        raise PreconditionError("cannot plot an empty table")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    a_star = rows[0].a_star

    by_beta = defaultdict(list)
    for r in rows:
        by_beta[round(r.beta / a_star, 12)].append(r)
    for i, (bu, rs) in enumerate(sorted(by_beta.items())):
        data = out / f"phase_beta{i}.csv"
        rs.sort(key=lambda r: (r.a1, r.a2))
        _write_csv(data, ["a1_over_astar", "a2_over_astar", "verdict_code", "gamma"],
                   [(r.a1 / a_star, r.a2 / a_star, VERDICT_CODE[r.verdict], r.gamma_value) for r in rs])
        script = out / f"phase_beta{i}.gp"
        script.write_text(
            f"# phase diagram at beta = {bu:.6g} a*\n"
            "set datafile separator ','\n"
            "set key off\n"
            "set xlabel 'a1 / a*'\nset ylabel 'a2 / a*'\n"
            f"set title 'verdicts at beta = {bu:.4g} a*  (-1 none, 0 undecided, 1 exists, 2 near beta_lower)'\n"
            "set cbrange [-1:2]\nset palette maxcolors 4\n"
            f"set terminal pngcairo size 800,700\nset output '{script.stem}.png'\n"
            f"plot '{data.name}' every ::1 using 1:2:3 with points pt 5 ps 2 palette\n"
        )
        files += [data, script]

    by_pair = defaultdict(list)
    for r in rows:
        by_pair[(r.a1, r.a2)].append(r)
    cross_rows = []
    for (a1, a2), rs in sorted(by_pair.items()):
        if len(rs) < 2:
            continue
        rs.sort(key=lambda r: r.beta)
        bc = crossing_from_trace([r.beta for r in rs], [r.gamma_value for r in rs])
        cross_rows.append((a1 / a_star, a2 / a_star, rs[0].beta_lower / a_star,
                           rs[0].beta_upper / a_star, bc / a_star))
    if cross_rows:
        data = out / "crossing.csv"
        _write_csv(data, ["a1_over_astar", "a2_over_astar", "beta_lower", "beta_upper", "beta_cross"],
                   cross_rows)
        script = out / "crossing.gp"
        script.write_text(
            "# beta where Gamma reaches 1, with the analytic thresholds (units of a*)\n"
            "set datafile separator ','\n"
            "set xlabel 'a1 / a*'\nset ylabel 'beta / a*'\nset key top right\n"
            "set terminal pngcairo size 800,600\nset output 'crossing.png'\n"
            f"plot '{data.name}' every ::1 using 1:5 with linespoints title 'Gamma = 1', \\\n"
            f"     '{data.name}' every ::1 using 1:3 with lines title 'beta_lower', \\\n"
            f"     '{data.name}' every ::1 using 1:4 with lines title 'beta_upper'\n"
        )
        files += [data, script]
    return files
