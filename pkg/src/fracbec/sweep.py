"""Parameter sweeps over (a1, a2, beta) with a crash-safe journal.

Ranges are given in units of a* and resolved against the cached ground
state.  Each finished cell is appended to ``journal.jsonl`` (one fsync per
row); a resumed run skips the cells already journaled.  The final table is
written as RFC-4180 CSV with 17 significant digits, ordered by cell index, so
equal seeds give byte-identical files.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .classify import GAMMA_BAND, decide, on_critical_diagonal
from .constrained import SystemParams, minimize
from .errors import BudgetExceeded, ConfigError, NoConvergence
from .gamma import GAMMA_GRID, gamma_estimate
from .ground_state import CACHE_ENV, load_or_solve
from .options import SolverOptions
from .potentials import PotentialSpec
from .spectral import Grid1D
from .thresholds import compute_thresholds

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10_000
JOURNAL = "journal.jsonl"
TABLE = "sweep.csv"


@dataclass(frozen=True)
class SweepSpec:
    a1_range: tuple = (0.5, 0.5, 1)
    a2_range: tuple = (0.5, 0.5, 1)
    beta_range: tuple = (0.0, 0.0, 1)
    grid: Grid1D = Grid1D(2048, 16.0)
    gamma_grid: Grid1D = GAMMA_GRID
    v1: PotentialSpec = PotentialSpec()
    v2: PotentialSpec = PotentialSpec()
    opts: SolverOptions = SolverOptions(tol=1e-7, max_iter=5000)
    gamma_opts: SolverOptions = SolverOptions(tol=1e-6, max_iter=20000)
    gamma_band: float = GAMMA_BAND
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    workers: int | None = None

    def __post_init__(self):
        for name in ("a1_range", "a2_range", "beta_range"):
            r = getattr(self, name)
            if len(r) != 3:
                raise ConfigError(f"{name} needs (min, max, steps)")
            lo, hi, steps = r
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ConfigError(f"{name} must be finite")
            if int(steps) != steps or steps < 1:
                raise ConfigError(f"{name} steps must be an integer >= 1")
        if self.n_cells > self.budget:
            raise BudgetExceeded(f"{self.n_cells} cells exceed the budget of {self.budget}")

    @staticmethod
    def axis(r):
        lo, hi, steps = r
        return np.linspace(lo, hi, int(steps)) if steps > 1 else np.array([float(lo)])

    @property
    def n_cells(self):
        return int(self.a1_range[2] * self.a2_range[2] * self.beta_range[2])

    def cells(self):
        """(index, a1, a2, beta) in units of a*, beta fastest."""
        k = 0
        for a1 in self.axis(self.a1_range):
            for a2 in self.axis(self.a2_range):
                for b in self.axis(self.beta_range):
                    yield k, float(a1), float(a2), float(b)
                    k += 1


@dataclass
class SweepRow:
    cell: int
    a_star: float
    a1: float
    a2: float
    beta: float
    beta_lower: float
    beta_upper: float
    gamma_value: float
    gamma_lo: float
    gamma_hi: float
    verdict: str
    rule: str
    energy: float
    mu1: float
    mu2: float
    iterations: int
    converged: bool
    diverged_evidence: bool
    inf_v_sum: float

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def recomputed_verdict(self, band=GAMMA_BAND):
        diag = on_critical_diagonal(self.a1, self.a2, self.beta, self.a_star)
        return decide(self.a1, self.a2, self.beta, self.a_star, self.gamma_value,
                      self.gamma_lo, self.gamma_hi, band,
                      self.energy if diag else math.nan, self.inf_v_sum)


@dataclass
class SweepTable:
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def to_csv(self):
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(SweepRow.columns())
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in SweepRow.columns()])
        return buf.getvalue()

    def write(self, path):
        path = Path(path)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", newline="") as fh:
            fh.write(self.to_csv())
        os.replace(tmp, path)

    @classmethod
    def read(cls, path):
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append(_row_from_strings(rec))
        return cls(rows)

    def inconsistent_rows(self, band=GAMMA_BAND):
        return [r for r in self.rows if r.recomputed_verdict(band)[0] != r.verdict]


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


_INT = {"cell", "iterations"}
_BOOL = {"converged", "diverged_evidence"}
_STR = {"verdict", "rule"}


def _row_from_strings(rec):
    kw = {}
    for c in SweepRow.columns():
        s = rec[c]
        if c in _INT:
            kw[c] = int(s)
        elif c in _BOOL:
            kw[c] = s == "true"
        elif c in _STR:
            kw[c] = s
        else:
            kw[c] = float(s)
    return SweepRow(**kw)


# --- one cell -------------------------------------------------------------------

def run_cell(spec: SweepSpec, cell, a1u, a2u, bu, a_star=None) -> SweepRow:
    gs = load_or_solve()
    a_star = gs.a_star if a_star is None else a_star
    a1, a2, beta = a1u * a_star, a2u * a_star, bu * a_star
    params = SystemParams(a1, a2, beta, spec.v1, spec.v2)
    th = compute_thresholds(a1, a2, a_star)
    seed = spec.seed + cell
    est = gamma_estimate(params, spec.gamma_grid, gs, spec.gamma_opts.with_(seed=seed))
    try:
        res = minimize(params, spec.grid, spec.opts.with_(seed=seed))
        e, mu1, mu2, its, conv, div = (res.energy, res.mu1, res.mu2, res.iterations,
                                       res.converged, res.diverged_evidence)
    except NoConvergence as exc:
        log.info("cell %d: minimize failed: %s", cell, exc)
        e = mu1 = mu2 = math.nan
        its, conv, div = exc.iterations, False, False
    v1, v2 = params.potentials(spec.grid)
    inf_v = float(np.min(v1.values + v2.values))
    diag = on_critical_diagonal(a1, a2, beta, a_star)
    verdict, rule = decide(a1, a2, beta, a_star, est.value, est.lower_bound, est.upper_bound,
                           spec.gamma_band, e if diag else math.nan, inf_v)
    nan = math.nan
    return SweepRow(
        cell=cell, a_star=a_star, a1=a1, a2=a2, beta=beta,
        beta_lower=th.beta_lower if th.beta_lower is not None else nan,
        beta_upper=th.beta_upper, gamma_value=est.value, gamma_lo=est.lower_bound,
        gamma_hi=est.upper_bound, verdict=verdict, rule=rule, energy=e, mu1=mu1, mu2=mu2,
        iterations=int(its), converged=bool(conv), diverged_evidence=bool(div), inf_v_sum=inf_v,
    )


def _cell_task(args):
    spec, cell, a1u, a2u, bu, a_star = args
    return asdict(run_cell(spec, cell, a1u, a2u, bu, a_star))


# --- journal ---------------------------------------------------------------------

def read_journal(path):
    """Completed rows by cell index; a torn trailing line is ignored."""
    done = {}
    path = Path(path)
    if not path.exists():
        return done
    with open(path) as fh:
        for line in fh:
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                break
            done[rec["cell"]] = SweepRow(**rec)
    return done


def _append(fh, row: SweepRow):
    fh.write(json.dumps(asdict(row), allow_nan=True) + "\n")
    fh.flush()
    os.fsync(fh.fileno())


def run_sweep(spec: SweepSpec, out_dir, resume=False, workers=None, stop_after=None) -> SweepTable:
    """Run (or resume) a sweep into ``out_dir``; returns the full table.

    ``stop_after`` ends the run after that many new cells (used to test
    interruption and resume).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.environ.get(CACHE_ENV):
        os.environ[CACHE_ENV] = str(out / "cache")
    gs = load_or_solve()
    # the Gamma grid soliton is cached too, so workers only read it
    load_or_solve(spec.gamma_grid)
    jpath = out / JOURNAL
    if not resume and jpath.exists():
        jpath.unlink()
    done = read_journal(jpath) if resume else {}
    todo = [(spec, k, a1, a2, b, gs.a_star) for k, a1, a2, b in spec.cells() if k not in done]
    if stop_after is not None:
        todo = todo[:stop_after]
    workers = workers or spec.workers or os.cpu_count() or 1
    with open(jpath, "a") as fh:
        if workers == 1 or len(todo) <= 1:
            for task in todo:
                row = SweepRow(**_cell_task(task))
                _append(fh, row)
                done[row.cell] = row
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futs = [pool.submit(_cell_task, t) for t in todo]
                for f in as_completed(futs):
                    row = SweepRow(**f.result())
                    _append(fh, row)  # single writer: the parent process
                    done[row.cell] = row
    table = SweepTable([done[k] for k in sorted(done)])
    if len(table) == spec.n_cells:
        table.write(out / TABLE)
    return table


# --- config ------------------------------------------------------------------------

_KEYS = {
    "grid": {"n", "L", "gamma_n", "gamma_L"},
    "solver": {"tol", "max_iter", "dt", "dt_grow", "dt_max", "gamma_tol", "gamma_max_iter",
               "gamma_band", "diverge_floor", "diverge_factor"},
    "potential1": {"kind", "coef", "p", "x0", "b"},
    "potential2": {"kind", "coef", "p", "x0", "b"},
    "sweep": {"a1", "a2", "beta", "seed", "budget", "workers"},
}


def _range(text, key):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"[sweep] {key} needs 'min, max, steps'")
    try:
        return (float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise ConfigError(f"[sweep] {key}: {exc}") from None


def _potential(sec):
    if sec is None:
        return PotentialSpec()
    kw = {}
    for k, v in sec.items():
        kw[k] = v if k == "kind" else float(v)
    return PotentialSpec(**kw)


def parse_config(text: str) -> SweepSpec:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case sensitive (L)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    for sec in cp.sections():
        if sec not in _KEYS:
            raise ConfigError(f"unknown section [{sec}]")
        unknown = set(cp[sec]) - _KEYS[sec]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(sorted(unknown))}")
    if "sweep" not in cp:
        raise ConfigError("missing [sweep] section")
    try:
        g = cp["grid"] if "grid" in cp else {}
        grid = Grid1D(int(g.get("n", SweepSpec.grid.n)), float(g.get("L", SweepSpec.grid.L)))
        ggrid = Grid1D(int(g.get("gamma_n", GAMMA_GRID.n)), float(g.get("gamma_L", GAMMA_GRID.L)))
        s = cp["solver"] if "solver" in cp else {}
        base = SweepSpec.opts
        opts = base.with_(
            tol=float(s.get("tol", base.tol)), max_iter=int(s.get("max_iter", base.max_iter)),
            dt=float(s.get("dt", base.dt)), dt_grow=float(s.get("dt_grow", base.dt_grow)),
            dt_max=float(s.get("dt_max", base.dt_max)),
            diverge_floor=float(s.get("diverge_floor", base.diverge_floor)),
            diverge_factor=float(s.get("diverge_factor", base.diverge_factor)),
        )
        gbase = SweepSpec.gamma_opts
        gopts = gbase.with_(tol=float(s.get("gamma_tol", gbase.tol)),
                            max_iter=int(s.get("gamma_max_iter", gbase.max_iter)))
        sw = cp["sweep"]
        for key in ("a1", "a2", "beta"):
            if key not in sw:
                raise ConfigError(f"[sweep] needs {key}")
        workers = sw.get("workers")
        return SweepSpec(
            a1_range=_range(sw["a1"], "a1"), a2_range=_range(sw["a2"], "a2"),
            beta_range=_range(sw["beta"], "beta"), grid=grid, gamma_grid=ggrid,
            v1=_potential(cp["potential1"] if "potential1" in cp else None),
            v2=_potential(cp["potential2"] if "potential2" in cp else None),
            opts=opts, gamma_opts=gopts,
            gamma_band=float(s.get("gamma_band", GAMMA_BAND)),
            seed=int(sw.get("seed", 0)), budget=int(sw.get("budget", DEFAULT_BUDGET)),
            workers=int(workers) if workers else None,
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path) -> SweepSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
