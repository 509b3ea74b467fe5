"""
Date: October 19th, 2026

This file contains the code for the TwinBeam class, from which the
command-line functionality of twinbeam is derived. It expands a run spec
into tasks, dispatches them to a worker pool and writes the results.

"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, TextIO, Tuple

import numpy as np
from joblib import Parallel, delayed

from twinbeam.channel_model import ProbeConfig, Scenario
from twinbeam.config import RunSpec
from twinbeam.estimators import ErrorBudget, Observable, budget
from twinbeam.exceptions import (
    DerivativeUnstable,
    InsensitiveObservable,
    PoorFit,
    TruncationUnsafe,
    TwinBeamError,
    ValidationFailed,
)
from twinbeam.fock_oracle import compare_tables, oracle_moments, random_suite
from twinbeam.moment_engine import compute_moments
from twinbeam.probe_optimizer import (
    OptimizationResult,
    check_scaling_grid,
    fit_power_law,
    optimize,
    phase_landscape,
    phase_map,
    solve_constraint,
    squeezing_landscape,
)

logger = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "n_T", "eta", "scenario", "observable", "r_opt", "seed_split_opt", "phase_opt",
    "delta_eps_sq", "value0", "dvalue", "variance", "flags",
)
MOMENT_COLUMNS = ("n_T", "eta", "scenario", "r", "seed_split", "phase", "p", "q", "value0", "dvalue")
PHASE_MAP_COLUMNS = ("n_T", "eta", "observable", "r", "seed_split", "theta", "seed_phase", "delta_eps_sq")
SCALING_COLUMNS = ("scenario", "observable", "eta", "exponent", "prefactor", "r_squared", "n_T_min", "n_T_max", "flags")
VALIDATION_COLUMNS = ("index", "cfg_hash", "eta", "r", "mismatches", "worst_entry", "engine", "oracle", "flags")

COLUMNS = {
    "MOMENTS": MOMENT_COLUMNS,
    "ERROR": RESULT_COLUMNS,
    "SWEEP": RESULT_COLUMNS,
    "OPTIMIZE": RESULT_COLUMNS,
    "PHASE-MAP": PHASE_MAP_COLUMNS,
    "SCALING": SCALING_COLUMNS,
    "VALIDATE": VALIDATION_COLUMNS,
}

NAN = math.nan


class Task(NamedTuple):
    """One unit of work; every field is picklable."""

    scenario: Scenario
    observable: Optional[Observable]
    n_T: float
    eta: float


@dataclass
class Report:
    """Rows of a run, in spec order, with the header they are written under."""

    header: Dict[str, str]
    columns: Tuple[str, ...]
    rows: List[tuple]
    partial: bool = False


def format_value(value) -> str:
    """Decimal text of a cell; floats keep 17 significant digits."""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format(value, ".17g")
    return value


def _result_row(task: Task, cfg: ProbeConfig, seed_split: float, phase: float, b: ErrorBudget, flags: str) -> tuple:
    return (
        task.n_T, task.eta, str(task.scenario), str(b.observable), cfg.r, seed_split, phase,
        b.delta_eps_sq, b.value0, b.dvalue, b.variance, flags,
    )


def _fixed_probe(spec: RunSpec, task: Task) -> Tuple[ProbeConfig, float]:
    """The probe of a moments or error run. Seeded probes without a fixed squeezing are optimized."""
    if task.scenario in (Scenario.SINGLE, Scenario.DOUBLE) and spec.r is None:
        result = optimize(task.scenario, spec.observables[0], task.n_T, task.eta)
        return result.cfg_star, result.seed_split
    solve = solve_constraint(task.scenario, task.n_T, spec.r, spec.seed_split, (0.0, 0.0, spec.phase))
    return solve.config(task.eta), solve.seed_split


def _moments_task(spec: RunSpec, task: Task) -> List[tuple]:
    cfg, split = _fixed_probe(spec, task)
    table = compute_moments(cfg)
    head = (task.n_T, task.eta, str(task.scenario), cfg.r, split, cfg.relative_phase)
    return [head + row for row in table.as_rows()]


def _error_task(spec: RunSpec, task: Task) -> List[tuple]:
    cfg, split = _fixed_probe(spec, task)
    table = compute_moments(cfg)
    rows = []
    for obs in spec.observables:
        b = budget(table, obs)
        rows.append(_result_row(task, cfg, split, cfg.relative_phase, b, b.flags))
    return rows


def _optimize_task(spec: RunSpec, task: Task) -> List[tuple]:
    result = optimize(task.scenario, task.observable, task.n_T, task.eta, landscape=spec.landscape)
    rows = [_optimum_row(task, result)]
    if spec.command != "OPTIMIZE":
        return rows
    if spec.landscape:
        samples = result.landscape_samples or squeezing_landscape(task.scenario, task.observable, task.n_T, task.eta)
        for s in samples:
            rows.append(_sample_row(task, s.r, s.seed_split, s.phase, s.delta_eps_sq, "landscape"))
    if spec.phase_map and task.scenario is Scenario.DOUBLE:
        landscape = phase_landscape(
            task.observable, task.n_T, task.eta, result.cfg_star.r, result.seed_split, spec.phase_points
        )
        for s in landscape.samples:
            rows.append(_sample_row(task, s.r, s.seed_split, s.phase, s.delta_eps_sq, "phase-map"))
        for d in landscape.minima:
            rows.append(_sample_row(task, result.cfg_star.r, result.seed_split, d, landscape.minimum, "phase-minimum"))
        if landscape.flat:
            rows.append(_sample_row(task, result.cfg_star.r, result.seed_split, NAN, landscape.minimum, "phase-flat"))
    return rows


def _optimum_row(task: Task, result: OptimizationResult) -> tuple:
    return _result_row(task, result.cfg_star, result.seed_split, result.phase, result.budget, result.flags)


def _sample_row(task: Task, r: float, split: float, phase: float, delta: float, flags: str) -> tuple:
    return (task.n_T, task.eta, str(task.scenario), str(task.observable), r, split, phase, delta, NAN, NAN, NAN, flags)


def _phase_map_task(spec: RunSpec, task: Task) -> List[tuple]:
    grid = phase_map(task.observable, task.n_T, task.eta, spec.r, spec.seed_split, spec.phase_points)
    split = grid.seed_split
    rows = []
    for i, theta in enumerate(grid.thetas):
        for j, seed_phase in enumerate(grid.seed_phases):
            rows.append((task.n_T, task.eta, str(task.observable), spec.r, split, theta, seed_phase, grid.values[i, j]))
    return rows


def _scaling_task(spec: RunSpec, task: Task) -> List[tuple]:
    result = optimize(task.scenario, task.observable, task.n_T, task.eta)
    return [(task.n_T, result.delta_eps_sq_star)]


# oracle failures a validation run records as rows instead of aborting on
ORACLE_FAILURES = {"truncation-unsafe": TruncationUnsafe, "derivative-unstable": DerivativeUnstable}


def _validate_task(spec: RunSpec, index: int, cfg: ProbeConfig) -> List[tuple]:
    head = (index, cfg.digest(), cfg.eta, cfg.r)
    try:
        oracle = oracle_moments(cfg)
    except tuple(ORACLE_FAILURES.values()) as e:
        logger.warning("Oracle gave up on probe %d: %s", index, e)
        flag = next(name for name, kind in ORACLE_FAILURES.items() if isinstance(e, kind))
        return [head + (0, "", NAN, NAN, flag)]
    mismatches = compare_tables(compute_moments(cfg), oracle)
    if not mismatches:
        return [head + (0, "", NAN, NAN, "")]
    worst = max(mismatches, key=lambda m: abs(m.engine - m.oracle) / max(abs(m.oracle), 1e-300))
    entry = f"{worst.part}({worst.p},{worst.q})"
    return [head + (len(mismatches), entry, worst.engine, worst.oracle, "mismatch")]


class TwinBeam:
    """The engine behind the command line. Expands a RunSpec into tasks and collects their rows."""

    spec: RunSpec
    """The resolved run."""
    num_jobs: int = 1
    """The number of jobs to dispatch, according to the JobLib package."""

    def __init__(self, spec: RunSpec, num_jobs: Optional[int] = None):
        self.spec = spec
        self.num_jobs = spec.jobs if num_jobs is None else num_jobs
        self.report: Optional[Report] = None

    def header(self) -> Dict[str, str]:
        from twinbeam import __version__

        header = {"version": __version__}
        header.update(self.spec.header())
        return header

    def tasks(self) -> List[Task]:
        spec = self.spec
        if spec.command in ("MOMENTS", "ERROR"):
            return [Task(spec.scenario, None, n, e) for n in spec.n_T for e in spec.eta]
        # scaling fits run over n_T within each (observable, eta) group
        if spec.command == "SCALING":
            return [Task(spec.scenario, o, n, e) for o in spec.observables for e in spec.eta for n in spec.n_T]
        return [Task(spec.scenario, o, n, e) for n in spec.n_T for e in spec.eta for o in spec.observables]

    def _dispatch(self, fn: Callable, jobs: Sequence[tuple]):
        """Results in submission order, as they complete."""
        if self.num_jobs == 1 or len(jobs) == 1:
            return (fn(*args) for args in jobs)
        return Parallel(n_jobs=self.num_jobs, return_as="generator")(delayed(fn)(*args) for args in jobs)

    def run(self) -> Report:
        """
        Runs every task of the RunSpec. A failing task stops the run; the rows
        completed before it are kept and the report is marked partial.
        """
        spec = self.spec
        if spec.command == "SCALING":
            check_scaling_grid(spec.n_T)
        report = Report(self.header(), COLUMNS[spec.command], [])
        self.report = report
        if spec.command == "VALIDATE":
            jobs = [(spec, i, cfg) for i, cfg in enumerate(random_suite(spec.suite_size))]
            fn = _validate_task
        else:
            fn = {
                "MOMENTS": _moments_task,
                "ERROR": _error_task,
                "SWEEP": _optimize_task,
                "OPTIMIZE": _optimize_task,
                "PHASE-MAP": _phase_map_task,
                "SCALING": _scaling_task,
            }[spec.command]
            jobs = [(spec, task) for task in self.tasks()]
        logger.info("Dispatching %d %s tasks to %d workers", len(jobs), spec.command.lower(), self.num_jobs)

        try:
            for i, rows in enumerate(self._dispatch(fn, jobs)):
                report.rows.extend(rows)
                logger.debug("Task %d of %d done", i + 1, len(jobs))
        except (KeyboardInterrupt, SystemExit, TwinBeamError):
            report.partial = True
            if spec.command == "SCALING":
                # bare points do not fit the fit columns
                report.rows = []
            raise

        if spec.command == "SCALING":
            points, report.rows = report.rows, []
            try:
                report.rows = self._fit_rows(points)
            except InsensitiveObservable:
                report.partial = True
                raise
        if spec.command == "VALIDATE":
            failed = [row for row in report.rows if row[-1] == "mismatch"]
            if failed:
                raise ValidationFailed(
                    f"{len(failed)} of {len(report.rows)} probes disagree with the Fock oracle, first at index {failed[0][0]}"
                )
            skipped = [row for row in report.rows if row[-1] in ORACLE_FAILURES]
            if skipped:
                raise ORACLE_FAILURES[skipped[0][-1]](
                    f"The Fock oracle gave up on {len(skipped)} of {len(report.rows)} probes, first at index {skipped[0][0]}"
                )
        return report

    def _fit_rows(self, points: List[tuple]) -> List[tuple]:
        spec = self.spec
        size = len(spec.n_T)
        rows = []
        groups = [(o, e) for o in spec.observables for e in spec.eta]
        for g, (obs, eta) in enumerate(groups):
            n_T, delta = zip(*points[g * size:(g + 1) * size])
            try:
                fit, flags = fit_power_law(n_T, delta), ""
            except PoorFit as e:
                fit, flags = e.fit, "poor-fit"
            rows.append((
                str(spec.scenario), str(obs), eta, fit.exponent, fit.prefactor, fit.r_squared,
                fit.n_T_range[0], fit.n_T_range[1], flags,
            ))
        if any(row[-1] for row in rows):
            self.report.rows = rows
            raise PoorFit(f"{sum(bool(row[-1]) for row in rows)} scaling fits fall below the r^2 threshold")
        return rows

    def write(self, report: Optional[Report] = None, stream: Optional[TextIO] = None):
        """Writes a report to the RunSpec output file, or to stream when no file is set."""
        report = report or self.report
        text = to_json(report) if self.spec.format == "JSON" else to_csv(report)
        if self.spec.output is None:
            (stream or sys.stdout).write(text)
            return
        with open(self.spec.output, "w", newline="") as f:
            f.write(text)
        logger.info("Wrote %d rows to %s", len(report.rows), self.spec.output)


def to_csv(report: Report) -> str:
    """Header lines '# key: value', then the column row and the data rows."""
    buffer = io.StringIO()
    for key, value in report.header.items():
        buffer.write(f"# {key}: {value}\n")
    buffer.write(f"# partial: {str(report.partial).lower()}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def to_json(report: Report) -> str:
    document: Dict[str, Any] = {
        "header": report.header,
        "partial": report.partial,
        "rows": [{c: _json_value(v) for c, v in zip(report.columns, row)} for row in report.rows],
    }
    return json.dumps(document, sort_keys=True, indent=2) + "\n"
