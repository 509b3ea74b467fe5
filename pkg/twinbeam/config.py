"""
Date: October 19th, 2026

This file contains the run specification shared by the command-line driver
and the TwinBeam engine: sanitizing of mode strings, parsing of photon
budget ranges, loading of TOML spec files and the checks a spec must pass
before any computation starts.

"""

from __future__ import annotations

import logging
import math
import os
import sys
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from twinbeam.channel_model import Scenario
from twinbeam.estimators import Observable
from twinbeam.exceptions import InvalidSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

JOBS_ENV = "TPA_METROLOGY_JOBS"
DEFAULT_RANGE_COUNT = 7

COMMANDS = ("MOMENTS", "ERROR", "SWEEP", "OPTIMIZE", "PHASE-MAP", "SCALING", "VALIDATE")
FORMATS = ("CSV", "JSON")
SUITES = {"QUICK": 5, "DEFAULT": 50}

SCENARIOS = {
    "VACUUM": Scenario.VACUUM,
    "SQUEEZED-VACUUM": Scenario.VACUUM,
    "TMSV": Scenario.VACUUM,
    "SINGLE": Scenario.SINGLE,
    "SINGLE-SEEDING": Scenario.SINGLE,
    "DOUBLE": Scenario.DOUBLE,
    "DOUBLE-SEEDING": Scenario.DOUBLE,
    "CLASSICAL": Scenario.CLASSICAL,
    "COHERENT": Scenario.CLASSICAL,
}

# G11 and g11 are different observables
OBSERVABLES = {
    "NRF": Observable.NRF,
    "nrf": Observable.NRF,
    "G11": Observable.G11,
    "g11": Observable.SMALL_G11,
}


def check_mode(mode: str, accepted_types: Union[Sequence[str], Mapping[str, Any]], case_sensitive: bool = False):
    """
    Check that a supplied mode type is accepted after sanitization. Mappings
    translate the sanitized alias into its value.
    """
    if not isinstance(mode, str):
        raise InvalidSpec(f"{mode!r} is not a supported settings mode")
    mode = mode.strip().replace("_", "-")
    if not case_sensitive:
        mode = mode.upper()
    if mode not in accepted_types:
        raise InvalidSpec(f"{mode} is not a supported settings mode")
    return accepted_types[mode] if isinstance(accepted_types, Mapping) else mode


def _split(value) -> list:
    if isinstance(value, str):
        return [v for v in (s.strip() for s in value.split(",")) if v]
    if isinstance(value, Iterable):
        return list(value)
    return [value]


def _number(value, name: str) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise InvalidSpec(f"{name} value {value!r} is not a number") from None
    if not math.isfinite(number):
        raise InvalidSpec(f"{name} values must be finite, got {value!r}")
    return number


def _check_ordered(values: Tuple[float, ...], name: str) -> Tuple[float, ...]:
    if not values:
        raise InvalidSpec(f"No {name} values given")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidSpec(f"{name} values must be strictly increasing, got {list(values)}")
    return values


def parse_n_T(value) -> Tuple[float, ...]:
    """
    Photon budgets from a number, a list, a comma list or a log-spaced range
    written start:stop[:count].
    """
    if isinstance(value, str) and ":" in value:
        parts = value.split(":")
        if len(parts) not in (2, 3):
            raise InvalidSpec(f"Ranges are written start:stop[:count], got {value!r}")
        start, stop = _number(parts[0], "n_T"), _number(parts[1], "n_T")
        try:
            count = int(parts[2]) if len(parts) == 3 else DEFAULT_RANGE_COUNT
        except ValueError:
            raise InvalidSpec(f"Range count {parts[2]!r} is not an integer") from None
        if not 0 < start < stop or count < 2:
            raise InvalidSpec(f"Ranges need 0 < start < stop and at least two points, got {value!r}")
        values = tuple(float(v) for v in np.geomspace(start, stop, count))
        # pin the endpoints against rounding in geomspace
        values = (start,) + values[1:-1] + (stop,)
    else:
        values = tuple(_number(v, "n_T") for v in _split(value))
    if any(v <= 0 for v in values):
        raise InvalidSpec(f"Photon budgets must be positive, got {list(values)}")
    return _check_ordered(values, "n_T")


def parse_eta(value) -> Tuple[float, ...]:
    values = tuple(_number(v, "eta") for v in _split(value))
    if any(not 0 < v <= 1 for v in values):
        raise InvalidSpec(f"Transmissivities must lie in (0, 1], got {list(values)}")
    return _check_ordered(values, "eta")


def parse_observables(value) -> Tuple[Observable, ...]:
    observables = tuple(check_mode(v, OBSERVABLES, case_sensitive=True) for v in _split(value))
    if not observables:
        raise InvalidSpec("No observables given")
    if len(set(observables)) != len(observables):
        raise InvalidSpec(f"Observables repeat in {value!r}")
    return observables


def resolve_jobs(jobs: Optional[int]) -> int:
    """The worker count: the flag, then the environment, then the logical CPU count."""
    source = "--jobs"
    if jobs is None and os.environ.get(JOBS_ENV):
        jobs, source = os.environ[JOBS_ENV], JOBS_ENV
    if jobs is None:
        return os.cpu_count() or 1
    try:
        jobs = int(jobs)
    except (TypeError, ValueError):
        raise InvalidSpec(f"{source} must be an integer, got {jobs!r}") from None
    if jobs < 1:
        raise InvalidSpec(f"{source} must be at least 1, got {jobs}")
    return jobs


def load_spec_file(path: str) -> Dict[str, Any]:
    """The [run] table of a TOML spec file, keyed like the long command-line flags."""
    try:
        with open(path, "rb") as f:
            document = tomllib.load(f)
    except OSError as e:
        raise InvalidSpec(f"Cannot read spec file {path}: {e.strerror}") from None
    except tomllib.TOMLDecodeError as e:
        raise InvalidSpec(f"Spec file {path} is not valid TOML: {e}") from None
    run = document.get("run")
    if not isinstance(run, dict):
        raise InvalidSpec(f"Spec file {path} has no [run] table")
    unknown = set(run) - set(SPEC_KEYS)
    if unknown:
        raise InvalidSpec(f"Spec file {path} has unknown keys {sorted(unknown)}")
    logger.debug("Loaded spec file %s", path)
    return {SPEC_KEYS[k]: v for k, v in run.items()}


def check_output(path: Optional[str]):
    """Fails early when the output file cannot be written."""
    if path is None:
        return
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise InvalidSpec(f"Output directory {directory} does not exist")
    if not os.access(directory, os.W_OK):
        raise InvalidSpec(f"Output directory {directory} is not writable")
    if os.path.isdir(path):
        raise InvalidSpec(f"Output path {path} is a directory")


@dataclass(frozen=True)
class RunSpec:
    """A fully resolved run of the command-line driver."""

    command: str
    """One of moments, error, sweep, optimize, phase-map, scaling or validate."""
    scenario: Scenario = Scenario.DOUBLE
    """The probe family."""
    observables: Tuple[Observable, ...] = tuple(Observable)
    """The observables to evaluate, in output order."""
    n_T: Tuple[float, ...] = (100.0,)
    """The photon budgets, strictly increasing."""
    eta: Tuple[float, ...] = (1.0,)
    """The detection transmissivities, strictly increasing."""
    r: Optional[float] = None
    """Fixed squeezing for moments, error and phase-map runs. Optimized when unset."""
    seed_split: Optional[float] = None
    """Fraction of seeded photons in mode 1, for fixed probes."""
    phase: float = 0.0
    """Relative phase theta - Phi of fixed probes."""
    phase_points: int = 64
    """Points per phase axis of phase maps and landscapes."""
    landscape: bool = False
    """Optimize runs also emit the error along the squeezing axis."""
    phase_map: bool = False
    """Optimize runs also emit the error along the relative phase at the optimum."""
    suite: str = "DEFAULT"
    """Size of the validation suite, QUICK or DEFAULT."""
    output: Optional[str] = None
    """Output file; standard output when unset."""
    format: str = "CSV"
    jobs: int = field(default=1, compare=False)
    """Worker count. Excluded from the header so results do not depend on it."""

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidSpec(f"{self.command} is not a supported command")
        if self.format not in FORMATS:
            raise InvalidSpec(f"{self.format} is not a supported output format")
        if self.suite not in SUITES:
            raise InvalidSpec(f"{self.suite} is not a supported validation suite")
        if self.r is not None and not (math.isfinite(self.r) and self.r >= 0):
            raise InvalidSpec(f"Squeezing must be finite and non-negative, got {self.r}")
        if self.seed_split is not None and not 0 <= self.seed_split <= 1:
            raise InvalidSpec(f"The seed split must lie in [0, 1], got {self.seed_split}")
        if not math.isfinite(self.phase):
            raise InvalidSpec(f"The relative phase must be finite, got {self.phase}")
        if self.phase_points < 4:
            raise InvalidSpec(f"Phase grids need at least 4 points, got {self.phase_points}")
        if self.command == "PHASE-MAP" and self.r is None:
            raise InvalidSpec("phase-map runs need a fixed squeezing --r")
        if self.command == "PHASE-MAP" and self.scenario is not Scenario.DOUBLE:
            raise InvalidSpec("phase-map runs are defined for double seeding only")
        check_output(self.output)

    @classmethod
    def from_options(cls, command: str, options: Mapping[str, Any], jobs: Optional[int] = None) -> "RunSpec":
        """Builds a spec from loosely typed options, as read from flags or a spec file."""
        options = {k: v for k, v in options.items() if v is not None}
        kwargs: Dict[str, Any] = {"command": check_mode(command, COMMANDS)}
        if "scenario" in options:
            kwargs["scenario"] = check_mode(options["scenario"], SCENARIOS)
        if "observables" in options:
            kwargs["observables"] = parse_observables(options["observables"])
        if "n_T" in options:
            kwargs["n_T"] = parse_n_T(options["n_T"])
        if "eta" in options:
            kwargs["eta"] = parse_eta(options["eta"])
        for name in ("r", "seed_split", "phase"):
            if name in options:
                kwargs[name] = _number(options[name], name)
        if "phase_points" in options:
            kwargs["phase_points"] = int(options["phase_points"])
        for name in ("landscape", "phase_map"):
            if name in options:
                kwargs[name] = bool(options[name])
        if "suite" in options:
            kwargs["suite"] = check_mode(options["suite"], list(SUITES))
        if "format" in options:
            kwargs["format"] = check_mode(options["format"], FORMATS)
        if "output" in options:
            kwargs["output"] = str(options["output"])
        kwargs["jobs"] = resolve_jobs(jobs if jobs is not None else options.get("jobs"))
        return cls(**kwargs)

    @property
    def suite_size(self) -> int:
        return SUITES[self.suite]

    def header(self) -> Dict[str, str]:
        """The resolved spec as ordered text fields, for output headers."""
        out = {}
        for f in fields(self):
            if not f.compare:
                continue
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(format(v, ".17g") if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                value = format(value, ".17g")
            out[f.name] = "" if value is None else str(value)
        return out


# spec file keys mirror the long flags
SPEC_KEYS = {
    "scenario": "scenario",
    "observable": "observables",
    "nT": "n_T",
    "eta": "eta",
    "r": "r",
    "seed-split": "seed_split",
    "phase": "phase",
    "phase-points": "phase_points",
    "landscape": "landscape",
    "phase-map": "phase_map",
    "suite": "suite",
    "output": "output",
    "format": "format",
    "jobs": "jobs",
    "command": "command",
}
