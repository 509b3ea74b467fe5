import math
from pathlib import Path

import pytest

from twinbeam.channel_model import Scenario
from twinbeam.config import (
    JOBS_ENV,
    OBSERVABLES,
    SCENARIOS,
    RunSpec,
    check_mode,
    check_output,
    load_spec_file,
    parse_eta,
    parse_n_T,
    parse_observables,
    resolve_jobs,
)
from twinbeam.estimators import Observable
from twinbeam.exceptions import InvalidSpec


class TestCheckMode:
    @pytest.mark.parametrize("alias", ["vacuum", " TMSV ", "squeezed_vacuum", "Squeezed-Vacuum"])
    def test_scenario_aliases(self, alias):
        assert check_mode(alias, SCENARIOS) is Scenario.VACUUM

    def test_sequence(self):
        assert check_mode("csv", ("CSV", "JSON")) == "CSV"

    def test_observables_are_case_sensitive(self):
        assert check_mode("G11", OBSERVABLES, case_sensitive=True) is Observable.G11
        assert check_mode("g11", OBSERVABLES, case_sensitive=True) is Observable.SMALL_G11
        with pytest.raises(InvalidSpec):
            check_mode("Nrf", OBSERVABLES, case_sensitive=True)

    @pytest.mark.parametrize("mode", ["entangled", 3, None])
    def test_rejects(self, mode):
        with pytest.raises(InvalidSpec):
            check_mode(mode, SCENARIOS)


class TestParsers:
    def test_range(self):
        values = parse_n_T("1e2:1e5")
        assert len(values) == 7
        assert values[0] == 100.0
        assert values[-1] == 1e5
        assert math.isclose(values[1], 10 ** 2.5)

    def test_range_count(self):
        assert len(parse_n_T("10:1000:3")) == 3

    @pytest.mark.parametrize("value,expected", [("5", (5.0,)), ("10, 20,40", (10.0, 20.0, 40.0)), (50, (50.0,)), ([1, 2], (1.0, 2.0))])
    def test_lists(self, value, expected):
        assert parse_n_T(value) == expected

    @pytest.mark.parametrize("value", ["", "1e5:1e2", "1:2:3:4", "1:10:x", "1:10:1", "-1", "20,10", "5,5", "nan", "abc"])
    def test_bad_budgets(self, value):
        with pytest.raises(InvalidSpec):
            parse_n_T(value)

    def test_eta(self):
        assert parse_eta("0.5,0.7,1") == (0.5, 0.7, 1.0)
        assert parse_eta(1.0) == (1.0,)

    @pytest.mark.parametrize("value", ["0", "1.2", "1,0.5", "-0.3"])
    def test_bad_eta(self, value):
        with pytest.raises(InvalidSpec):
            parse_eta(value)

    def test_observables(self):
        assert parse_observables("NRF,g11") == (Observable.NRF, Observable.SMALL_G11)
        with pytest.raises(InvalidSpec):
            parse_observables("G11,G11")
        with pytest.raises(InvalidSpec):
            parse_observables("")


class TestJobs:
    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv(JOBS_ENV, "3")
        assert resolve_jobs(2) == 2

    def test_environment(self, monkeypatch):
        monkeypatch.setenv(JOBS_ENV, "3")
        assert resolve_jobs(None) == 3

    def test_cpu_count(self, monkeypatch):
        monkeypatch.delenv(JOBS_ENV, raising=False)
        assert resolve_jobs(None) >= 1

    @pytest.mark.parametrize("jobs", [0, -2, "many"])
    def test_rejects(self, jobs):
        with pytest.raises(InvalidSpec):
            resolve_jobs(jobs)

    def test_bad_environment(self, monkeypatch):
        monkeypatch.setenv(JOBS_ENV, "0")
        with pytest.raises(InvalidSpec):
            resolve_jobs(None)


class TestSpecFile:
    def test_load(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text('[run]\nscenario = "single"\nnT = "1e2:1e4:3"\neta = [0.7, 1.0]\nseed-split = 0.5\n')
        assert load_spec_file(str(path)) == {
            "scenario": "single",
            "n_T": "1e2:1e4:3",
            "eta": [0.7, 1.0],
            "seed_split": 0.5,
        }

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("[run]\nsqueezing = 1.0\n")
        with pytest.raises(InvalidSpec, match="unknown keys"):
            load_spec_file(str(path))

    def test_missing_table(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text('scenario = "single"\n')
        with pytest.raises(InvalidSpec):
            load_spec_file(str(path))

    def test_bad_toml(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("[run\n")
        with pytest.raises(InvalidSpec):
            load_spec_file(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidSpec):
            load_spec_file(str(tmp_path / "absent.toml"))


class TestOutput:
    def test_writable(self, tmp_path):
        check_output(str(tmp_path / "out.csv"))
        check_output(None)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(InvalidSpec):
            check_output(str(tmp_path / "absent" / "out.csv"))

    def test_directory(self, tmp_path):
        with pytest.raises(InvalidSpec):
            check_output(str(tmp_path))


class TestRunSpec:
    def test_defaults(self):
        spec = RunSpec.from_options("error", {}, jobs=1)
        assert spec.command == "ERROR"
        assert spec.scenario is Scenario.DOUBLE
        assert spec.observables == tuple(Observable)
        assert spec.suite_size == 50

    def test_from_options(self):
        options = {"scenario": "single-seeding", "observables": "g11", "n_T": "10,100", "r": 1, "format": "json", "suite": "quick"}
        spec = RunSpec.from_options("sweep", options, jobs=2)
        assert spec.scenario is Scenario.SINGLE
        assert spec.observables == (Observable.SMALL_G11,)
        assert spec.n_T == (10.0, 100.0)
        assert spec.r == 1.0
        assert spec.format == "JSON"
        assert spec.suite_size == 5
        assert spec.jobs == 2

    def test_unset_options_are_ignored(self):
        assert RunSpec.from_options("moments", {"r": None, "scenario": None}, jobs=1).r is None

    @pytest.mark.parametrize(
        "command,options",
        [
            ("plot", {}),
            ("error", {"r": -1}),
            ("error", {"seed_split": 1.5}),
            ("error", {"phase": "inf"}),
            ("error", {"phase_points": 2}),
            ("error", {"format": "xml"}),
            ("validate", {"suite": "huge"}),
            ("phase-map", {}),
            ("phase-map", {"r": 1.0, "scenario": "single"}),
        ],
    )
    def test_rejects(self, command, options):
        with pytest.raises(InvalidSpec):
            RunSpec.from_options(command, options, jobs=1)

    def test_header(self):
        spec = RunSpec.from_options("error", {"n_T": "0.1,100", "observables": "NRF,G11"}, jobs=4)
        header = spec.header()
        assert list(header)[:4] == ["command", "scenario", "observables", "n_T"]
        assert header["scenario"] == "double"
        assert header["observables"] == "NRF,G11"
        assert header["n_T"] == "0.10000000000000001,100"
        assert header["r"] == ""
        assert "jobs" not in header

    def test_jobs_do_not_change_equality(self):
        assert RunSpec.from_options("error", {}, jobs=1) == RunSpec.from_options("error", {}, jobs=8)


FIGS = sorted((Path(__file__).resolve().parent.parent / "figs").glob("*.toml"))


@pytest.mark.parametrize("path", FIGS, ids=lambda p: p.stem)
def test_shipped_spec_files(path):
    options = load_spec_file(str(path))
    spec = RunSpec.from_options(options.pop("command"), options, jobs=1)
    assert spec.format == "CSV"


def test_every_figure_has_a_spec_file():
    assert [p.stem for p in FIGS] == ["fig2", "fig3", "fig4", "fig5", "fig6", "table1"]
