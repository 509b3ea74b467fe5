import io
import json
import math

import pytest

from twinbeam.bosonic_algebra import EpsJet
from twinbeam.channel_model import Scenario
from twinbeam.config import RunSpec
from twinbeam.estimators import Observable
from twinbeam.exceptions import DerivativeUnstable, Infeasible, TruncationUnsafe, ValidationFailed
from twinbeam.moment_engine import MomentTable, compute_moments
from twinbeam.twinbeam import Report, TwinBeam, format_value, to_csv, to_json


def spec(command, **options):
    return RunSpec.from_options(command, options, jobs=1)


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(math.inf) == "inf"
    assert format_value(3) == "3"
    assert format_value("NRF") == "NRF"


def test_to_csv():
    report = Report({"command": "ERROR"}, ("n_T", "flags"), [(10.0, ""), (1e5, "insensitive")])
    assert to_csv(report) == "# command: ERROR\n# partial: false\nn_T,flags\n10,\n100000,insensitive\n"


def test_to_json():
    report = Report({"command": "ERROR"}, ("n_T", "delta_eps_sq"), [(10.0, math.inf)], partial=True)
    document = json.loads(to_json(report))
    assert document == {"header": {"command": "ERROR"}, "partial": True, "rows": [{"n_T": 10.0, "delta_eps_sq": "inf"}]}


class TestTasks:
    def test_fixed_probe_tasks(self):
        tasks = TwinBeam(spec("error", n_T="10,100", eta="0.5,1")).tasks()
        assert [(t.n_T, t.eta, t.observable) for t in tasks] == [(10, 0.5, None), (10, 1, None), (100, 0.5, None), (100, 1, None)]

    def test_sweep_order(self):
        tasks = TwinBeam(spec("sweep", n_T="10,100", observables="G11,NRF")).tasks()
        assert [(t.n_T, t.observable) for t in tasks] == [
            (10, Observable.G11), (10, Observable.NRF), (100, Observable.G11), (100, Observable.NRF),
        ]

    def test_scaling_groups_budgets(self):
        tasks = TwinBeam(spec("scaling", n_T="1e2:1e4:3", observables="NRF,G11")).tasks()
        assert [t.observable for t in tasks] == [Observable.NRF] * 3 + [Observable.G11] * 3
        assert [t.n_T for t in tasks[:3]] == [1e2, 1e3, 1e4]


class TestRun:
    def test_header_leads_with_version(self):
        from twinbeam import __version__

        header = TwinBeam(spec("moments", scenario="vacuum")).header()
        assert list(header)[:2] == ["version", "command"]
        assert header["version"] == __version__

    def test_rows_follow_columns(self):
        engine = TwinBeam(spec("error", scenario="classical", n_T="10,20"))
        report = engine.run()
        assert engine.report is report
        assert not report.partial
        assert len(report.rows) == 2 * 3
        assert all(len(row) == len(report.columns) for row in report.rows)

    def test_failure_keeps_completed_rows(self):
        # built directly, since parsed budgets must increase
        engine = TwinBeam(RunSpec("ERROR", Scenario.SINGLE, r=1.0, n_T=(10.0, 1.0)))
        with pytest.raises(Infeasible):
            engine.run()
        assert engine.report.partial
        assert [row[0] for row in engine.report.rows] == [10.0] * 3

    def test_write_to_stream(self):
        engine = TwinBeam(spec("moments", scenario="vacuum", n_T=2, format="json"))
        out = io.StringIO()
        engine.write(engine.run(), out)
        assert len(json.loads(out.getvalue())["rows"]) == 15


class TestValidate:
    def test_agreement(self, monkeypatch):
        monkeypatch.setattr("twinbeam.twinbeam.oracle_moments", compute_moments)
        report = TwinBeam(spec("validate", suite="quick")).run()
        assert len(report.rows) == 5
        assert all(row[4] == 0 and row[-1] == "" for row in report.rows)

    def test_disagreement(self, monkeypatch):
        def doubled(cfg):
            m = compute_moments(cfg)
            return MomentTable({k: EpsJet(2 * v.value0, v.dvalue) for k, v in m.entries.items()}, m.cfg_hash)

        monkeypatch.setattr("twinbeam.twinbeam.oracle_moments", doubled)
        engine = TwinBeam(spec("validate", suite="quick"))
        with pytest.raises(ValidationFailed):
            engine.run()
        assert [row[-1] for row in engine.report.rows] == ["mismatch"] * 5
        assert all(row[4] > 0 for row in engine.report.rows)

    @pytest.mark.parametrize("error,flag", [(TruncationUnsafe, "truncation-unsafe"), (DerivativeUnstable, "derivative-unstable")])
    def test_oracle_failures_are_rows(self, monkeypatch, error, flag):
        def give_up(cfg):
            raise error("the oracle could not finish")

        monkeypatch.setattr("twinbeam.twinbeam.oracle_moments", give_up)
        engine = TwinBeam(spec("validate", suite="quick"))
        with pytest.raises(error):
            engine.run()
        assert len(engine.report.rows) == 5
        assert {row[-1] for row in engine.report.rows} == {flag}
