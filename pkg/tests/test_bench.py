import dataclasses
import math

import pytest

from clrsc import bench
from clrsc.errors import ContractViolation

SMALL = dict(ambient=20, k=3, dim=2, per_cluster=6)


def small_config(**kw):
    base = dict(trials=2, noise_levels=["clean", 30], generator_params=SMALL, seed=11, kmeans_restarts=5)
    base.update(kw)
    return bench.ExperimentConfig(**base)


@pytest.fixture(scope="module")
def report():
    return bench.run_experiment(small_config())


def test_record_count(report):
    # two views, so lrr-per-view contributes two rows per cell
    assert len(report.records) == 2 * 2 * (1 + 1 + 2)
    assert [r.method for r in report.records[:4]] == ["clrsc", "mlap", "lrr-v1", "lrr-v2"]


def test_record_count_arithmetic():
    cfg = bench.ExperimentConfig(trials=50, noise_levels=[48, 44, 40, 36, 32], methods=["clrsc", "mlap"])
    assert cfg.trials * len(cfg.noise_levels) * len(cfg.methods) == 500


def test_summary_rows(report):
    assert len(report.summary) == 2 * 4
    assert {(r["psnr_db"], r["method"]) for r in report.summary} == {
        (lvl, m) for lvl in (math.inf, 30.0) for m in ("clrsc", "mlap", "lrr-v1", "lrr-v2")
    }


def test_z_diff_present_for_multi_view(report):
    for r in report.records:
        assert r.z_diff is not None and r.z_diff >= 0


@pytest.mark.parametrize(
    "kw",
    [dict(methods=[]), dict(trials=0), dict(methods=["ssc"]), dict(noise_levels=[]),
     dict(noise_levels=["nan"]), dict(generator="yale"), dict(solver={"lam": 1})],
)
def test_config_rejects(kw):
    with pytest.raises(ContractViolation):
        small_config(**kw)


def test_reaggregation_reproduces_summary(tmp_path, report):
    out = bench.write_report(report, tmp_path / "run")
    records = bench.read_records(out / "records.csv")
    again = dataclasses.replace(report, records=records, summary=bench.summarize(records))
    bench.write_report(again, tmp_path / "again")
    assert (out / "summary.csv").read_bytes() == (tmp_path / "again" / "summary.csv").read_bytes()


def test_report_headers(tmp_path, report):
    out = bench.write_report(report, tmp_path)
    assert (out / "records.csv").read_text().splitlines()[0] == ",".join(bench.RECORD_FIELDS)
    assert (out / "summary.csv").read_text().splitlines()[0] == ",".join(bench.SUMMARY_FIELDS)
    assert "lambda_per_view" in (out / "run_manifest.json").read_text()


def _strip_runtime(text):
    return [line.rsplit(",", 1)[0] for line in text.splitlines()]


def test_deterministic_records(tmp_path, report):
    again = bench.run_experiment(small_config())
    a = bench.write_report(report, tmp_path / "a") / "records.csv"
    b = bench.write_report(again, tmp_path / "b") / "records.csv"
    assert _strip_runtime(a.read_text()) == _strip_runtime(b.read_text())


def test_parallel_matches_serial(report):
    par = bench.run_experiment(small_config(), jobs=2)
    strip = lambda rs: [dataclasses.replace(r, runtime_ms=0.0) for r in rs]
    assert strip(par.records) == strip(report.records)


def test_methods_do_not_interact(report):
    alone = bench.run_experiment(small_config(methods=["mlap"]))
    ref = [r for r in report.records if r.method == "mlap"]
    assert [(r.sca, r.z_diff, r.iterations) for r in alone.records] == [(r.sca, r.z_diff, r.iterations) for r in ref]


def test_single_clean_trial_recovers():
    rep = bench.run_experiment(bench.ExperimentConfig(trials=1, noise_levels=["clean"], methods=["clrsc"]))
    assert len(rep.records) == 1
    assert rep.records[0].sca == 100.0


def test_numerical_failure_is_recorded(monkeypatch):
    from clrsc.errors import NumericalFailure

    def boom(*a, **k):
        raise NumericalFailure("diverged", iteration=4)

    monkeypatch.setattr(bench, "solve_clrsc", boom)
    rep = bench.run_experiment(small_config(trials=1, methods=["clrsc", "mlap"]))
    bad = [r for r in rep.records if r.method == "clrsc"]
    assert all(math.isnan(r.sca) and not r.converged and r.iterations == 4 for r in bad)
    assert all(not math.isnan(r.sca) for r in rep.records if r.method == "mlap")


def test_semisynthetic_reports_library(tmp_path):
    cfg = small_config(generator="semisynthetic", trials=1, noise_levels=["clean"], methods=["clrsc"],
                       generator_params=dict(bands=40, count=12, repeats=3))
    rep = bench.run_experiment(cfg)
    assert rep.library_source.startswith("standin")
    assert "standin" in (bench.write_report(rep, tmp_path) / "run_manifest.json").read_text()


def test_config_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("trials: 3\nnoise_levels: [clean, 40]\nsolver:\n  tau: 0.2\n")
    cfg = bench.ExperimentConfig(**bench.load_config_file(p))
    assert cfg.trials == 3 and cfg.noise_levels == (math.inf, 40.0)
    assert cfg.solver_config().tau == 0.2
