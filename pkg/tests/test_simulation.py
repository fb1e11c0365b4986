import json

import numpy as np
import pytest
from scipy import integrate, stats

from survwave import simulation as sim
from survwave.errors import UnknownBaseline


def test_baseline_parameters():
    assert sim.make_baseline("delta").components == ((1.0, 0.5, 0.02),)
    assert sim.make_baseline("normal").components == ((1.0, 0.5, 0.15),)
    assert sim.make_baseline("bimodal").components == ((0.5, 0.4, 0.12), (0.5, 0.7, 0.08))
    assert sim.make_baseline("strata").components == ((0.5, 0.2, 0.06), (0.5, 0.7, 0.08))
    multi = sim.make_baseline("multimodal")
    assert len(multi.components) == 3
    assert np.allclose(multi.weights, 1 / 3)
    assert multi.means.tolist() == [0.2, 0.5, 0.7]
    with pytest.raises(UnknownBaseline):
        sim.make_baseline("cauchy")


def test_baseline_validation():
    with pytest.raises(ValueError):
        sim.BaselineDistribution("bad", ((0.6, 0.5, 0.1), (0.6, 0.2, 0.1)))
    with pytest.raises(ValueError):
        sim.BaselineDistribution("bad", ((1.0, 0.5, 0.0),))


def test_baseline_pdf_values():
    normal = sim.make_baseline("normal")
    assert sim.baseline_pdf(normal, 0.5) == pytest.approx(1 / (0.15 * np.sqrt(2 * np.pi)), rel=1e-14)
    bimodal = sim.make_baseline("bimodal")
    want = 0.5 * stats.norm.pdf(0.4, 0.4, 0.12) + 0.5 * stats.norm.pdf(0.4, 0.7, 0.08)
    assert sim.baseline_pdf(bimodal, 0.4) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("name", sorted(sim.BASELINES))
def test_baseline_pdf_integrates_to_one(name):
    b = sim.make_baseline(name)
    breaks = sorted(b.means)
    pieces = sum(
        integrate.quad(lambda x: sim.baseline_pdf(b, x), lo, hi, limit=200)[0]
        for lo, hi in zip([-5.0] + breaks, breaks + [6.0])
    )
    assert pieces == pytest.approx(1.0, abs=1e-8)
    assert sim.baseline_cdf(b, 6.0) == pytest.approx(1.0, abs=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        sim.SimulationConfig("normal", 1)
    with pytest.raises(ValueError):
        sim.SimulationConfig("normal", 10, replications=0)
    with pytest.raises(ValueError):
        sim.SimulationConfig("normal", 10, lam=0.0)
    with pytest.raises(ValueError):
        sim.SimulationConfig("normal", 10, grid=[0.5, 0.2])
    with pytest.raises(ValueError):
        sim.SimulationConfig("normal", 10, grid=[])
    with pytest.raises(ValueError):
        sim.SimulationConfig("normal", 10, estimator_kinds=("wild",))
    with pytest.raises(ValueError):
        sim.SimulationConfig("normal", 10, censoring_param="scale")
    cfg = sim.SimulationConfig("normal", 1000)
    assert cfg.resolution == 7
    assert sim.SimulationConfig("normal", 1000, level=3).resolution == 3
    assert cfg.grid.size == 512 and not cfg.grid.flags.writeable


def test_replications_are_reproducible_and_independent():
    cfg = sim.SimulationConfig("bimodal", 50, seed=9)
    a = sim.generate_replication(cfg, 3)
    b = sim.generate_replication(cfg, 3)
    c = sim.generate_replication(cfg, 4)
    assert np.array_equal(a.y, b.y) and np.array_equal(a.delta, b.delta)
    assert not np.array_equal(a.y, c.y)
    assert np.all(a.y >= 0)
    assert not a.normalized


def test_extreme_censoring_limits():
    heavy = sim.SimulationConfig("normal", 2000, lam=1e6, censoring_param="rate")
    assert sim.generate_replication(heavy, 0).censoring_proportion > 0.99
    none = sim.SimulationConfig("normal", 2000, lam=1e-9, censoring_param="rate")
    assert sim.generate_replication(none, 0).censoring_proportion == 0.0


def test_default_censoring_proportion():
    cfg = sim.SimulationConfig("normal", 10000)
    p = sim.generate_replication(cfg, 0).censoring_proportion
    assert 0.35 <= p <= 0.55


def test_exact_stub_gives_zero_amse():
    cfg = sim.SimulationConfig("normal", 20, replications=1, grid=[0.5], estimator_kinds=("partial",))

    def perfect(sample, kind):
        return sim.true_density(cfg, cfg.grid, sample.tau), None

    rep = sim.run_study(cfg, curve_fn=perfect)
    assert rep.kinds["partial"].amse_mean == 0.0


def test_zero_estimator_amse_is_mean_square_truth():
    cfg = sim.SimulationConfig("strata", 30, replications=4, estimator_kinds=("partial",))

    def zero(sample, kind):
        return np.zeros(cfg.grid.size), None

    rep = sim.run_study(cfg, curve_fn=zero)
    for b in range(4):
        tau = rep.taus[b]
        truth = sim.true_density(cfg, cfg.grid, tau)
        assert rep.kinds["partial"].mse[b] == pytest.approx(np.mean(truth ** 2), rel=1e-14)


def test_report_invariants_and_determinism():
    cfg = sim.SimulationConfig("bimodal", 200, replications=30, seed=5)
    a = sim.run_study(cfg)
    b = sim.run_study(cfg)
    for kind in ("partial", "complete"):
        s = a.kinds[kind]
        assert s.amse_min <= s.amse_mean <= s.amse_max
        assert np.all(s.q025 <= s.q975)
        assert s.mse[s.best_index] == s.amse_min
        assert np.array_equal(s.curves, b.kinds[kind].curves)
        assert np.array_equal(s.mse, b.kinds[kind].mse)
    assert a.to_dict() == b.to_dict()
    assert 0 < a.censoring_proportion < 1


def test_parallel_matches_serial():
    cfg = sim.SimulationConfig("normal", 100, replications=9, seed=2)
    serial = sim.run_study(cfg)
    parallel = sim.run_study(cfg, workers=3)
    for kind in cfg.estimator_kinds:
        assert np.array_equal(serial.kinds[kind].curves, parallel.kinds[kind].curves)
    assert serial.to_dict() == parallel.to_dict()


def test_sample_point_convention_and_direct_truth():
    cfg = sim.SimulationConfig("normal", 100, replications=5, mse_points="samples", truth="direct")
    rep = sim.run_study(cfg)
    assert rep.to_dict()["mse_points"] == "samples"
    assert np.allclose(rep.true_pdf, sim.baseline_pdf(cfg.baseline, cfg.grid))


def test_report_files(tmp_path):
    cfg = sim.SimulationConfig("normal", 100, replications=5, seed=7, grid=np.linspace(0, 1, 16))
    paths = sim.run_study(cfg).write(tmp_path)
    assert [p.split("/")[-1] for p in paths] == ["report.json", "curves_partial.csv", "curves_complete.csv"]
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["N"] == 100 and report["B"] == 5 and report["J"] == 4
    assert set(report["estimators"]) == {"partial", "complete"}
    lines = (tmp_path / "curves_partial.csv").read_text().splitlines()
    assert lines[0] == "x,true_pdf,mean_estimate,q025,q975,best_estimate"
    assert len(lines) == 17


@pytest.mark.slow
def test_amse_smaller_at_large_n():
    amse = {}
    for n in (100, 1000):
        cfg = sim.SimulationConfig("normal", n, replications=200, estimator_kinds=("partial",))
        amse[n] = sim.run_study(cfg).kinds["partial"].amse_mean
    assert amse[100] > amse[1000]


@pytest.mark.slow
@pytest.mark.parametrize("name", ["normal", "bimodal", "strata", "multimodal"])
def test_amse_strictly_decreasing_in_n(name):
    values = []
    for n in (100, 200, 500, 1000):
        cfg = sim.SimulationConfig(name, n, replications=200, estimator_kinds=("partial",))
        values.append(sim.run_study(cfg).kinds["partial"].amse_mean)
    assert all(a > b for a, b in zip(values, values[1:])), f"Mean AMSE by N: {values}"
