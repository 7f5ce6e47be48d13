import json

import numpy as np
import pytest

from polsarcd import WishartParams, sample
from polsarcd.errors import DomainError, RegionTooSmall
from polsarcd.experiments import (
    PowerExperimentConfig,
    SizeExperimentConfig,
    run_power_experiment,
    run_same_target_experiment,
    run_size_experiment,
    wilson_interval,
)
from polsarcd.model import derive_seed
from polsarcd.presets import size_preset


@pytest.fixture(scope="module")
def tiny_cfg(theta_b1):
    return SizeExperimentConfig(
        theta=theta_b1,
        sample_sizes=(12,),
        levels=(0.05, 0.10),
        replications=10,
        looks=4.0,
        seed=77,
    )


class TestWilson:
    def test_contains_point_estimate(self):
        lo, hi = wilson_interval(30, 100)
        assert lo <= 0.3 <= hi

    def test_degenerate(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)

    def test_extremes_stay_in_unit_interval(self):
        lo, hi = wilson_interval(0, 50)
        assert lo == 0.0 and 0.0 < hi < 0.2
        lo, hi = wilson_interval(50, 50)
        assert 0.8 < lo < 1.0 and hi == 1.0


class TestSizeExperiment:
    def test_rates_are_multiples_of_one_over_t(self, tiny_cfg):
        report = run_size_experiment(tiny_cfg)
        for row in report.rows:
            assert (row.rate * 10) == pytest.approx(round(row.rate * 10), abs=1e-12)

    def test_deterministic_repeat(self, tiny_cfg):
        a = run_size_experiment(tiny_cfg)
        b = run_size_experiment(tiny_cfg)
        assert a.rows == b.rows

    def test_deterministic_under_threads(self, tiny_cfg, tmp_path):
        serial = run_size_experiment(tiny_cfg, threads=1)
        threaded = run_size_experiment(tiny_cfg, threads=4)
        assert serial.rows == threaded.rows
        f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
        serial.to_csv(f1)
        threaded.to_csv(f2)
        assert f1.read_bytes() == f2.read_bytes()

    def test_csv_columns(self, tiny_cfg, tmp_path):
        report = run_size_experiment(tiny_cfg)
        out = tmp_path / "r.csv"
        report.to_csv(out)
        header = out.read_text().splitlines()[0]
        assert header == "method,n,level_or_k,rate,mean_stat,ci_lo,ci_hi"

    def test_config_validation(self, theta_b1):
        with pytest.raises(DomainError):
            SizeExperimentConfig(theta_b1, (1,), (0.05,), 10)
        with pytest.raises(DomainError):
            SizeExperimentConfig(theta_b1, (5,), (1.5,), 10)
        with pytest.raises(DomainError):
            SizeExperimentConfig(theta_b1, (5,), (0.05,), 0)

    def test_json_config_roundtrip(self, tmp_path, b1):
        doc = {
            "sigma": [[[z.real, z.imag] for z in row] for row in b1],
            "looks": 4,
            "sample_sizes": [10, 20],
            "levels": [0.05],
            "replications": 5,
            "methods": ["lr", "shannon"],
            "looks_mode": "known",
            "seed": 3,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        cfg = SizeExperimentConfig.from_json(path)
        assert cfg.sample_sizes == (10, 20)
        assert cfg.looks == 4.0
        assert cfg.methods == ("lr", "shannon")
        report = run_size_experiment(cfg)
        assert len(report.rows) == 2 * 2  # methods x sizes (one level)


class TestPowerExperiment:
    def test_zero_contrast_reduces_to_size(self, theta_b1):
        size_cfg = SizeExperimentConfig(
            theta=theta_b1,
            sample_sizes=(15,),
            levels=(0.05,),
            replications=40,
            methods=("lr", "shannon"),
            looks=4.0,
            seed=5,
        )
        power_cfg = PowerExperimentConfig(
            theta=theta_b1,
            contrast_factors=(0.0,),
            sample_sizes=(15,),
            level=0.05,
            replications=40,
            methods=("lr", "shannon"),
            looks=4.0,
            seed=5,
        )
        size_report = run_size_experiment(size_cfg)
        power_report = run_power_experiment(power_cfg)
        for m in ("lr", "shannon"):
            assert power_report.rate(m, 15, 0.0) == size_report.rate(m, 15, 0.05)

    def test_power_grows_with_contrast(self, theta_b1):
        cfg = PowerExperimentConfig(
            theta=theta_b1,
            contrast_factors=(0.2, 0.4),
            sample_sizes=(50,),
            level=0.01,
            replications=150,
            methods=("shannon",),
            looks=4.0,
            seed=6,
        )
        report = run_power_experiment(cfg)
        assert report.rate("shannon", 50, 0.4) > report.rate("shannon", 50, 0.2)

    def test_contrast_domain(self, theta_b1):
        with pytest.raises(DomainError):
            PowerExperimentConfig(
                theta=theta_b1,
                contrast_factors=(-1.0,),
                sample_sizes=(10,),
                level=0.05,
                replications=5,
            )


class TestMeanStatisticTrend:
    def test_mean_statistics_approach_reference_df(self, theta_b1):
        # the small-sample inflation of the mean statistic shrinks with N;
        # T=4000 separates the drift from Monte Carlo noise
        cfg = SizeExperimentConfig(
            theta=theta_b1,
            sample_sizes=(10, 200),
            levels=(0.05,),
            replications=4000,
            methods=("lr", "shannon"),
            looks=4.0,
            seed=8,
        )
        report = run_size_experiment(cfg)
        assert abs(report.mean_statistic("lr", 200) - 9.0) < abs(
            report.mean_statistic("lr", 10) - 9.0
        )
        assert abs(report.mean_statistic("shannon", 200) - 1.0) < abs(
            report.mean_statistic("shannon", 10) - 1.0
        )


class TestSameTarget:
    def test_null_calibration_on_synthetic_region(self, theta_b1):
        region = sample(theta_b1, 1200, derive_seed(90, 0))
        report = run_same_target_experiment(
            [region],
            sample_sizes=(100,),
            levels=(0.10,),
            replications=300,
            seed=91,
            methods=("lr",),
            looks=4.0,
        )
        row = report.cell("lr", 100, 0.10)
        assert row.ci_lo <= 0.10 <= row.ci_hi + 0.03

    def test_region_too_small(self, theta_b1):
        region = sample(theta_b1, 30, derive_seed(92, 0))
        with pytest.raises(RegionTooSmall):
            run_same_target_experiment(
                [region],
                sample_sizes=(16,),
                levels=(0.05,),
                replications=3,
                seed=93,
                methods=("lr",),
                looks=4.0,
            )

    def test_across_pairing_detects_contrast(self, theta_b1):
        ra = sample(theta_b1, 200, derive_seed(94, 0))
        rb = sample(theta_b1.scaled(2.0), 200, derive_seed(94, 1))
        report = run_same_target_experiment(
            [ra, rb],
            sample_sizes=(49,),
            levels=(0.01,),
            replications=60,
            seed=95,
            methods=("shannon",),
            looks=4.0,
            pairing="across",
        )
        assert report.rate("shannon", 49, 0.01) > 0.9

    def test_deterministic(self, theta_b1):
        region = sample(theta_b1, 300, derive_seed(96, 0))
        kwargs = dict(
            sample_sizes=(25,),
            levels=(0.05,),
            replications=20,
            seed=97,
            methods=("kl",),
            looks=4.0,
        )
        a = run_same_target_experiment([region], **kwargs)
        b = run_same_target_experiment([region], threads=3, **kwargs)
        assert a.rows == b.rows


class TestPresets:
    def test_size_preset_shape(self):
        cfg = size_preset(replications=10)
        assert cfg.theta.p == 3
        assert cfg.theta.looks == 4.0
        assert cfg.looks == 4.0
        assert cfg.sample_sizes == tuple(range(10, 51))
