import math

import numpy as np
import pytest
from scipy import integrate

from cojumps.exceptions import DegenerateConfig
from cojumps.rng import stream
from cojumps.simulator import (
    PRESETS,
    JumpEvent,
    JumpSource,
    PathClass,
    PathTruth,
    ScenarioConfig,
    classify_path,
    preset,
    simulate_levels,
    simulate_path,
)

NONE = JumpSource()


def truth_with(events):
    empty = np.zeros((0, 2))
    return PathTruth(events, np.zeros(0), empty, empty, np.zeros(0, dtype=int), (0.0, 0.0), 0.0, 1.0)


def ev(t, source, j1, j2):
    return JumpEvent(time=t, source=source, size_x=0.1, jump1=j1, jump2=j2)


class TestScenarioConfig:
    def test_preset_names(self):
        assert list(PRESETS) == [
            "I-j", "II-j", "III-j", "I-m", "II-m", "III-m",
            "I-d0", "II-d0", "III-d0", "I-d1", "II-d1", "III-d1",
        ]

    @pytest.mark.parametrize("size,lam,h", [("I", 1.0, 0.7484), ("II", 5.0, 0.3187), ("III", 25.0, 0.1238)])
    def test_preset_values(self, size, lam, h):
        src = JumpSource(alpha=0.01, lam=lam, l=0.05, h=h)
        assert preset(f"{size}-j") == ScenarioConfig(rho=0.0, sources=(NONE, NONE, src))
        assert preset(f"{size}-m") == ScenarioConfig(rho=0.5, sources=(src, src, src))
        assert preset(f"{size}-d0") == ScenarioConfig(rho=0.0, sources=(src, src, NONE))
        assert preset(f"{size}-d1") == ScenarioConfig(rho=1.0, sources=(src, src, NONE))
        assert preset(f"{size}-j").sigma1 ** 2 == pytest.approx(8e-5, rel=1e-14)

    @pytest.mark.parametrize("name", ["I-j", "II-j", "III-j"])
    def test_jump_variance_rate(self, name):
        src = preset(name).sources[2]
        # quadrature over the symmetric uniform mark law
        density = 1.0 / (2 * (src.h - src.l))
        ex2 = 2 * integrate.quad(lambda x: x * x * density, src.l, src.h)[0]
        assert src.mark_second_moment() == pytest.approx(ex2, rel=1e-10)
        assert src.jump_variance_rate() == pytest.approx(2e-5, rel=2e-3)

    def test_unknown_preset(self):
        with pytest.raises(KeyError):
            preset("IV-j")

    def test_degenerate(self):
        with pytest.raises(DegenerateConfig):
            ScenarioConfig(sources=(JumpSource(alpha=2.0, lam=1.0, l=0.1, h=0.5), NONE, NONE))

    @pytest.mark.parametrize(
        "kw",
        [
            dict(rho=1.5),
            dict(sigma1=-1.0),
            dict(sources=(JumpSource(alpha=0.1, lam=1.0, l=0.5, h=0.2), NONE, NONE)),
            dict(x0=(0.0, 1.0)),
            dict(fine_steps_per_obs=0),
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ScenarioConfig(**kw)

    def test_dict_round_trip(self):
        cfg = preset("II-m")
        assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg


class TestClassify:
    def test_common(self):
        assert classify_path(truth_with([ev(0.3, 3, 0.1, 0.1)]), 1.0) is PathClass.JOINT

    def test_disjoint(self):
        t = truth_with([ev(0.3, 1, 0.1, 0.0), ev(0.6, 2, 0.0, -0.1)])
        assert classify_path(t, 1.0) is PathClass.DISJOINT

    def test_one_component(self):
        assert classify_path(truth_with([ev(0.3, 1, 0.1, 0.0)]), 1.0) is PathClass.CONTINUOUS_ANY

    def test_horizon_cut(self):
        t = truth_with([ev(0.3, 1, 0.1, 0.0), ev(0.6, 2, 0.0, -0.1)])
        assert classify_path(t, 0.5) is PathClass.CONTINUOUS_ANY


class TestSimulatePath:
    def test_constant_path(self):
        cfg = ScenarioConfig(sigma1=0.0, sigma2=0.0)
        s, truth = simulate_path(cfg, 50, stream(0))
        assert not s.increments.any()
        assert truth.path_class is PathClass.CONTINUOUS_ANY

    def test_common_only_rows(self):
        for name in ("I-j", "II-j", "III-j"):
            for seed in range(20):
                _, truth = simulate_path(preset(name), 100, stream(seed))
                assert all(e.source == 3 and e.jump1 * e.jump2 != 0 for e in truth.events)
                expected = PathClass.JOINT if truth.events else PathClass.CONTINUOUS_ANY
                assert truth.path_class is expected

    def test_jump_sizes_are_multiplicative(self):
        _, truth = simulate_path(preset("III-m"), 200, stream(1))
        for q, e in enumerate(truth.events):
            left = truth.levels_left[truth.event_index[q]]
            if e.jump1:
                assert e.jump1 == pytest.approx(left[0] * 0.01 * e.size_x, rel=1e-9)
            assert 0.05 <= abs(e.size_x) <= 0.1238

    def test_positive_levels(self):
        cfg = ScenarioConfig(sigma1=0.5, sigma2=0.5, sources=(JumpSource(0.99, 20.0, 0.5, 1.0),) * 3)
        for seed in range(20):
            levels, truth = simulate_levels(cfg, 100, stream(seed))
            assert np.all(levels > 0) and np.all(truth.levels_left > 0)

    def test_mean_jump_counts(self):
        cfg = preset("II-m")
        counts = np.zeros(3)
        paths = 2000
        for seed in range(paths):
            _, truth = simulate_path(cfg, 5, stream(seed, 3))
            for e in truth.events:
                counts[e.source - 1] += 1
        lam = 5.0
        se = math.sqrt(lam / paths)
        assert np.all(np.abs(counts / paths - lam) <= 3 * se)

    @pytest.mark.parametrize("fine", [1, 4])
    def test_gbm_increment_moments(self, fine):
        sigma, dt, paths = 0.3, 0.1, 8000
        cfg = ScenarioConfig(sigma1=sigma, sigma2=sigma, rho=0.5, fine_steps_per_obs=fine)
        first = np.array([simulate_path(cfg, 10, stream(seed, 5))[0].increments[0] for seed in range(paths)])
        var = math.exp(sigma**2 * dt) - 1
        assert np.all(np.abs(first.mean(axis=0)) <= 4 * math.sqrt(var / paths))
        np.testing.assert_allclose(first.var(axis=0), var, rtol=0.06)
        cov = math.exp(0.5 * sigma**2 * dt) - 1
        assert np.mean(first[:, 0] * first[:, 1]) == pytest.approx(cov, rel=0.08)

    def test_seeded_determinism(self):
        a, ta = simulate_path(preset("II-m"), 300, stream(42, 1))
        b, tb = simulate_path(preset("II-m"), 300, stream(42, 1))
        np.testing.assert_array_equal(a.increments, b.increments)
        assert ta.events == tb.events

    def test_truth_serializable(self):
        _, truth = simulate_path(preset("I-m"), 50, stream(3))
        d = truth.to_dict()
        assert d["path_class"] == truth.path_class.value and len(d["events"]) == len(truth.events)

    def test_spot_cov_path(self):
        _, truth = simulate_path(preset("I-m"), 50, stream(3))
        t, cl, cr = truth.spot_cov_path
        assert cl.shape == (len(t), 2, 2)
        np.testing.assert_allclose(cr[:, 0, 1], 0.5 * np.sqrt(cr[:, 0, 0] * cr[:, 1, 1]))
