"""Reference bounds, power-law fitting, and regime classification."""

import math

import pytest

from rdcap import (DomainError, INTERFERENCE_LIMITED, RDP_LIMITED, TauModel,
                   check_theta, classify_regime, dormancy_bound, fit_exponent,
                   identity_g, interference_bound, k_target_g, scenario_presets,
                   step_repair_g)

PROBES = [256, 1024, 4096, 16384, 65536, 262144]


class TestBounds:
    def test_dormancy_bound(self):
        assert dormancy_bound(1.0, 1.0, 100.0) == pytest.approx(0.01)
        assert dormancy_bound(2.0, 50.0, 50.0) == pytest.approx(2.0)

    def test_dormancy_domain(self):
        with pytest.raises(DomainError):
            dormancy_bound(1.0, 1.0, 0.0)

    def test_interference_bound(self):
        assert interference_bound(1.0, 100) == pytest.approx(
            1.0 / math.sqrt(100.0 * math.log(100.0)))
        values = [interference_bound(1.0, n) for n in PROBES]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_interference_domain(self):
        with pytest.raises(DomainError):
            interference_bound(1.0, 1)


class TestFitExponent:
    def test_exact_power_law(self):
        fit = fit_exponent([(n, 5.0 / n) for n in PROBES])
        assert fit.slope == pytest.approx(-1.0, abs=1e-9)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-9)
        assert fit.intercept == pytest.approx(math.log(5.0), abs=1e-9)

    def test_sqrt_law(self):
        fit = fit_exponent([(n, 3.0 / math.sqrt(n)) for n in PROBES])
        assert fit.slope == pytest.approx(-0.5, abs=1e-9)

    def test_log_correction_shifts_slope(self):
        pts = [(n, 1.0 / math.sqrt(n * math.log(n)))
               for n in (100, 1000, 10_000, 100_000)]
        fit = fit_exponent(pts)
        assert -0.62 < fit.slope < -0.52

    def test_needs_three_positive_points(self):
        with pytest.raises(DomainError):
            fit_exponent([(10, 1.0), (100, 0.1)])
        with pytest.raises(DomainError):
            fit_exponent([(10, 1.0), (100, 0.0), (1000, 0.1)])


class TestClassifyRegime:
    def test_constant_tau_identity_g(self):
        verdict = classify_regime(TauModel(kind="constant", coeff=32.0),
                                  identity_g(), PROBES)
        assert verdict.regime == RDP_LIMITED
        assert verdict.ratio_slope < verdict.threshold

    def test_shrinking_tau_with_repair(self):
        verdict = classify_regime(TauModel(kind="inv_sqrt", coeff=8192.0),
                                  step_repair_g(), PROBES)
        assert verdict.regime == INTERFERENCE_LIMITED

    def test_per_n_model_factory(self):
        verdict = classify_regime(TauModel(kind="inv_sqrt", coeff=512.0),
                                  lambda n: k_target_g(math.sqrt(n)), PROBES)
        assert verdict.regime == RDP_LIMITED

    def test_preset_verdicts(self):
        expected = {"example1": RDP_LIMITED, "example2": RDP_LIMITED,
                    "example3": INTERFERENCE_LIMITED}
        for name, regime in expected.items():
            tau_model, g_factory = scenario_presets(name)
            verdict = classify_regime(tau_model, g_factory, PROBES)
            assert verdict.regime == regime, name

    def test_predicted_curve_matches_regime(self):
        tau_model, g_factory = scenario_presets("example3")
        verdict = classify_regime(tau_model, g_factory, PROBES)
        assert verdict.predicted_curve(1024) == pytest.approx(
            interference_bound(1.0, 1024))

    def test_probe_requirements(self):
        tau_model = TauModel(kind="constant", coeff=32.0)
        with pytest.raises(DomainError):
            classify_regime(tau_model, identity_g(), [100, 1000, 10_000])
        with pytest.raises(DomainError):
            classify_regime(tau_model, identity_g(), [100, 200, 400, 800])


class TestCheckTheta:
    def test_constant_factor_cancels(self):
        points = [(n, 7.0 / n) for n in PROBES]
        result = check_theta(points, lambda n: 1.0 / n)
        assert result["max_over_min"] == pytest.approx(1.0)
        assert all(r == pytest.approx(7.0) for r in result["ratios"])

    def test_spread_reflects_mismatch(self):
        points = [(100, 1.0), (1000, 1.0)]
        result = check_theta(points, lambda n: 1.0 / n)
        assert result["max_over_min"] == pytest.approx(10.0)

    def test_reference_list_form(self):
        result = check_theta([(10, 2.0), (20, 4.0)], [1.0, 2.0])
        assert result["max_over_min"] == pytest.approx(1.0)

    def test_mismatched_grid(self):
        with pytest.raises(DomainError):
            check_theta([(10, 2.0), (20, 4.0)], [1.0])

    def test_nonpositive_reference(self):
        with pytest.raises(DomainError):
            check_theta([(10, 2.0)], [0.0])
