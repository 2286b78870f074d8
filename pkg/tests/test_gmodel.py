"""Discovery-success models G(f), rate bounds, and the lambda fixed point."""

import math

import numpy as np
import pytest

from rdcap import (ConfigError, DivergenceError, DomainError, GModel,
                   expected_attempts, g_eval, identity_g, k_target_g,
                   q_lower_bound, q_upper_bound, scheme_a_qprime,
                   solve_lambda, step_repair_g, validate_gmodel,
                   xi_from_rates, xi_reference)


class TestGEval:
    def test_identity(self):
        assert g_eval(identity_g(), 0.3) == 0.3

    def test_k_target(self):
        # any of k=2 independent holders: 1 - (1 - 0.5)^2
        assert g_eval(k_target_g(2.0), 0.5) == pytest.approx(0.75)

    def test_k_target_monte_carlo(self):
        # reach a fraction f of nodes; success iff any of k holders reached
        rng = np.random.default_rng(0)
        hit = (rng.random((200_000, 3)) < 0.2).any(axis=1).mean()
        assert g_eval(k_target_g(3.0), 0.2) == pytest.approx(hit, abs=5e-3)

    def test_step_repair(self):
        model = step_repair_g()
        assert g_eval(model, 0.0) == 0.0
        assert g_eval(model, 1e-9) == 1.0

    def test_table(self):
        model = GModel(kind="table", points=((0.0, 0.0), (0.5, 0.8),
                                             (1.0, 1.0)))
        assert g_eval(model, 0.25) == pytest.approx(0.4)

    def test_boundary_values(self):
        for model in (identity_g(), k_target_g(4.0), step_repair_g()):
            assert g_eval(model, 1.0) == pytest.approx(1.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            g_eval(identity_g(), 1.3)
        with pytest.raises(DomainError):
            g_eval(identity_g(), -0.1)

    def test_constructor_validation(self):
        with pytest.raises(ConfigError):
            GModel(kind="mystery")
        with pytest.raises(ConfigError):
            k_target_g(0.0)
        with pytest.raises(ConfigError):
            GModel(kind="table", points=((0.0, 0.0),))

    def test_spec_round_trip(self):
        for model in (identity_g(), k_target_g(7.5), step_repair_g(),
                      GModel(kind="table", points=((0.0, 0.0), (1.0, 1.0)))):
            assert GModel.from_spec(model.spec_string()) == model


class TestValidateGModel:
    def test_admissible_models_pass(self):
        for model in (identity_g(), k_target_g(3.0), step_repair_g()):
            assert validate_gmodel(model) == []

    def test_sublinear_model_flagged(self):
        # k < 1 gives G(f) < f (and a convex curve)
        violations = validate_gmodel(k_target_g(0.5))
        assert any("G(f) < f" in v for v in violations)

    def test_table_below_diagonal_flagged(self):
        model = GModel(kind="table", points=((0.0, 0.0), (0.5, 0.4),
                                             (1.0, 1.0)))
        violations = validate_gmodel(model)
        assert violations != []


class TestQBounds:
    def test_upper_bound_value(self):
        # G(nbar_r / (lambda (n-1))) = G(50/100) for identity G
        assert q_upper_bound(identity_g(), 50.0, 1.0, 101) == pytest.approx(0.5)

    def test_upper_bound_clamped(self):
        assert q_upper_bound(identity_g(), 500.0, 1.0, 101) == 1.0

    def test_lower_bound_value(self):
        # G(gamma nbar_r / (lambda n)) / 2 = G(0.5 * 50 / 100) / 2
        model = identity_g(gamma=0.5)
        assert q_lower_bound(model, 50.0, 1.0, 100) == pytest.approx(0.125)

    def test_sandwich(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            model = k_target_g(float(rng.uniform(1, 5)),
                               gamma=float(rng.uniform(0.1, 1.0)))
            nbar = float(rng.uniform(0, 200))
            lam = float(rng.uniform(0.01, 5))
            n = int(rng.integers(2, 10_000))
            lb = q_lower_bound(model, nbar, lam, n)
            ub = q_upper_bound(model, nbar, lam, n)
            assert 0.0 <= lb <= ub <= 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            q_upper_bound(identity_g(), 1.0, 0.0, 100)
        with pytest.raises(DomainError):
            q_lower_bound(identity_g(), 1.0, 1.0, 1)


class TestSchemeA:
    def test_rescales_lambda(self):
        q_fn = lambda lam: min(1.0, 1.0 / lam)
        # theta = 0.5 doubles the per-RDP-slot arrival rate
        assert scheme_a_qprime(q_fn, 1.0, 0.5) == pytest.approx(0.5)

    def test_never_above_q(self):
        q_fn = lambda lam: 1.0 / (1.0 + lam)
        for lam in (0.1, 1.0, 10.0):
            assert scheme_a_qprime(q_fn, lam, 0.3) <= q_fn(lam)

    def test_theta_domain(self):
        with pytest.raises(DomainError):
            scheme_a_qprime(lambda lam: 0.5, 1.0, 1.0)


class TestExpectedAttempts:
    def test_values(self):
        assert expected_attempts(1.0) == 1.0
        assert expected_attempts(0.25) == 4.0

    def test_matches_geometric_mean(self):
        rng = np.random.default_rng(5)
        draws = rng.geometric(0.3, size=1_000_000)
        assert expected_attempts(0.3) == pytest.approx(draws.mean(), rel=0.01)

    def test_divergence(self):
        with pytest.raises(DivergenceError):
            expected_attempts(0.0)
        with pytest.raises(DomainError):
            expected_attempts(1.5)


class TestSolveLambda:
    def test_zero_success_gives_full_rate(self):
        lam = solve_lambda(100, 0.5, 10.0, lambda lam: 0.0)
        assert lam == pytest.approx(50.0, rel=1e-8)

    def test_constant_qprime_closed_form(self):
        # lambda = n nu / (1 + q tau nu) = 100 / 6
        lam = solve_lambda(100, 1.0, 10.0, lambda lam: 0.5)
        assert lam == pytest.approx(100.0 / 6.0, rel=1e-9)

    def test_decreasing_qprime_vs_grid_oracle(self):
        n, nu, tau = 100, 1.0, 10.0
        q_fn = lambda lam: 1.0 / (1.0 + lam / 50.0)
        lam = solve_lambda(n, nu, tau, q_fn)
        grid = np.linspace(n * nu / (1 + tau * nu), n * nu, 2_000_001)
        residual = grid - n * nu / (1.0 + q_fn(grid) * tau * nu)
        oracle = float(grid[np.argmin(np.abs(residual))])
        assert lam == pytest.approx(oracle, rel=1e-5)

    def test_clamped_qprime_sticks_to_bracket_edge(self):
        # Q' = min(1, 10/lam) saturates at 1 on the whole feasible set,
        # so the fixed point is the lower bracket edge n nu / (1 + tau nu)
        lam = solve_lambda(100, 1.0, 10.0, lambda x: min(1.0, 10.0 / x))
        assert lam == pytest.approx(100.0 / 11.0, rel=1e-6)

    def test_increasing_qprime_rejected(self):
        with pytest.raises(DomainError):
            solve_lambda(100, 1.0, 10.0, lambda lam: min(1.0, lam / 100.0))

    def test_monotone_in_tau(self):
        lams = [solve_lambda(100, 0.25, tau, lambda lam: 0.5)
                for tau in (1.0, 10.0, 100.0)]
        assert lams[0] > lams[1] > lams[2]

    def test_domain(self):
        with pytest.raises(DomainError):
            solve_lambda(0, 0.25, 1.0, lambda lam: 0.5)
        with pytest.raises(DomainError):
            solve_lambda(10, 0.25, 1.0, lambda lam: 1.5)


class TestXi:
    def test_from_rates(self):
        assert xi_from_rates(1.0, 1.0) == 1.0
        assert xi_from_rates(0.25, 0.2) == pytest.approx(20.0)

    def test_renewal_monte_carlo(self):
        # attempts every Geom(nu) slots, each wins with prob q
        rng = np.random.default_rng(6)
        nu, q = 0.5, 0.25
        attempts = rng.geometric(q, size=200_000)
        waits = rng.geometric(nu, size=(200_000, 60))
        idx = np.minimum(attempts - 1, 59)
        totals = np.take_along_axis(np.cumsum(waits, axis=1),
                                    idx[:, None], axis=1).ravel()
        assert xi_from_rates(nu, q) == pytest.approx(totals.mean(), rel=0.02)

    def test_divergence(self):
        with pytest.raises(DivergenceError):
            xi_from_rates(0.25, 0.0)
        with pytest.raises(DomainError):
            xi_from_rates(0.0, 0.5)

    def test_reference_curves(self):
        assert xi_reference(identity_g(), 100) == pytest.approx(100.0)
        assert xi_reference(step_repair_g(), 100) == pytest.approx(1.0)
        # k = sqrt(n) holders: 1 / (1 - (1 - 1/n)^sqrt(n)), checked by MC
        n = 10_000
        rng = np.random.default_rng(7)
        p_hit = (rng.binomial(100, 1.0 / n, size=1_000_000) > 0).mean()
        assert xi_reference(k_target_g(math.sqrt(n)), n) == pytest.approx(
            1.0 / p_hit, rel=0.02)

    def test_reference_divergence(self):
        table = GModel(kind="table", points=((0.0, 0.0), (0.5, 0.0),
                                             (1.0, 1.0)))
        with pytest.raises(DivergenceError):
            xi_reference(table, 100)
