import numpy as np
import pytest
from oracles import mc_risk, sample_mixture
from scipy import stats

from betashrink.errors import ArgumentError
from betashrink.priors import BetaPrior, BickelPrior, NoiseModel, TriangularPrior, make_prior
from betashrink.risk import (
    NodeRule,
    bayes_risk,
    bayes_risk_marginal,
    classical_risk,
    prior_nodes,
    risk_curves,
    rule_moments,
)
from betashrink.shrinkage import BayesShrinker, posterior_mean_shrink, soft_threshold

ONE = NoiseModel(1.0)


def shrinker(family, alpha=0.9, m=3.0, a=2.0, sigma=1.0):
    return BayesShrinker(make_prior(family, alpha, m, a), NoiseModel(sigma))


@pytest.mark.parametrize("family,a", [("beta", 0.6), ("beta", 2.0), ("beta", 7.0), ("triangular", 2.0), ("bickel", 2.0)])
def test_prior_nodes_integrate_moments(family, a):
    prior = make_prior(family, 0.5, 3.0, a)
    th, w = prior_nodes(prior, 201)
    assert w.sum() == pytest.approx(1.0, abs=1e-10)
    assert float(w @ th**2) == pytest.approx(prior.spread_sd**2, rel=1e-8)


@pytest.mark.parametrize("family", ["beta", "triangular", "bickel"])
def test_node_rule_matches_adaptive_rule(family):
    rule = shrinker(family, a=3.0)
    d = np.linspace(-12, 12, 97)
    np.testing.assert_allclose(NodeRule(rule)(d), posterior_mean_shrink(d, rule.prior, ONE), atol=1e-8)


def test_node_rule_far_out():
    rule = shrinker("beta", a=10.0)
    v = NodeRule(rule)(np.array([-80.0, 80.0]))
    assert np.all(np.isfinite(v)) and np.all(np.abs(v) < 3.0)


@pytest.mark.parametrize("theta", [0.0, 0.8, 2.5])
def test_classical_risk_against_monte_carlo(theta):
    rule = shrinker("beta", a=2.0)
    rng = np.random.default_rng(int(theta * 10) + 7)
    est, se = mc_risk(rule, theta, 1.0, 200_000, rng)
    assert abs(classical_risk(theta, rule) - est) < 3 * se


def test_bias_variance_identity():
    rule = shrinker("triangular", alpha=0.7, m=2.0, sigma=0.8)
    report = risk_curves(np.linspace(-2, 2, 9), rule, with_bayes=False)
    np.testing.assert_allclose(report.classical_risk, report.bias_sq + report.variance, rtol=1e-13)
    m1, m2 = rule_moments(0.7, rule)
    assert report.variance[np.argmin(np.abs(report.theta_grid - 0.5))] >= 0
    assert m2 >= m1 * m1


def test_zero_grid_has_no_bias():
    report = risk_curves([0.0], shrinker("beta", a=5.0), with_bayes=False)
    assert report.bias_sq[0] == pytest.approx(0.0, abs=1e-20)
    assert report.variance[0] > 0


def test_soft_threshold_risk_closed_form():
    lam = 1.7
    rule = lambda d: soft_threshold(d, lam)  # noqa: E731
    # risk at theta = 0: 2[(1 + lam^2) Phi(-lam) - lam phi(lam)]
    expected = 2 * ((1 + lam**2) * stats.norm.cdf(-lam) - lam * stats.norm.pdf(lam))
    got = classical_risk(0.0, rule, ONE, nodes=401, check=False)
    assert got == pytest.approx(expected, rel=2e-3)


def test_identity_rule_risk_is_noise_variance():
    assert classical_risk(1.3, lambda d: d, NoiseModel(2.0)) == pytest.approx(4.0, rel=1e-12)
    with pytest.raises(ArgumentError):
        classical_risk(0.0, lambda d: d)


@pytest.mark.parametrize("family,a", [("beta", 2.0), ("beta", 6.0), ("triangular", 2.0), ("bickel", 2.0)])
def test_bayes_risk_two_routes_agree(family, a):
    rule = shrinker(family, a=a)
    assert bayes_risk(rule) == pytest.approx(bayes_risk_marginal(rule), abs=1e-7)


def test_bayes_risk_against_monte_carlo():
    rule = shrinker("beta", a=2.0)
    rng = np.random.default_rng(99)
    n = 400_000
    theta = sample_mixture("beta", 0.9, 3.0, 2.0, n, rng)
    d = theta + rng.standard_normal(n)
    loss = (posterior_mean_shrink(d, rule.prior, ONE) - theta) ** 2
    est, se = loss.mean(), loss.std(ddof=1) / np.sqrt(n)
    assert abs(bayes_risk(rule) - est) < 3 * se


def test_bayes_risk_below_prior_variance():
    # the posterior mean can only improve on the prior mean 0
    for prior in (BetaPrior(0.5, 2.0, 3.0), TriangularPrior(0.5, 3.0), BickelPrior(0.5, 3.0)):
        r = bayes_risk(BayesShrinker(prior, ONE))
        assert 0 < r < (1 - prior.alpha) * prior.spread_sd**2


def test_bayes_risk_decreases_in_alpha():
    vals = [bayes_risk(shrinker("triangular", alpha=al)) for al in (0.6, 0.7, 0.8, 0.9, 0.99)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_bayes_risk_rejects_foreign_prior():
    rule = shrinker("beta")
    with pytest.raises(ArgumentError):
        bayes_risk(rule, prior=BetaPrior(0.5, 2.0, 3.0))
    with pytest.raises(ArgumentError):
        risk_curves([0.0], rule, noise=NoiseModel(2.0))


def test_report_rows_and_meta():
    report = risk_curves([-1.0, 0.0, 1.0], shrinker("bickel"))
    rows = list(report.rows())
    assert len(rows) == 3 and len(rows[0]) == 4
    assert report.quadrature_meta["hermite_nodes"] == 101
    assert np.isfinite(report.bayes_risk)
