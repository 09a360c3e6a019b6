"""Frequentist and Bayes risk of Bayesian shrinkage rules.

For d ~ N(theta, sigma^2): bias^2, variance and R(theta) = E[(delta(d) - theta)^2]
use Gauss-Hermite quadrature over d; the Bayes risk integrates R against the
prior, alpha * R(0) + (1 - alpha) * int R(theta) g(theta) dtheta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln, logsumexp

from .errors import ArgumentError, NumericalFailure
from .priors import BetaPrior, NoiseModel, Prior
from .quadrature import gauss_hermite_normal, gauss_jacobi, gauss_legendre
from .shrinkage import BayesShrinker, _signed_logsumexp

HERMITE_NODES = 101
PRIOR_NODES = 201
ROW_CHUNK = 4096


class NodeRule:
    """Posterior-mean rule evaluated with a fixed set of prior nodes in theta.

    Both integrals of the rule become weighted sums over the same nodes the
    Bayes-risk integral uses, so one kernel matrix serves every d. Sums are
    taken in log space, so far-out d stays finite.
    """

    def __init__(self, rule: BayesShrinker, nodes: int = PRIOR_NODES):
        self.prior = rule.prior
        self.sigma = rule.noise.sigma
        self.nodes = nodes
        th, w = prior_nodes(self.prior, nodes)
        keep = w > 0
        self.theta = th[keep]
        with np.errstate(divide="ignore"):
            self.log_w = np.log(w[keep])
            self.log_abs_theta = np.log(np.abs(self.theta))

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        flat = d.ravel()
        out = np.empty_like(flat)
        s, alpha = self.sigma, self.prior.alpha
        for start in range(0, flat.size, ROW_CHUNK):
            dd = flat[start : start + ROW_CHUNK]
            z = (dd[:, None] - self.theta[None, :]) / s
            base = self.log_w[None, :] - 0.5 * z * z
            log_den_spread = logsumexp(base, axis=1)
            with np.errstate(divide="ignore"):
                log_num, sgn = _signed_logsumexp(base + self.log_abs_theta[None, :], np.sign(self.theta)[None, :])
                log_point = math.log(alpha) - 0.5 * (dd / s) ** 2 if alpha > 0 else np.full(dd.shape, -np.inf)
            log_den = np.logaddexp(log_point, math.log1p(-alpha) + log_den_spread)
            out[start : start + dd.size] = sgn * np.exp(math.log1p(-alpha) + log_num - log_den)
        lim = np.nextafter(self.prior.m, 0.0)
        return np.clip(out, -lim, lim).reshape(d.shape)


def _evaluator(rule, nodes: int = PRIOR_NODES):
    if isinstance(rule, BayesShrinker):
        return NodeRule(rule, nodes)
    return rule


def _moments(theta: np.ndarray, rule, sigma: float, nodes: int):
    x, w = gauss_hermite_normal(nodes)
    d = theta[:, None] + sigma * x[None, :]
    delta = np.asarray(rule(d.ravel())).reshape(d.shape)
    return delta @ w, (delta * delta) @ w


def rule_moments_array(theta, rule, noise: NoiseModel | None = None,
                       nodes: int = HERMITE_NODES, rtol: float = 1e-7,
                       inner_nodes: int = PRIOR_NODES, check: bool = True):
    """E[delta(d)] and E[delta(d)^2] for each theta, with a node-doubling check.

    ``rule`` is a :class:`BayesShrinker` (evaluated through :class:`NodeRule`
    with ``inner_nodes`` prior nodes) or any vectorised callable d -> delta.
    """
    sigma = _sigma_of(rule, noise)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    ev = _evaluator(rule, inner_nodes)
    m1, m2 = _moments(theta, ev, sigma, nodes)
    if not check:
        return m1, m2
    f1, f2 = _moments(theta, ev, sigma, 2 * nodes)
    r1 = np.abs(f1 - m1)
    r2 = np.abs(f2 - m2)
    scale = np.sqrt(np.maximum(f2, 0.0)) + 1e-300
    bad = (r1 > rtol * scale) | (r2 > rtol * (f2 + 1e-300))
    if bad.any():
        i = int(np.argmax(bad))
        raise NumericalFailure(
            "Gauss-Hermite moments did not converge",
            residual=float(max(r1[i], r2[i])),
            context={"theta": float(theta[i])},
        )
    return f1, f2


def rule_moments(theta: float, rule, noise: NoiseModel | None = None,
                 nodes: int = HERMITE_NODES) -> tuple[float, float]:
    m1, m2 = rule_moments_array([theta], rule, noise, nodes)
    return float(m1[0]), float(m2[0])


def classical_risk(theta, rule, noise: NoiseModel | None = None, nodes: int = HERMITE_NODES,
                   inner_nodes: int = PRIOR_NODES, check: bool = True):
    """R(theta) = E[(delta(d) - theta)^2]; scalar or array in, same shape out."""
    th = np.asarray(theta, dtype=float)
    m1, m2 = rule_moments_array(th.ravel(), rule, noise, nodes, inner_nodes=inner_nodes, check=check)
    t = th.ravel()
    r = np.maximum(m2 - 2 * t * m1 + t * t, 0.0)
    return float(r[0]) if th.ndim == 0 else r.reshape(th.shape)


def _sigma_of(rule, noise):
    if noise is not None:
        if isinstance(rule, BayesShrinker) and rule.noise != noise:
            raise ArgumentError("noise model differs from the rule's own noise model")
        return noise.sigma
    if isinstance(rule, BayesShrinker):
        return rule.noise.sigma
    raise ArgumentError("a noise model is required for rules without one")


def prior_nodes(prior: Prior, nodes: int = PRIOR_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Nodes theta_i and weights w_i with sum(w_i f(theta_i)) ~ int f g over [-m, m]."""
    m = prior.m
    if isinstance(prior, BetaPrior) and prior.a != 1:
        e = prior.a - 1.0
        t, w = gauss_jacobi(nodes, e, e)
        log_c = -(2 * prior.a - 1) * math.log(2.0) - betaln(prior.a, prior.a)
        return m * t, w * math.exp(log_c)
    half = max(nodes // 2, 2)
    x, w = gauss_legendre(half)
    # split at the origin: the triangular density has a kink there
    th = np.concatenate([0.5 * m * (x - 1.0), 0.5 * m * (x + 1.0)])
    ww = np.concatenate([w, w]) * 0.5 * m
    return th, ww * prior.density(th)


def bayes_risk(rule: BayesShrinker, prior: Prior | None = None, noise: NoiseModel | None = None,
               nodes: int = PRIOR_NODES, hermite_nodes: int = HERMITE_NODES,
               rtol: float = 1e-7, check: bool = True) -> float:
    """Bayes risk of ``rule`` under its own prior (``prior`` must match if given)."""
    if not isinstance(rule, BayesShrinker):
        raise ArgumentError("bayes_risk needs a BayesShrinker")
    if prior is not None and prior != rule.prior:
        raise ArgumentError("integration prior must equal the rule's prior")
    prior = rule.prior
    _sigma_of(rule, noise)

    # The Hermite doubling check runs on the base pass; the refinement pass
    # doubles only the prior nodes (outer integral and the rule's inner sums).
    def once(n, hermite_check):
        th, w = prior_nodes(prior, n)
        r = classical_risk(np.append(th, 0.0), rule, None, hermite_nodes,
                           inner_nodes=n, check=hermite_check)
        return prior.alpha * r[-1] + (1 - prior.alpha) * float(r[:-1] @ w)

    value = once(nodes, check)
    if check:
        finer = once(2 * nodes, False)
        if abs(finer - value) > rtol * max(abs(finer), 1e-300):
            raise NumericalFailure("Bayes-risk prior quadrature did not converge",
                                   residual=abs(finer - value))
        value = finer
    return max(value, 0.0)


def bayes_risk_marginal(rule: BayesShrinker, nodes: int = PRIOR_NODES,
                        hermite_nodes: int = HERMITE_NODES) -> float:
    """Bayes risk of the posterior mean via E[theta^2] - E[delta(d)^2] under the marginal of d.

    Valid only because ``rule`` is the posterior mean for its own prior; used as an
    independent check on :func:`bayes_risk`.
    """
    prior = rule.prior
    sigma = rule.noise.sigma
    th, w = prior_nodes(prior, nodes)
    e_theta2 = (1 - prior.alpha) * float((th * th) @ w)
    _, m2 = _moments(np.append(th, 0.0), NodeRule(rule, nodes), sigma, hermite_nodes)
    e_delta2 = prior.alpha * m2[-1] + (1 - prior.alpha) * float(m2[:-1] @ w)
    return e_theta2 - e_delta2


@dataclass
class RiskReport:
    theta_grid: np.ndarray
    bias_sq: np.ndarray
    variance: np.ndarray
    classical_risk: np.ndarray
    bayes_risk: float
    rule_descriptor: str
    quadrature_meta: dict = field(default_factory=dict)

    def rows(self):
        for row in zip(self.theta_grid, self.bias_sq, self.variance, self.classical_risk):
            yield tuple(float(v) for v in row)


def risk_curves(grid, rule: BayesShrinker, prior: Prior | None = None,
                noise: NoiseModel | None = None, with_bayes: bool = True) -> RiskReport:
    """Bias^2, variance and R(theta) on ``grid`` plus the scalar Bayes risk."""
    if not isinstance(rule, BayesShrinker):
        raise ArgumentError("risk_curves needs a BayesShrinker")
    if prior is not None and prior != rule.prior:
        raise ArgumentError("integration prior must equal the rule's prior")
    sigma = _sigma_of(rule, noise)
    th = np.atleast_1d(np.asarray(grid, dtype=float))
    m1, m2 = rule_moments_array(th, rule)
    bias_sq = (m1 - th) ** 2
    var = np.maximum(m2 - m1 * m1, 0.0)
    risk = bias_sq + var
    br = bayes_risk(rule) if with_bayes else float("nan")
    meta = {
        "hermite_nodes": HERMITE_NODES,
        "prior_nodes": PRIOR_NODES,
        "refinement": "node doubling",
        "sigma": sigma,
    }
    return RiskReport(th, bias_sq, var, risk, br, rule.describe(), meta)
