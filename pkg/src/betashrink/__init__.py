"""Bayesian wavelet shrinkage under bounded symmetric priors.

Periodic Daubechies transforms, posterior-mean shrinkage rules for beta,
triangular, Bickel and uniform mixture priors, classical thresholding
baselines, a risk laboratory and a replicated AMSE benchmark.
"""

from .errors import (
    ArgumentError,
    BetaShrinkError,
    ConfigError,
    DegenerateConstraintError,
    DegenerateSignalError,
    LevelError,
    NoSolutionError,
    NumericalFailure,
    ParseError,
    ShapeError,
    UnsupportedFilterError,
)
from .hyper import HyperPolicy, alpha_level, elicit_a, elicit_a_detailed, estimate_sigma, m_level
from .priors import BetaPrior, BickelPrior, NoiseModel, TriangularPrior, UniformPrior, make_prior
from .risk import RiskReport, bayes_risk, bayes_risk_marginal, classical_risk, risk_curves
from .shrinkage import (
    BayesRule,
    BayesShrinker,
    ThresholdRule,
    apply_rule,
    bayes_shrink,
    fdr_threshold,
    hard_threshold,
    parse_rule,
    posterior_mean_shrink,
    soft_threshold,
    sure_threshold,
    triangular_shrink_closed,
    universal_threshold,
)
from .signals import add_noise, dj_signal, mse
from .study import AmseTable, StudyConfig, run_study
from .wavelets import WaveletDecomposition, WaveletFilter, daubechies_filter, dwt, idwt

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
