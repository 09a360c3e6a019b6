import math

import numpy as np
import pytest
from scipy import integrate

from betashrink.errors import ArgumentError
from betashrink.priors import (
    BetaPrior,
    BickelPrior,
    NoiseModel,
    TriangularPrior,
    UniformPrior,
    make_prior,
    spread_density,
)


def test_density_spot_values():
    assert spread_density(BetaPrior(0.9, 1.0, 3.0), 0.0) == pytest.approx(1 / 6, rel=1e-14)
    assert spread_density(BetaPrior(0.9, 2.0, 3.0), 0.0) == pytest.approx(0.25, rel=1e-14)
    assert spread_density(BetaPrior(0.9, 2.0, 3.0), 3.0) == 0.0
    assert spread_density(BetaPrior(0.9, 2.0, 3.0), -3.0) == 0.0
    assert spread_density(TriangularPrior(0.9, 3.0), 0.0) == pytest.approx(1 / 3, rel=1e-14)
    assert spread_density(BickelPrior(0.9, 3.0), 0.0) == pytest.approx(1 / 3, rel=1e-14)
    assert spread_density(BickelPrior(0.9, 3.0), 4.0) == 0.0


@pytest.mark.parametrize(
    "prior",
    [
        BetaPrior(0.5, 0.5, 2.0),
        BetaPrior(0.5, 1.0, 3.0),
        BetaPrior(0.5, 7.3, 3.0),
        BetaPrior(0.5, 40.0, 0.2),
        TriangularPrior(0.5, 3.0),
        BickelPrior(0.5, 5.0),
        UniformPrior(0.5, 1.5),
    ],
)
def test_normalisation_and_symmetry(prior):
    m = prior.m
    total, _ = integrate.quad(lambda x: spread_density(prior, x), -m, m, points=[0.0], limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)
    x = np.linspace(-m, m, 41)
    np.testing.assert_allclose(spread_density(prior, x), spread_density(prior, -x), rtol=1e-13)


def test_beta_density_survives_large_shape():
    p = BetaPrior(0.0, 400.0, 3.0)
    assert math.isfinite(p.log_density(0.0))
    assert spread_density(p, 0.0) > 0


def test_beta_one_is_uniform():
    x = np.linspace(-2.9, 2.9, 17)
    np.testing.assert_allclose(
        BetaPrior(0.3, 1.0, 3.0).log_density(x), UniformPrior(0.3, 3.0).log_density(x), atol=1e-14
    )


def test_spread_sd_matches_numeric():
    for prior in (TriangularPrior(0.0, 3.0), BickelPrior(0.0, 3.0), BetaPrior(0.0, 2.5, 3.0)):
        var, _ = integrate.quad(lambda x: x * x * spread_density(prior, x), -3, 3, points=[0.0])
        assert prior.spread_sd == pytest.approx(math.sqrt(var), rel=1e-9)


@pytest.mark.parametrize(
    "build",
    [
        lambda: BetaPrior(1.0, 2.0, 3.0),
        lambda: BetaPrior(-0.1, 2.0, 3.0),
        lambda: BetaPrior(0.5, 0.0, 3.0),
        lambda: BetaPrior(0.5, 2.0, 0.0),
        lambda: TriangularPrior(0.5, -1.0),
        lambda: NoiseModel(0.0),
        lambda: NoiseModel(float("inf")),
        lambda: make_prior("laplace", 0.5, 3.0),
    ],
)
def test_invalid_parameters(build):
    with pytest.raises(ArgumentError):
        build()


def test_alpha_zero_admitted():
    assert BetaPrior(0.0, 2.0, 3.0).alpha == 0.0


@pytest.mark.parametrize("a", [0.4, 1.0, 2.0, 9.5])
def test_beta_cdf_matches_density_integral(a):
    p = BetaPrior(0.0, a, 2.0)
    for k in (-1.5, -0.2, 0.0, 0.7, 1.9):
        val, _ = integrate.quad(lambda x: spread_density(p, x), -2.0, k, limit=200)
        assert p.cdf(k) == pytest.approx(val, abs=1e-9)
    assert p.cdf(-5.0) == 0.0 and p.cdf(5.0) == 1.0
