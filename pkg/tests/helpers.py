"""Shared generators and closed forms for the test suite."""

import numpy as np

from lagdeconv.toeplitz import LTTMatrix


def random_ltt(rng, n, decay=0.5):
    """A well-conditioned random LTT matrix: unit-scale main diagonal with
    geometrically decaying lower diagonals."""
    d = rng.standard_normal(n) * decay ** np.arange(n)
    d[0] = np.sign(rng.standard_normal()) * (0.5 + rng.random())
    return LTTMatrix(diag=d)


def random_green_pair(rng, n, mismatch=0.3):
    """A (model, truth) pair of transfer matrices that look like expansions of
    decaying kernels: positive dominant coefficient, geometrically decaying
    lower diagonals, truth perturbed away from the model by ``mismatch``."""
    rho = 0.2 + 0.6 * rng.random()
    base = rng.standard_normal(n) * rho ** np.arange(1, n + 1)
    d_model = base.copy()
    d_model[0] = 0.5 + 1.5 * rng.random()
    d_truth = d_model + mismatch * rng.standard_normal(n) * rho ** np.arange(1, n + 1)
    d_truth[0] = d_model[0] * (1.0 + mismatch * rng.standard_normal())
    if abs(d_truth[0]) < 0.1:
        d_truth[0] = 0.1 * np.sign(d_truth[0] or 1.0)
    return LTTMatrix(diag=d_model), LTTMatrix(diag=d_truth)


def exp_coeffs(beta, T, n_terms):
    """Laguerre coefficients of exp(-beta t) at scale T."""
    gamma = beta * T
    r = (gamma - 0.5) / (gamma + 0.5)
    return (1.0 / (gamma + 0.5)) * r ** np.arange(n_terms)
