"""Benchmark target densities.

Each factory returns a :class:`TargetDensity` exposing the potential
U(theta) = -log rho(theta) (up to an additive constant unless noted) and its
analytic gradient.  Potentials and gradients are pure functions, vectorized
over a leading batch axis: inputs of shape (d,) or (batch, d) are accepted.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import NotSPD


@dataclass(frozen=True)
class TargetDensity:
    """A target distribution seen through its potential and gradient.

    ``mean`` and ``second_moment`` hold the analytic per-coordinate moments
    E[theta_i] and E[theta_i^2] when known; estimators use them as ground
    truth.
    """

    dim: int
    name: str
    potential: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    mean: Optional[np.ndarray] = field(default=None)
    second_moment: Optional[np.ndarray] = field(default=None)


def _check_spd(matrix, what: str) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise NotSPD(f"{what} must be square, got shape {matrix.shape}")
    if not np.allclose(matrix, matrix.T, atol=1e-12 * max(1.0, np.abs(matrix).max())):
        raise NotSPD(f"{what} is not symmetric")
    try:
        scipy.linalg.cholesky(matrix, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotSPD(f"{what} is not positive definite") from exc
    return matrix


def gaussian_target(mean, covariance, name: str = "gaussian") -> TargetDensity:
    """Gaussian with U(theta) = (theta - mu)^T Sigma^{-1} (theta - mu) / 2."""
    mean = np.asarray(mean, dtype=float)
    covariance = _check_spd(covariance, "covariance")
    if mean.shape != (covariance.shape[0],):
        raise NotSPD(
            f"mean shape {mean.shape} incompatible with covariance "
            f"{covariance.shape}"
        )
    precision = np.linalg.inv(covariance)
    dim = mean.size

    def potential(theta):
        delta = np.asarray(theta, dtype=float) - mean
        return 0.5 * np.sum(delta * (delta @ precision), axis=-1)

    def gradient(theta):
        delta = np.asarray(theta, dtype=float) - mean
        return delta @ precision

    return TargetDensity(
        dim,
        name,
        potential,
        gradient,
        mean=mean.copy(),
        second_moment=np.diag(covariance) + mean**2,
    )


def mixture_target(mu, sigma, name: str = "mixture") -> TargetDensity:
    """Evenly weighted two-component Gaussian mixture at +-mu, shared sigma.

    rho(x) = N(x; mu, Sigma)/2 + N(x; -mu, Sigma)/2.  The potential keeps its
    normalizing constant, so exp(-U) is the actual density; with
    a = Sigma^{-1} mu it reduces to

        U(x) = x^T Sigma^{-1} x / 2 + mu^T a / 2 - log cosh(x^T a) + log Z,

    which is the log-sum-exp-stable form of the two-component sum.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = _check_spd(sigma, "sigma")
    if mu.shape != (sigma.shape[0],):
        raise NotSPD(f"mu shape {mu.shape} incompatible with sigma {sigma.shape}")
    precision = np.linalg.inv(sigma)
    a_vec = precision @ mu
    dim = mu.size
    log_norm = 0.5 * dim * np.log(2.0 * np.pi) + 0.5 * np.linalg.slogdet(sigma)[1]
    const = 0.5 * mu @ a_vec + log_norm

    def _log_cosh(t):
        at = np.abs(t)
        return at + np.log1p(np.exp(-2.0 * at)) - np.log(2.0)

    def potential(x):
        x = np.asarray(x, dtype=float)
        quad = 0.5 * np.sum(x * (x @ precision), axis=-1)
        return quad - _log_cosh(x @ a_vec) + const

    def gradient(x):
        x = np.asarray(x, dtype=float)
        return x @ precision - np.tanh(x @ a_vec)[..., None] * a_vec

    return TargetDensity(
        dim,
        name,
        potential,
        gradient,
        mean=np.zeros(dim),
        second_moment=np.diag(sigma) + mu**2,
    )


def funnel_target(n: int, v_sd: float, name: str = "funnel") -> TargetDensity:
    """Hierarchical funnel over (x_1..x_n, v).

    rho(x, v) = prod_i N(x_i | 0, e^{-v}) * N(v | 0, v_sd^2), so up to
    constants U = e^v ||x||^2 / 2 - n v / 2 + v^2 / (2 v_sd^2).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if v_sd <= 0:
        raise ValueError(f"v_sd must be positive, got {v_sd}")
    inv_var = 1.0 / v_sd**2
    dim = n + 1

    def potential(theta):
        theta = np.asarray(theta, dtype=float)
        x = theta[..., :n]
        v = theta[..., n]
        return (
            0.5 * np.exp(v) * np.sum(x * x, axis=-1)
            - 0.5 * n * v
            + 0.5 * inv_var * v * v
        )

    def gradient(theta):
        theta = np.asarray(theta, dtype=float)
        x = theta[..., :n]
        v = theta[..., n]
        ev = np.exp(v)
        grad = np.empty_like(theta)
        grad[..., :n] = ev[..., None] * x
        grad[..., n] = 0.5 * ev * np.sum(x * x, axis=-1) - 0.5 * n + inv_var * v
        return grad

    second = np.full(dim, np.exp(0.5 * v_sd**2))
    second[n] = v_sd**2
    return TargetDensity(
        dim, name, potential, gradient, mean=np.zeros(dim), second_moment=second
    )


def banana_target(b: float, sigma1: float, name: str = "banana") -> TargetDensity:
    """Curved 2D density obtained by bending a Gaussian along a parabola.

    U(theta) = (theta_1^2 / sigma1^2 + (theta_2 + b theta_1^2 - b sigma1^2)^2) / 2.
    With b = 0 this is an independent Gaussian N(0, diag(sigma1^2, 1)).
    """
    if sigma1 <= 0:
        raise ValueError(f"sigma1 must be positive, got {sigma1}")
    inv_var1 = 1.0 / sigma1**2
    shift = b * sigma1**2

    def potential(theta):
        theta = np.asarray(theta, dtype=float)
        t1 = theta[..., 0]
        bent = theta[..., 1] + b * t1 * t1 - shift
        return 0.5 * (t1 * t1 * inv_var1 + bent * bent)

    def gradient(theta):
        theta = np.asarray(theta, dtype=float)
        t1 = theta[..., 0]
        bent = theta[..., 1] + b * t1 * t1 - shift
        grad = np.empty_like(theta)
        grad[..., 0] = t1 * inv_var1 + 2.0 * b * t1 * bent
        grad[..., 1] = bent
        return grad

    return TargetDensity(
        2,
        name,
        potential,
        gradient,
        mean=np.zeros(2),
        second_moment=np.array([sigma1**2, 1.0 + 2.0 * b**2 * sigma1**4]),
    )
