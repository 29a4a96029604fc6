"""Randomized linear regression: data model, closed-form risk, bound objectives, projected Adam.

Loss is ``(h.x - y)**2 / 4`` on inputs in a 0.1-ball and clipped targets, so
it stays in ``[0, 1]`` for every ``|h| <= 1``.  The posterior over ``h`` is
``N(mu_q, sigma_q**2 I)`` projected onto the hypothesis ball; only ``mu_q``
is learned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import bounds
from .divergences import w1_projected_gaussian_upper
from .exceptions import InvalidArgumentError, UndefinedDivergenceError
from .measures import (
    GaussianMeasure,
    ProjectedGaussianMeasure,
    RandomSource,
    project_ball,
    sample_uniform_ball,
)

__all__ = [
    "RegressionTask",
    "Dataset",
    "PosteriorParams",
    "OptimizerState",
    "TrainConfig",
    "generate_task",
    "sample_dataset",
    "quadratic_loss",
    "empirical_risk_closed_form",
    "wpb_objective",
    "klpb_objective",
    "objective_gradient",
    "adam_project_step",
    "train_posterior",
    "test_risk_monte_carlo",
]

Objective = Literal["WPB", "KLPB"]


@dataclass(frozen=True)
class RegressionTask:
    """Data distribution ``y = clip(g.x + xi, -1, 1)``, ``x ~ U(ball)``, ``xi ~ U[-w, w]``."""

    g: np.ndarray
    latent_radius: float = 0.1
    x_radius: float = 0.1
    noise_half_width: float = 0.5

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if np.linalg.norm(g) > self.latent_radius * (1 + 1e-12):
            raise InvalidArgumentError("latent vector lies outside its ball")
        object.__setattr__(self, "g", g)

    @property
    def d(self) -> int:
        return self.g.size


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    x_radius: float = 0.1

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Y = np.asarray(self.Y, dtype=float).ravel()
        if X.shape[0] != Y.size:
            raise InvalidArgumentError(f"X has {X.shape[0]} rows but Y has {Y.size} entries")
        if np.any(np.abs(Y) > 1):
            raise InvalidArgumentError("targets must lie in [-1, 1]")
        if np.any(np.linalg.norm(X, axis=1) > self.x_radius * (1 + 1e-12)):
            raise InvalidArgumentError(f"inputs must lie in the ball of radius {self.x_radius}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def m(self) -> int:
        return self.Y.size

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class PosteriorParams:
    mu_q: np.ndarray
    sigma_q: float
    r_q: float = 0.05

    def __post_init__(self):
        mu = np.asarray(self.mu_q, dtype=float)
        if np.linalg.norm(mu) > self.r_q:
            raise InvalidArgumentError(f"|mu_q| = {np.linalg.norm(mu)} exceeds r_q = {self.r_q}")
        if not self.sigma_q >= 0:
            raise InvalidArgumentError("sigma_q must be >= 0")
        object.__setattr__(self, "mu_q", mu)

    def gaussian(self) -> GaussianMeasure:
        return GaussianMeasure(self.mu_q, self.sigma_q)

    def measure(self, r: float) -> ProjectedGaussianMeasure:
        return ProjectedGaussianMeasure(self.gaussian(), r)


@dataclass
class OptimizerState:
    """Adam moments; ``beta1``/``beta2``/``eps`` default to the usual Adam values."""

    dim: int
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m1: np.ndarray = field(default=None)
    m2: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.m1 is None:
            self.m1 = np.zeros(self.dim)
        if self.m2 is None:
            self.m2 = np.zeros(self.dim)


@dataclass(frozen=True)
class TrainConfig:
    objective: Objective = "KLPB"
    sigma_q: float = 1e-3
    sigma_p: float = 1e-2
    delta: float = 0.05
    r: float = 1.0
    r_q: float = 0.05
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 256
    max_epochs: int = 2000
    tol: float = 1e-8

    def prior(self, d: int) -> ProjectedGaussianMeasure:
        return ProjectedGaussianMeasure(GaussianMeasure(np.zeros(d), self.sigma_p), self.r)


def generate_task(rng: RandomSource, d: int, latent_radius: float = 0.1,
                  x_radius: float = 0.1, noise_half_width: float = 0.5) -> RegressionTask:
    g = sample_uniform_ball(rng, d, latent_radius)
    return RegressionTask(g, latent_radius, x_radius, noise_half_width)


def sample_dataset(rng: RandomSource, task: RegressionTask, m: int) -> Dataset:
    if m < 1:
        raise InvalidArgumentError("m must be >= 1")
    X = sample_uniform_ball(rng, task.d, task.x_radius, size=m)
    xi = rng.generator.uniform(-task.noise_half_width, task.noise_half_width, size=m)
    Y = np.clip(X @ task.g + xi, -1.0, 1.0)
    return Dataset(X, Y, task.x_radius)


def quadratic_loss(h, X, Y) -> np.ndarray:
    """Per-sample losses ``(h.x - y)**2 / 4``; ``h`` may be a batch of rows."""
    return (np.asarray(h) @ np.asarray(X).T - np.asarray(Y)) ** 2 / 4


def empirical_risk_closed_form(data: Dataset, post: PosteriorParams) -> float:
    """Posterior-averaged empirical risk ``(|X mu - Y|^2 + sigma^2 |X|_F^2) / (4m)``."""
    resid = data.X @ post.mu_q - data.Y
    return float((resid @ resid + post.sigma_q**2 * np.sum(data.X**2)) / (4 * data.m))


def wpb_objective(data: Dataset, post: PosteriorParams, prior: ProjectedGaussianMeasure,
                  delta: float, r: float) -> float:
    jhat = empirical_risk_closed_form(data, post)
    w_bound = w1_projected_gaussian_upper(post.measure(prior.radius), prior)
    return bounds.wpb_linreg(jhat, w_bound, data.m, delta, data.d, r).bound_value


def klpb_objective(data: Dataset, post: PosteriorParams, prior: GaussianMeasure,
                   delta: float) -> float:
    if isinstance(prior, ProjectedGaussianMeasure):
        prior = prior.base
    jhat = empirical_risk_closed_form(data, post)
    return bounds.klpb_linreg(jhat, post.gaussian(), prior, data.m, delta).bound_value


def _objective(data, post, prior, delta, which, r):
    if which == "WPB":
        return wpb_objective(data, post, prior, delta, r)
    if which == "KLPB":
        return klpb_objective(data, post, prior, delta)
    raise InvalidArgumentError(f"unknown objective {which!r}")


def _w_bound_gradient(mu_q, sigma_q, prior_base: GaussianMeasure, r: float) -> tuple[float, np.ndarray]:
    """Value and gradient in ``mu_q`` of the projected-Gaussian W1 upper bound."""
    d = mu_q.size
    diff = mu_q - prior_base.mean
    w2 = math.sqrt(diff @ diff + d * (sigma_q - prior_base.sigma) ** 2)
    grad = diff / w2 if w2 > 0 else np.zeros(d)  # subgradient 0 at the kink
    value = w2
    if sigma_q > 0:
        s = math.sqrt(mu_q @ mu_q + d * sigma_q**2)
        u = (r - s) / (math.sqrt(2) * sigma_q)
        value += math.sqrt(math.pi / 2) * sigma_q * math.erfc(u)
        grad = grad + math.exp(-u * u) * mu_q / s
    if prior_base.sigma > 0:
        s_p = math.sqrt(prior_base.mean @ prior_base.mean + d * prior_base.sigma**2)
        u_p = (r - s_p) / (math.sqrt(2) * prior_base.sigma)
        value += math.sqrt(math.pi / 2) * prior_base.sigma * math.erfc(u_p)
    return value, grad


def objective_gradient(data: Dataset, post: PosteriorParams, prior, delta: float,
                       which: Objective, r: float = 1.0, m: int | None = None) -> np.ndarray:
    """Analytic gradient of the WPB or KLPB objective with respect to ``mu_q``.

    ``data`` may be a mini-batch; ``m`` is then the full training-set size
    entering the complexity term (defaults to ``data.m``).
    """
    m = data.m if m is None else int(m)
    mu = post.mu_q
    grad = data.X.T @ (data.X @ mu - data.Y) / (2 * data.m)
    if which == "WPB":
        base = prior.base if isinstance(prior, ProjectedGaussianMeasure) else prior
        radius = prior.radius if isinstance(prior, ProjectedGaussianMeasure) else r
        w, gw = _w_bound_gradient(mu, post.sigma_q, base, radius)
        K = 2 * bounds.uc_linreg(m, delta / 4, data.d) * bounds.ucg_linreg(m, delta / 4, data.d, r)
        root = math.sqrt(K * w + math.log(2 * m / delta) / (2 * (m - 1)))
        return grad + K * gw / (2 * root)
    if which == "KLPB":
        base = prior.base if isinstance(prior, ProjectedGaussianMeasure) else prior
        sp, sq, d = base.sigma, post.sigma_q, data.d
        if sp == 0 or sq == 0:
            raise UndefinedDivergenceError("KLPB objective is undefined for zero variance")
        diff = mu - base.mean
        inner = diff @ diff / (2 * sp**2) + d * (math.log(sp / sq) + sq**2 / (2 * sp**2) - 0.5)
        root = math.sqrt((inner + math.log(m / delta)) / (2 * (m - 1)))
        return grad + (diff / sp**2) / (2 * (m - 1)) / (2 * root)
    raise InvalidArgumentError(f"unknown objective {which!r}")


def adam_project_step(state: OptimizerState, post: PosteriorParams, grad) -> PosteriorParams:
    """One Adam update of ``mu_q`` followed by projection onto the ``r_q`` ball."""
    grad = np.asarray(grad, dtype=float)
    state.step += 1
    state.m1 = state.beta1 * state.m1 + (1 - state.beta1) * grad
    state.m2 = state.beta2 * state.m2 + (1 - state.beta2) * grad**2
    m_hat = state.m1 / (1 - state.beta1**state.step)
    v_hat = state.m2 / (1 - state.beta2**state.step)
    mu = post.mu_q - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return PosteriorParams(project_ball(mu, post.r_q), post.sigma_q, post.r_q)


def train_posterior(rng: RandomSource, data: Dataset, config: TrainConfig,
                    trace: list | None = None) -> PosteriorParams:
    """Mini-batch projected Adam on the configured bound, starting from ``mu_q = 0``.

    Batches of ``min(m, batch_size)`` over a fresh shuffle each epoch.  Stops
    once an epoch lowers the full-data objective by less than ``tol`` (an
    epoch that raises it does not count as converged), or after
    ``max_epochs``.  Per-epoch objective values are appended to ``trace``.
    """
    d, m = data.d, data.m
    prior = config.prior(d)
    post = PosteriorParams(np.zeros(d), config.sigma_q, config.r_q)
    state = OptimizerState(d, config.lr, config.beta1, config.beta2, config.eps)
    batch = min(m, config.batch_size)
    prev = _objective(data, post, prior, config.delta, config.objective, config.r)
    for _ in range(config.max_epochs):
        perm = rng.generator.permutation(m)
        for start in range(0, m, batch):
            idx = perm[start:start + batch]
            sub = Dataset(data.X[idx], data.Y[idx], data.x_radius)
            grad = objective_gradient(sub, post, prior, config.delta, config.objective,
                                      config.r, m=m)
            post = adam_project_step(state, post, grad)
        cur = _objective(data, post, prior, config.delta, config.objective, config.r)
        if trace is not None:
            trace.append(cur)
        if 0 <= prev - cur < config.tol:
            break
        prev = cur
    return post


def test_risk_monte_carlo(rng: RandomSource, task: RegressionTask, post: PosteriorParams,
                          n_test: int) -> float:
    """Posterior risk on ``n_test`` fresh samples from ``task``."""
    if n_test < 1:
        raise InvalidArgumentError("n_test must be >= 1")
    return empirical_risk_closed_form(sample_dataset(rng, task, n_test), post)


test_risk_monte_carlo.__test__ = False  # keep pytest from collecting it
