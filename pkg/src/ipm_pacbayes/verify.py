"""Independent oracles and Monte-Carlo validity checks.

Nothing here shares a code path with what it checks: transport costs are
found by vertex enumeration rather than an LP solver, gradients by central
differences, and bound validity by exact true risks on finite domains.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import bounds
from .divergences import (
    kl_discrete,
    tv_discrete,
    w1_discrete_exact,
    w1_projected_gaussian_upper,
)
from .exceptions import InvalidArgumentError, UnsupportedSizeError
from .linreg import (
    Dataset,
    PosteriorParams,
    empirical_risk_closed_form,
    klpb_objective,
    objective_gradient,
    quadratic_loss,
    wpb_objective,
)
from .measures import (
    DiscreteMeasure,
    FiniteMetricSpace,
    GaussianMeasure,
    ProjectedGaussianMeasure,
    RandomSource,
    project_ball,
    sample_uniform_ball,
)

__all__ = [
    "ValidityReport",
    "FiniteScenario",
    "default_finite_scenario",
    "validity_slack",
    "w1_bruteforce_oracle",
    "lipschitz_constant_bruteforce",
    "lemma_lipschitz_validity",
    "bound_validity_mc",
    "gradient_check",
    "projected_risk_crosscheck",
    "empirical_w1_assignment",
    "w1_upper_bound_check",
    "random_projected_pair",
]

MAX_BRUTEFORCE_SIZE = 4


def validity_slack(delta: float, trials: int) -> float:
    """Two-sigma binomial allowance ``2 sqrt(delta (1 - delta) / trials)``."""
    return 2 * math.sqrt(delta * (1 - delta) / trials)


@dataclass
class ValidityReport:
    trials: int
    violations: int
    delta: float
    slack: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.violations <= self.trials:
            raise InvalidArgumentError("violations must lie in [0, trials]")

    @property
    def rate(self) -> float:
        return self.violations / self.trials if self.trials else 0.0

    @property
    def passed(self) -> bool:
        return self.rate <= self.delta + self.slack

    def to_dict(self) -> dict:
        return {"trials": self.trials, "violations": self.violations, "rate": self.rate,
                "delta": self.delta, "slack": self.slack, "pass": self.passed,
                "metadata": self.metadata}


# ---------------------------------------------------------------- transport

def w1_bruteforce_oracle(Q: DiscreteMeasure, P: DiscreteMeasure,
                         space: FiniteMetricSpace) -> float:
    """Minimal transport cost by enumerating every vertex of the coupling polytope.

    A vertex is a basic feasible solution: ``2n - 1`` cells whose columns in
    the marginal system are independent.  Each candidate basis is solved
    with a dense linear solve and kept when non-negative.
    """
    n = space.size
    if n > MAX_BRUTEFORCE_SIZE:
        raise UnsupportedSizeError(f"brute force supports n <= {MAX_BRUTEFORCE_SIZE}, got {n}")
    if Q.size != n or P.size != n:
        raise InvalidArgumentError("measures do not live on the given space")
    if n == 1:
        return 0.0
    cells = [(i, j) for i in range(n) for j in range(n)]
    # marginal constraints (last column sum dropped: it is implied by the others)
    A = np.zeros((2 * n - 1, n * n))
    for k, (i, j) in enumerate(cells):
        A[i, k] = 1.0
        if j < n - 1:
            A[n + j, k] = 1.0
    b = np.concatenate([Q.weights, P.weights[:-1]])
    costs = space.dist.ravel()
    best = math.inf
    for basis in itertools.combinations(range(n * n), 2 * n - 1):
        B = A[:, basis]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        x = np.linalg.solve(B, b)
        if np.all(x >= -1e-12):
            best = min(best, float(costs[list(basis)] @ x))
    return best


# ---------------------------------------------------------------- finite classes

@dataclass(frozen=True)
class FiniteScenario:
    """Finite class on a metric space with a finite data domain of known law.

    ``loss_table[h, z]`` is the loss of hypothesis ``h`` on data point ``z``;
    ``data_probs`` is the true data distribution, so true risks are exact.
    """

    space: FiniteMetricSpace
    loss_table: np.ndarray
    data_probs: np.ndarray
    G: float

    def __post_init__(self):
        L = np.asarray(self.loss_table, dtype=float)
        if L.shape[0] != self.space.size:
            raise InvalidArgumentError("loss table needs one row per hypothesis")
        if np.any(L < 0) or np.any(L > 1):
            raise InvalidArgumentError("losses must lie in [0, 1]")
        p = np.asarray(self.data_probs, dtype=float)
        if p.shape != (L.shape[1],) or abs(p.sum() - 1) > 1e-12 or np.any(p < 0):
            raise InvalidArgumentError("data_probs must be a distribution over the data domain")
        object.__setattr__(self, "loss_table", L)
        object.__setattr__(self, "data_probs", p)

    @property
    def class_size(self) -> int:
        return self.space.size

    @property
    def true_risks(self) -> np.ndarray:
        return self.loss_table @ self.data_probs

    def is_lipschitz(self, tol: float = 1e-12) -> bool:
        diffs = np.abs(self.loss_table[:, None, :] - self.loss_table[None, :, :]).max(axis=2)
        return bool(np.all(diffs <= self.G * self.space.dist + tol))

    def empirical_risks(self, counts) -> np.ndarray:
        """Empirical risks from per-point sample counts."""
        counts = np.asarray(counts, dtype=float)
        return self.loss_table @ counts / counts.sum()


def default_finite_scenario(rng: RandomSource, n_hyp: int = 8, k: int = 16,
                            binary: bool = False) -> FiniteScenario:
    """Hypotheses and data points on ``[0, 1]`` with loss ``|a_h - z|`` (``G = 1``).

    ``binary=True`` thresholds the loss at 1/2 instead; that table is not
    Lipschitz and is only meant for the kl-form (Seeger) bound.
    """
    gen = rng.generator
    a = np.sort(gen.random(n_hyp))
    z = np.sort(gen.random(k))
    probs = gen.dirichlet(np.ones(k))
    space = FiniteMetricSpace.from_points(a)
    table = np.abs(a[:, None] - z[None, :])
    if binary:
        table = (table > 0.5).astype(float)
    return FiniteScenario(space, table, probs, G=1.0)


def lipschitz_constant_bruteforce(space: FiniteMetricSpace, loss_table, data_indices,
                                  dist_weights) -> float:
    """Sharp Lipschitz constant of the squared gap over all hypothesis pairs.

    ``data_indices`` is the sample as indices into the data domain;
    ``dist_weights`` is the true data distribution.
    """
    L = np.asarray(loss_table, dtype=float)
    idx = np.asarray(data_indices, dtype=int)
    true = L @ np.asarray(dist_weights, dtype=float)
    emp = L[:, idx].mean(axis=1)
    sq_gap = (true - emp) ** 2
    best = 0.0
    n = space.size
    for i in range(n):
        for j in range(i + 1, n):
            rho = space.dist[i, j]
            if rho > 0:
                best = max(best, abs(sq_gap[i] - sq_gap[j]) / rho)
    return best


def _draw_sample(gen: np.random.Generator, probs: np.ndarray, m: int) -> np.ndarray:
    return gen.choice(probs.size, size=m, p=probs)


def lemma_lipschitz_validity(trials: int, scenario: FiniteScenario, m: int, delta: float,
                             rng: RandomSource, G: float | None = None) -> ValidityReport:
    """Counts samples whose sharp constant exceeds ``(8 G / m) ln(2|H| / delta)``."""
    G = scenario.G if G is None else float(G)
    if not scenario.is_lipschitz():
        raise InvalidArgumentError("loss table is not G-Lipschitz on the given space")
    if delta >= 1:
        return ValidityReport(trials, 0, delta, validity_slack(min(delta, 1.0), trials),
                              {"note": "vacuous confidence level"})
    threshold = 8 * G / m * math.log(2 * scenario.class_size / delta)
    violations = 0
    worst = 0.0
    for _ in range(trials):
        sample = _draw_sample(rng.generator, scenario.data_probs, m)
        K = lipschitz_constant_bruteforce(scenario.space, scenario.loss_table, sample,
                                          scenario.data_probs)
        worst = max(worst, K)
        violations += K > threshold
    return ValidityReport(trials, int(violations), delta, validity_slack(delta, trials),
                          {"threshold": threshold, "max_sharp_constant": worst, "m": m, "G": G})


def _softmax_posterior(emp: np.ndarray, temperature: float = 1.0) -> DiscreteMeasure:
    logits = -emp / temperature
    w = np.exp(logits - logits.max())
    return DiscreteMeasure.normalized(w)


BOUND_SELECTORS = ("tvpb", "klpb", "wpb-finite", "seeger-tv")


def _finite_bound(selector: str, scenario: FiniteScenario, Q: DiscreteMeasure, P: DiscreteMeasure,
                  emp_q: float, m: int, delta: float) -> float:
    H = scenario.class_size
    if selector == "tvpb":
        uc = bounds.uc_finite_class(H, m, delta / 2)
        return bounds.tvpb_from_uc(uc, tv_discrete(Q, P), m, delta).complexity
    if selector == "klpb":
        return bounds.klpb_classic(kl_discrete(Q, P), m, delta).complexity
    if selector == "wpb-finite":
        w1 = w1_discrete_exact(Q, P, scenario.space)
        return bounds.wpb_finite(H, scenario.G, w1, m, delta).complexity
    if selector == "seeger-tv":
        return bounds.seeger_tv_finite(emp_q, H, tv_discrete(Q, P), m, delta).complexity
    raise InvalidArgumentError(f"unknown bound selector {selector!r}; choose from {BOUND_SELECTORS}")


def bound_validity_mc(trials: int, scenario: FiniteScenario, selector: str, delta: float,
                      m: int, rng: RandomSource, prior: DiscreteMeasure | None = None,
                      posterior_rule: str = "softmax") -> ValidityReport:
    """Monte-Carlo check that a gap bound holds with probability ``1 - delta``.

    The posterior is the softmax of negative empirical risks (temperature 1)
    or, with ``posterior_rule="prior"``, the prior itself.  One rule per run
    cannot certify the "for all posteriors" quantifier; it only probes it.
    """
    if selector not in BOUND_SELECTORS:
        raise InvalidArgumentError(f"unknown bound selector {selector!r}; choose from {BOUND_SELECTORS}")
    H = scenario.class_size
    P = prior if prior is not None else DiscreteMeasure(np.full(H, 1.0 / H))
    slack = validity_slack(min(delta, 1.0), trials) if delta < 1 else 0.0
    meta = {"selector": selector, "m": m, "posterior_rule": posterior_rule,
            "note": "tests one posterior rule; the all-posteriors quantifier is not certified"}
    if delta >= 1:
        return ValidityReport(trials, 0, delta, slack, {**meta, "note": "vacuous confidence level"})
    true = scenario.true_risks
    violations = 0
    max_ratio = 0.0
    k = scenario.data_probs.size
    for _ in range(trials):
        sample = _draw_sample(rng.generator, scenario.data_probs, m)
        emp = scenario.empirical_risks(np.bincount(sample, minlength=k))
        if posterior_rule == "softmax":
            Q = _softmax_posterior(emp)
        elif posterior_rule == "prior":
            Q = P
        else:
            raise InvalidArgumentError(f"unknown posterior rule {posterior_rule!r}")
        gap = float(Q.weights @ (true - emp))
        bound = _finite_bound(selector, scenario, Q, P, float(Q.weights @ emp), m, delta)
        max_ratio = max(max_ratio, gap / bound)
        violations += gap > bound
    meta["max_gap_to_bound_ratio"] = max_ratio
    return ValidityReport(trials, int(violations), delta, slack, meta)


# ---------------------------------------------------------------- regression checks

def _fd_gradient(f, x: np.ndarray, step: float) -> np.ndarray:
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2 * step)
    return g


def _rel_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def gradient_check(data: Dataset, points, which: str, sigma_q: float, sigma_p: float,
                   delta: float = 0.05, r: float = 1.0, r_q: float = 0.05,
                   step: float = 1e-6) -> float:
    """Max relative error between analytic gradients and central differences.

    ``which`` is ``"WPB"``, ``"KLPB"`` or ``"J"`` (empirical risk alone).
    Points must keep a ``step`` margin inside the ``r_q`` ball.
    """
    prior = ProjectedGaussianMeasure(GaussianMeasure(np.zeros(data.d), sigma_p), r)
    # evaluate off the feasible ball's constraint so FD probes stay valid
    cap = r_q + 2 * step

    def post_at(mu):
        return PosteriorParams(mu, sigma_q, cap)

    if which == "WPB":
        def f(mu):
            return wpb_objective(data, post_at(mu), prior, delta, r)
    elif which == "KLPB":
        def f(mu):
            return klpb_objective(data, post_at(mu), prior.base, delta)
    elif which == "J":
        def f(mu):
            return empirical_risk_closed_form(data, post_at(mu))
    else:
        raise InvalidArgumentError(f"unknown objective {which!r}")

    worst = 0.0
    for mu in np.atleast_2d(points):
        if which == "J":
            analytic = data.X.T @ (data.X @ mu - data.Y) / (2 * data.m)
        else:
            analytic = objective_gradient(data, post_at(mu), prior, delta, which, r)
        worst = max(worst, _rel_error(analytic, _fd_gradient(f, np.asarray(mu, float), step)))
    return worst


def projected_risk_crosscheck(rng: RandomSource, data: Dataset, post: PosteriorParams,
                              n_mc: int, r: float = 1.0) -> tuple[float, float, float]:
    """Closed-form risk of the unprojected Gaussian versus the projected posterior's risk.

    The projected risk is estimated as ``closed_form + mean(L(proj h) - L(h))``
    over ``n_mc`` draws ``h``, a control-variate estimator that is exact
    whenever no draw leaves the ball.  Returns ``(closed_form, projected, |diff|)``.
    """
    closed = empirical_risk_closed_form(data, post)
    if post.sigma_q == 0:
        return closed, closed, 0.0
    h = post.mu_q + post.sigma_q * rng.generator.standard_normal((n_mc, data.d))
    ph = project_ball(h, r)
    moved = np.any(ph != h, axis=1)
    correction = 0.0
    if np.any(moved):
        lp = quadratic_loss(ph[moved], data.X, data.Y).mean(axis=1)
        lu = quadratic_loss(h[moved], data.X, data.Y).mean(axis=1)
        correction = float(np.sum(lp - lu) / n_mc)
    projected = closed + correction
    return closed, projected, abs(projected - closed)


def empirical_w1_assignment(x: np.ndarray, y: np.ndarray) -> float:
    """W1 between two equal-size empirical measures via optimal assignment."""
    C = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=-1)
    rows, cols = linear_sum_assignment(C)
    return float(C[rows, cols].mean())


def w1_upper_bound_check(rng: RandomSource, Q: ProjectedGaussianMeasure,
                         P: ProjectedGaussianMeasure, n_points: int = 64,
                         n_repeats: int = 20) -> dict:
    """Compare the closed-form projected-Gaussian W1 bound with an empirical estimate.

    Both samples are driven by the same standard normals, then projected.
    The expected assignment cost still upper-bounds the true W1 (W1 is
    jointly convex and the empirical measures are unbiased), and the shared
    noise keeps it close to the true value.
    """
    d = Q.dim
    bound = w1_projected_gaussian_upper(Q, P).value
    ests = []
    for _ in range(n_repeats):
        z = rng.generator.standard_normal((n_points, d))
        xq = project_ball(Q.base.mean + Q.base.sigma * z, Q.radius)
        xp = project_ball(P.base.mean + P.base.sigma * z, P.radius)
        ests.append(empirical_w1_assignment(xq, xp))
    ests = np.asarray(ests)
    mean = float(ests.mean())
    se = float(ests.std(ddof=1) / math.sqrt(n_repeats)) if n_repeats > 1 else 0.0
    return {"bound": bound, "estimate": mean, "se": se, "pass": bound >= mean - 3 * se}


def random_projected_pair(rng: RandomSource, d: int, r: float = 1.0):
    """Random pair of projected Gaussians meeting the radius precondition, often tightly."""
    gen = rng.generator
    out = []
    for _ in range(2):
        sigma = gen.uniform(0.0, 1.0) * r / math.sqrt(d)
        room = math.sqrt(max(r**2 - d * sigma**2, 0.0))
        mean = sample_uniform_ball(rng, d, max(room * gen.uniform(0.5, 1.0), 1e-12))
        out.append(ProjectedGaussianMeasure(GaussianMeasure(mean, sigma), r))
    return tuple(out)
