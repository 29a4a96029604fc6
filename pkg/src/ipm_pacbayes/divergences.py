"""Divergences and distances between measures.

KL-family values are in nats; total variation and Wasserstein values are in
the units of the underlying metric.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.optimize import linprog

from .exceptions import InvalidArgumentError, PreconditionError, UndefinedDivergenceError
from .measures import (
    DiscreteMeasure,
    FiniteMetricSpace,
    GaussianMeasure,
    ProjectedGaussianMeasure,
)

__all__ = [
    "DivergenceKind",
    "DivergenceValue",
    "kl_gaussian_isotropic",
    "kl_bernoulli",
    "kl_bernoulli_inverse_upper",
    "kl_discrete",
    "tv_discrete",
    "w1_discrete_exact",
    "kantorovich_dual",
    "w2_gaussian",
    "w1_projected_gaussian_upper",
    "projection_tail_term",
    "erfc",
]

KL_INV_TOL = 1e-12


class DivergenceKind(str, enum.Enum):
    KL = "KL"
    BERNOULLI_KL = "BernoulliKL"
    TV = "TV"
    W1_EXACT = "W1Exact"
    W2_GAUSSIAN = "W2Gaussian"
    W1_PROJ_GAUSS_UPPER = "W1ProjGaussUpper"


@dataclass(frozen=True)
class DivergenceValue:
    value: float
    kind: DivergenceKind
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = float(self.value)
        if not v >= 0 or not math.isfinite(v):
            raise InvalidArgumentError(f"divergence must be finite and >= 0, got {self.value}")
        if self.kind is DivergenceKind.TV and v > 1.0:
            raise InvalidArgumentError(f"total variation cannot exceed 1, got {v}")
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "kind", DivergenceKind(self.kind))

    def __float__(self):
        return self.value

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "value": self.value}
        if self.details:
            out["details"] = dict(self.details)
        return out


def _same_dim(Q, P):
    if Q.dim != P.dim:
        raise InvalidArgumentError(f"dimension mismatch: {Q.dim} vs {P.dim}")


def kl_gaussian_isotropic(Q: GaussianMeasure, P: GaussianMeasure) -> DivergenceValue:
    """KL(Q || P) for isotropic Gaussians of equal dimension."""
    _same_dim(Q, P)
    if Q.sigma == 0 or P.sigma == 0:
        raise UndefinedDivergenceError("KL divergence is undefined for a zero-variance Gaussian")
    d = Q.dim
    sq, sp = Q.sigma, P.sigma
    diff = Q.mean - P.mean
    value = diff @ diff / (2 * sp**2) + d * (math.log(sp / sq) + sq**2 / (2 * sp**2) - 0.5)
    # the formula is >= 0 exactly; clip rounding noise around Q == P
    return DivergenceValue(max(value, 0.0), DivergenceKind.KL)


def kl_bernoulli(p: float, q: float) -> DivergenceValue:
    """kl(p || q) between Bernoulli(p) and Bernoulli(q), with ``0 ln 0 = 0``."""
    p, q = float(p), float(q)
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise InvalidArgumentError(f"p, q must lie in [0, 1], got {p}, {q}")
    if q in (0.0, 1.0):
        if p == q:
            return DivergenceValue(0.0, DivergenceKind.BERNOULLI_KL)
        raise UndefinedDivergenceError(f"kl({p} || {q}) is undefined")
    return DivergenceValue(max(_kl_bern_raw(p, q), 0.0), DivergenceKind.BERNOULLI_KL)


def _kl_bern_raw(p: float, q: float) -> float:
    if q >= 1.0:
        return 0.0 if p == 1.0 else math.inf
    return float(special.xlogy(p, p) - special.xlogy(p, q)
                 + special.xlogy(1 - p, 1 - p) - special.xlogy(1 - p, 1 - q))


def kl_bernoulli_inverse_upper(p: float, eps: float) -> float:
    """Largest ``q`` in ``[p, 1]`` with ``kl(p || q) <= eps``, by bisection."""
    p, eps = float(p), float(eps)
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError(f"p must lie in [0, 1], got {p}")
    if not eps >= 0:
        raise InvalidArgumentError(f"eps must be >= 0, got {eps}")
    if eps == 0 or p == 1.0:
        return p
    lo, hi = p, 1.0
    if _kl_bern_raw(p, hi) <= eps:
        return 1.0
    # run to float resolution: far tighter than KL_INV_TOL, and it keeps the
    # round-trip error in kl small even where kl is steep near q = 1
    while hi - lo > KL_INV_TOL or lo < 0.5 * (lo + hi) < hi:
        mid = 0.5 * (lo + hi)
        if _kl_bern_raw(p, mid) <= eps:
            lo = mid
        else:
            hi = mid
    return lo


def _check_discrete_pair(Q: DiscreteMeasure, P: DiscreteMeasure):
    if Q.size != P.size:
        raise InvalidArgumentError(f"support size mismatch: {Q.size} vs {P.size}")


def kl_discrete(Q: DiscreteMeasure, P: DiscreteMeasure) -> DivergenceValue:
    """KL(Q || P) for probability vectors on the same finite support."""
    _check_discrete_pair(Q, P)
    q, p = Q.weights, P.weights
    if np.any((q > 0) & (p == 0)):
        raise UndefinedDivergenceError("Q is not absolutely continuous w.r.t. P")
    value = float(np.sum(special.xlogy(q, q) - special.xlogy(q, np.where(q > 0, p, 1.0))))
    return DivergenceValue(max(value, 0.0), DivergenceKind.KL)


def tv_discrete(Q: DiscreteMeasure, P: DiscreteMeasure) -> DivergenceValue:
    _check_discrete_pair(Q, P)
    value = 0.5 * float(np.sum(np.abs(Q.weights - P.weights)))
    return DivergenceValue(min(value, 1.0), DivergenceKind.TV)


def _transport_lp(q: np.ndarray, p: np.ndarray, D: np.ndarray):
    n = q.size
    # variables gamma[i, j] flattened row-major
    A_rows = np.kron(np.eye(n), np.ones((1, n)))
    A_cols = np.kron(np.ones((1, n)), np.eye(n))
    A_eq = np.vstack([A_rows, A_cols])[:-1]  # one marginal constraint is redundant
    b_eq = np.concatenate([q, p])[:-1]
    res = linprog(D.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return res.x.reshape(n, n)


def w1_discrete_exact(Q: DiscreteMeasure, P: DiscreteMeasure,
                      space: FiniteMetricSpace) -> DivergenceValue:
    """Exact optimal transport cost between ``Q`` and ``P`` under ``space.dist``.

    Solved as a balanced transportation LP with the dual simplex method, so
    the optimum is attained at a vertex of the coupling polytope.
    """
    _check_discrete_pair(Q, P)
    if space.size != Q.size:
        raise InvalidArgumentError("measures do not live on the given space")
    q, p, D = Q.weights, P.weights, space.dist
    if np.array_equal(q, p):
        return DivergenceValue(0.0, DivergenceKind.W1_EXACT, {"coupling": np.diag(q)})
    gamma = _transport_lp(q, p, D)
    gamma = np.clip(gamma, 0.0, None)
    value = float(np.sum(gamma * D))
    return DivergenceValue(max(value, 0.0), DivergenceKind.W1_EXACT, {"coupling": gamma})


def kantorovich_dual(Q: DiscreteMeasure, P: DiscreteMeasure,
                     space: FiniteMetricSpace, lipschitz: float = 1.0) -> tuple[float, np.ndarray]:
    """Best value of ``sum f (q - p)`` over ``lipschitz``-Lipschitz potentials ``f``.

    Returns ``(value, f)``.  By Kantorovich-Rubinstein duality the value equals
    ``lipschitz * W1(Q, P)``.
    """
    _check_discrete_pair(Q, P)
    n = Q.size
    D = space.dist
    rows, rhs = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                row = np.zeros(n)
                row[i], row[j] = 1.0, -1.0
                rows.append(row)
                rhs.append(lipschitz * D[i, j])
    c = -(Q.weights - P.weights)
    # potentials are defined up to a constant; pin f[0] = 0
    bounds = [(0.0, 0.0)] + [(None, None)] * (n - 1)
    res = linprog(c, A_ub=np.array(rows) if rows else None, b_ub=np.array(rhs) if rhs else None,
                  bounds=bounds, method="highs-ds",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"dual LP failed: {res.message}")
    return float(-res.fun), res.x


def w2_gaussian(Q: GaussianMeasure, P: GaussianMeasure) -> DivergenceValue:
    """2-Wasserstein distance between isotropic Gaussians."""
    _same_dim(Q, P)
    diff = Q.mean - P.mean
    value = math.sqrt(diff @ diff + Q.dim * (Q.sigma - P.sigma) ** 2)
    return DivergenceValue(value, DivergenceKind.W2_GAUSSIAN)


def erfc(x):
    """Complementary error function; scalars in, float out (arrays elementwise)."""
    out = special.erfc(x)
    return float(out) if np.ndim(out) == 0 else out


def projection_tail_term(g: GaussianMeasure, r: float) -> float:
    """Upper bound on ``W1(g, proj_r # g)``: ``sqrt(pi/2) sigma erfc((r - s) / (sqrt(2) sigma))``.

    ``s = sqrt(|mean|^2 + d sigma^2)``.  Zero for a point mass.
    """
    if g.sigma == 0:
        return 0.0
    s = math.sqrt(g.mean @ g.mean + g.dim * g.sigma**2)
    return math.sqrt(math.pi / 2) * g.sigma * erfc((r - s) / (math.sqrt(2) * g.sigma))


def _check_projection_precondition(g: GaussianMeasure, r: float, name: str):
    s2 = g.mean @ g.mean + g.dim * g.sigma**2
    if r**2 < s2:
        raise PreconditionError(
            f"{name}: radius {r} is below sqrt(|mean|^2 + d sigma^2) = {math.sqrt(s2):.6g}")


def w1_projected_gaussian_upper(Q: ProjectedGaussianMeasure,
                                P: ProjectedGaussianMeasure) -> DivergenceValue:
    """Closed-form upper bound on W1 between two ball-projected isotropic Gaussians.

    Gaussian W2 between the unprojected measures plus one erfc tail-mass
    correction per measure.  Equals ``|mu_Q - mu_P|`` for point masses.
    """
    _same_dim(Q, P)
    if Q.radius != P.radius:
        raise InvalidArgumentError("both measures must be projected onto the same ball")
    r = Q.radius
    _check_projection_precondition(Q.base, r, "Q")
    _check_projection_precondition(P.base, r, "P")
    w2 = w2_gaussian(Q.base, P.base).value
    tail_q = projection_tail_term(Q.base, r)
    tail_p = projection_tail_term(P.base, r)
    return DivergenceValue(w2 + tail_q + tail_p, DivergenceKind.W1_PROJ_GAUSS_UPPER,
                           {"w2": w2, "tail_q": tail_q, "tail_p": tail_p})
