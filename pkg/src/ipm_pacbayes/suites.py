"""Named verification suites with shipped default scenarios.

Each suite returns a JSON-ready dict with a top-level ``"pass"`` flag.
"""

from __future__ import annotations

import math

import numpy as np

from .divergences import kantorovich_dual, w1_discrete_exact
from .exceptions import InvalidArgumentError
from .linreg import PosteriorParams, generate_task, sample_dataset
from .measures import DiscreteMeasure, FiniteMetricSpace, RandomSource, sample_uniform_ball
from .verify import (
    bound_validity_mc,
    default_finite_scenario,
    gradient_check,
    lemma_lipschitz_validity,
    projected_risk_crosscheck,
    random_projected_pair,
    w1_bruteforce_oracle,
    w1_upper_bound_check,
)

SUITES = ("transport", "gradients", "lipschitz-lemma", "validity", "projected-risk", "w1-upper")

TRANSPORT_TOL = 1e-8
GRADIENT_TOL = 1e-5


def random_discrete_instance(rng: RandomSource, n: int):
    """Random metric (points in the plane) and two random measures on it."""
    gen = rng.generator
    space = FiniteMetricSpace.from_points(gen.random((n, 2)))
    Q = DiscreteMeasure.normalized(gen.dirichlet(np.ones(n)))
    P = DiscreteMeasure.normalized(gen.dirichlet(np.ones(n)))
    return space, Q, P


def transport_suite(rng: RandomSource, instances: int = 200) -> dict:
    worst_oracle = 0.0
    worst_dual = 0.0
    gen = rng.generator
    for _ in range(instances):
        n = int(gen.integers(2, 5))
        space, Q, P = random_discrete_instance(rng, n)
        exact = w1_discrete_exact(Q, P, space).value
        worst_oracle = max(worst_oracle, abs(exact - w1_bruteforce_oracle(Q, P, space)))
        dual, _ = kantorovich_dual(Q, P, space)
        worst_dual = max(worst_dual, abs(exact - dual))
    return {"suite": "transport", "instances": instances,
            "max_abs_diff_oracle": worst_oracle, "max_abs_diff_dual": worst_dual,
            "tolerance": TRANSPORT_TOL,
            "pass": worst_oracle <= TRANSPORT_TOL and worst_dual <= TRANSPORT_TOL}


def _random_feasible_points(rng: RandomSource, d: int, n: int, r_q: float) -> np.ndarray:
    # stay a little inside the ball so central differences remain feasible
    return sample_uniform_ball(rng, d, 0.99 * r_q, size=n)


def gradients_suite(rng: RandomSource, points: int = 100, m: int = 100, d: int = 10) -> dict:
    task = generate_task(rng.derive(0), d)
    data = sample_dataset(rng.derive(1), task, m)
    pts = _random_feasible_points(rng.derive(2), d, points, 0.05)
    cases = {
        "WPB (sigma_p=1e-2, sigma_q=1e-3)": ("WPB", 1e-3, 1e-2),
        "WPB (sigma_p=1e-4, sigma_q=1e-3)": ("WPB", 1e-3, 1e-4),
        "WPB (Dirac)": ("WPB", 0.0, 0.0),
        "KLPB (sigma_p=1e-2, sigma_q=1e-3)": ("KLPB", 1e-3, 1e-2),
        "KLPB (sigma_p=1e-4, sigma_q=1e-3)": ("KLPB", 1e-3, 1e-4),
    }
    errors = {name: gradient_check(data, pts, which, sq, sp) for name, (which, sq, sp) in cases.items()}
    errors["J (empirical risk)"] = gradient_check(data, pts, "J", 1e-3, 1e-2)
    return {"suite": "gradients", "points": points, "max_rel_error": errors,
            "tolerance": GRADIENT_TOL, "pass": max(errors.values()) <= GRADIENT_TOL}


def lipschitz_suite(rng: RandomSource, delta: float | None = None, trials: int = 1000,
                    m: int = 50) -> dict:
    scenario = default_finite_scenario(rng.derive(0))
    deltas = [delta] if delta is not None else [0.05, 0.1, 0.2]
    reports = {str(dl): lemma_lipschitz_validity(trials, scenario, m, dl, rng.derive(1, i)).to_dict()
               for i, dl in enumerate(deltas)}
    return {"suite": "lipschitz-lemma", "reports": reports,
            "pass": all(r["pass"] for r in reports.values())}


def validity_suite(rng: RandomSource, delta: float | None = None, trials: int = 2000,
                   m: int = 50, selectors=("tvpb", "klpb", "wpb-finite")) -> dict:
    scenario = default_finite_scenario(rng.derive(0))
    deltas = [delta] if delta is not None else [0.05, 0.1, 0.2]
    reports = {}
    for i, dl in enumerate(deltas):
        for j, sel in enumerate(selectors):
            reports[f"{sel}@{dl}"] = bound_validity_mc(trials, scenario, sel, dl, m,
                                                       rng.derive(1, i, j)).to_dict()
    return {"suite": "validity", "reports": reports,
            "pass": all(r["pass"] for r in reports.values())}


def projected_risk_suite(rng: RandomSource, n_mc: int = 100_000) -> dict:
    task = generate_task(rng.derive(0), 10)
    data = sample_dataset(rng.derive(1), task, 100)
    mu = sample_uniform_ball(rng.derive(2), 10, 0.05)
    cases = {"narrow posterior (sigma_q=1e-2)": 1e-2, "Dirac (sigma_q=0)": 0.0,
             "adversarial (sigma_q=0.5)": 0.5}
    results = {}
    for i, (name, sq) in enumerate(cases.items()):
        closed, projected, diff = projected_risk_crosscheck(rng.derive(3, i), data,
                                                            PosteriorParams(mu, sq), n_mc)
        results[name] = {"closed_form": closed, "projected_mc": projected, "diff": diff}
    ok = (results["narrow posterior (sigma_q=1e-2)"]["diff"] <= 1e-6
          and results["Dirac (sigma_q=0)"]["diff"] == 0.0
          and results["adversarial (sigma_q=0.5)"]["diff"] > 0.0)
    return {"suite": "projected-risk", "cases": results, "pass": ok}


def w1_upper_suite(rng: RandomSource, settings: int = 50, d: int = 10) -> dict:
    checks = []
    for i in range(settings):
        Q, P = random_projected_pair(rng.derive(0, i), d)
        checks.append(w1_upper_bound_check(rng.derive(1, i), Q, P))
    failures = [c for c in checks if not c["pass"]]
    margin = min(c["bound"] - c["estimate"] + 3 * c["se"] for c in checks)
    return {"suite": "w1-upper", "settings": settings, "failures": len(failures),
            "min_margin": margin, "pass": not failures}


def run_suite(name: str, seed: int = 0, delta: float | None = None,
              trials: int | None = None) -> dict:
    rng = RandomSource(seed)
    if name == "transport":
        return transport_suite(rng)
    if name == "gradients":
        return gradients_suite(rng)
    if name == "lipschitz-lemma":
        return lipschitz_suite(rng, delta, trials or 1000)
    if name == "validity":
        return validity_suite(rng, delta, trials or 2000)
    if name == "projected-risk":
        return projected_risk_suite(rng)
    if name == "w1-upper":
        return w1_upper_suite(rng)
    raise InvalidArgumentError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj
