"""Probability measures, finite metric spaces, ball geometry and seeded sampling.

All measures are immutable values.  Covariances are isotropic (``sigma**2 * I``)
throughout; this is the only family the regression experiment needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError

__all__ = [
    "GaussianMeasure",
    "ProjectedGaussianMeasure",
    "DiracMeasure",
    "DiscreteMeasure",
    "FiniteMetricSpace",
    "RandomSource",
    "project_ball",
    "sample_uniform_ball",
    "sample_gaussian",
]

WEIGHT_SUM_TOL = 1e-12


def _finite_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgumentError(f"{name} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GaussianMeasure:
    """Isotropic Gaussian ``N(mean, sigma**2 I)``; ``sigma == 0`` is a point mass."""

    mean: np.ndarray
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "mean", _finite_vector(self.mean, "mean"))
        sigma = float(self.sigma)
        if not np.isfinite(sigma) or sigma < 0:
            raise InvalidArgumentError(f"sigma must be finite and >= 0, got {self.sigma}")
        object.__setattr__(self, "sigma", sigma)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class ProjectedGaussianMeasure:
    """Push-forward of ``base`` under Euclidean projection onto the ball of ``radius``."""

    base: GaussianMeasure
    radius: float

    def __post_init__(self):
        radius = float(self.radius)
        if not np.isfinite(radius) or radius <= 0:
            raise InvalidArgumentError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", radius)

    @property
    def dim(self) -> int:
        return self.base.dim


@dataclass(frozen=True)
class DiracMeasure:
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", _finite_vector(self.point, "point"))

    @property
    def dim(self) -> int:
        return self.point.size

    def as_gaussian(self) -> GaussianMeasure:
        return GaussianMeasure(self.point, 0.0)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability vector over the points of a finite metric space."""

    weights: np.ndarray

    def __post_init__(self):
        w = _finite_vector(self.weights, "weights")
        if np.any(w < 0):
            raise InvalidArgumentError("weights must be non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidArgumentError(f"weights must sum to 1 (got {w.sum()!r})")
        object.__setattr__(self, "weights", w)

    @classmethod
    def normalized(cls, weights) -> DiscreteMeasure:
        """Build a measure from non-negative masses, rescaling them to sum to one."""
        w = np.asarray(weights, dtype=float)
        return cls(w / w.sum())

    @property
    def size(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Points ``0..n-1`` with a validated distance matrix.

    Construction checks symmetry, zero diagonal, non-negativity and the
    triangle inequality (``O(n**3)``, once).
    """

    dist: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        D = np.asarray(self.dist, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 1:
            raise InvalidArgumentError("dist must be a square n x n matrix with n >= 1")
        if not np.all(np.isfinite(D)):
            raise InvalidArgumentError("dist has non-finite entries")
        if np.any(D < 0):
            raise InvalidArgumentError("distances must be non-negative")
        if np.any(np.abs(np.diag(D)) > 0):
            raise InvalidArgumentError("dist must have a zero diagonal")
        if not np.allclose(D, D.T, rtol=0.0, atol=self.tol):
            raise InvalidArgumentError("dist must be symmetric")
        # d(i,j) <= d(i,k) + d(k,j) for every k
        via = D[:, :, None] + D[None, :, :]  # via[i,k,j] = d(i,k) + d(k,j)
        if np.any(D > via.min(axis=1) + self.tol):
            raise InvalidArgumentError("dist violates the triangle inequality")
        D = D.copy()
        D.flags.writeable = False
        object.__setattr__(self, "dist", D)

    @property
    def size(self) -> int:
        return self.dist.shape[0]

    @classmethod
    def from_points(cls, points) -> FiniteMetricSpace:
        """Euclidean distances between rows of ``points`` (1-d input = points on a line)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        diff = pts[:, None, :] - pts[None, :, :]
        D = np.sqrt(np.sum(diff**2, axis=-1))
        return cls(0.5 * (D + D.T))


@dataclass
class RandomSource:
    """Seeded PCG64 stream.

    A source is single-owner and mutable; parallel work derives independent
    sources with :meth:`derive` instead of sharing one.
    """

    seed: int
    algorithm: str = "PCG64"
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.algorithm != "PCG64":
            raise InvalidArgumentError(f"unsupported algorithm {self.algorithm!r}")
        self.seed = int(self.seed)
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, *keys: int) -> RandomSource:
        """Independent child source determined only by ``(seed, *keys)``."""
        ss = np.random.SeedSequence([self.seed, *(int(k) for k in keys)])
        child_seed = int(ss.generate_state(1, dtype=np.uint64)[0])
        return RandomSource(child_seed, self.algorithm)


def project_ball(v, r: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto the closed ball of radius ``r``.

    Works row-wise on 2-d input.
    """
    r = float(r)
    if not np.isfinite(r) or r <= 0:
        raise InvalidArgumentError(f"radius must be positive, got {r}")
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError("cannot project a non-finite vector")
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    outside = norms > r
    if not np.any(outside):
        return v.copy()
    scale = np.where(outside, r / np.where(outside, norms, 1.0), 1.0)
    out = v * scale
    # rounding can leave the scaled vector a hair outside the ball; pull it a
    # few ulps inside so any summation order of the norm agrees
    inner = r * (1 - 8 * np.finfo(float).eps)
    for _ in range(64):
        over = outside & (np.linalg.norm(out, axis=-1, keepdims=True) > inner)
        if not np.any(over):
            break
        out = np.where(over, np.nextafter(out, 0.0), out)
    return out


def sample_uniform_ball(rng: RandomSource, d: int, r: float, size: int | None = None) -> np.ndarray:
    """Uniform sample(s) from the closed L2 ball: Gaussian direction, radius ``r * U**(1/d)``."""
    if d < 1:
        raise InvalidArgumentError("d must be >= 1")
    if not r > 0:
        raise InvalidArgumentError("r must be positive")
    n = 1 if size is None else int(size)
    gen = rng.generator
    z = gen.standard_normal((n, d))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = r * gen.random((n, 1)) ** (1.0 / d)
    out = z / norms * radii
    return out[0] if size is None else out


def sample_gaussian(rng: RandomSource, g: GaussianMeasure, size: int | None = None) -> np.ndarray:
    n = 1 if size is None else int(size)
    if g.sigma == 0:
        out = np.broadcast_to(g.mean, (n, g.dim)).copy()
    else:
        out = g.mean + g.sigma * rng.generator.standard_normal((n, g.dim))
    return out[0] if size is None else out
