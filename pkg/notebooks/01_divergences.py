# %% [markdown]
# # Divergences between priors and posteriors
#
# KL divergence is infinite as soon as the posterior puts mass where the
# prior has none. Total variation and Wasserstein distances stay finite.
# This script compares them on a few small cases.

# %%
import numpy as np

from ipm_pacbayes import (
    DiscreteMeasure,
    FiniteMetricSpace,
    GaussianMeasure,
    ProjectedGaussianMeasure,
    kl_discrete,
    kl_gaussian_isotropic,
    tv_discrete,
    w1_discrete_exact,
    w1_projected_gaussian_upper,
    w2_gaussian,
)

# %% [markdown]
# ## Three points on a line
#
# The posterior moves mass off the last point, so KL(P || Q) has no finite
# value but the other direction does.

# %%
space = FiniteMetricSpace.from_points(np.array([0.0, 0.5, 2.0]))
Q = DiscreteMeasure(np.array([0.6, 0.4, 0.0]))
P = DiscreteMeasure(np.array([0.2, 0.3, 0.5]))

print("KL(Q||P) =", kl_discrete(Q, P).value)
print("TV       =", tv_discrete(Q, P).value)
w1 = w1_discrete_exact(Q, P, space)
print("W1       =", w1.value)
print(np.round(w1.details["coupling"], 3))

# %% [markdown]
# ## Gaussians shrinking to a point
#
# As the prior width goes to zero the KL blows up like ``d log(1/sigma)``.
# W2 settles at the distance between the means.

# %%
d = 10
mu = np.full(d, 0.01)
for sigma_p in (1e-1, 1e-2, 1e-4, 1e-8):
    Qg = GaussianMeasure(mu, 1e-3)
    Pg = GaussianMeasure(np.zeros(d), sigma_p)
    print(f"sigma_P={sigma_p:g}  KL={kl_gaussian_isotropic(Qg, Pg).value:12.4f}  W2={w2_gaussian(Qg, Pg).value:.6f}")

# %% [markdown]
# ## Projected Gaussians
#
# Projection onto the unit ball keeps the measures on a bounded set. The
# upper bound on W1 adds a tail term to W2 for each measure.

# %%
Qp = ProjectedGaussianMeasure(GaussianMeasure(mu, 1e-3), 1.0)
Pp = ProjectedGaussianMeasure(GaussianMeasure(np.zeros(d), 0.0), 1.0)
bound = w1_projected_gaussian_upper(Qp, Pp)
print(bound.value, bound.details)
