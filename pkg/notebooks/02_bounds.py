# %% [markdown]
# # Generalization bounds side by side
#
# Each bound returns a ``BoundReport`` with the empirical risk, the
# complexity term and the inputs it was built from.

# %%
import numpy as np

from ipm_pacbayes import (
    DivergenceKind,
    DivergenceValue,
    klpb_classic,
    tvpb_from_uc,
    uc_finite_class,
    uc_linreg,
    ucg_linreg,
    wpb_finite,
)

m_values = np.array([100, 200, 400, 800, 1600])
delta = 0.05

# %% [markdown]
# ## Complexity terms against sample size
#
# A finite class of 50 hypotheses with Lipschitz constant 1, a KL of 2, a
# TV of 0.1 and a W1 of 0.1.

# %%
kl = DivergenceValue(2.0, DivergenceKind.KL)
tv = DivergenceValue(0.1, DivergenceKind.TV)
w1 = DivergenceValue(0.1, DivergenceKind.W1_EXACT)

print(" m      KL-PB   TV-PB   W-PB")
for m in m_values:
    k = klpb_classic(kl, int(m), delta).complexity
    t = tvpb_from_uc(uc_finite_class(50, int(m), delta / 2), tv, int(m), delta).complexity
    w = wpb_finite(50, 1.0, w1, int(m), delta).complexity
    print(f"{m:5d}  {k:.4f}  {t:.4f}  {w:.4f}")

# %% [markdown]
# ## Uniform convergence terms for linear regression
#
# Both shrink like ``1/sqrt(m)``. The gradient term grows with the radius
# of the hypothesis set.

# %%
for m in m_values:
    print(m, round(uc_linreg(int(m), delta, 10), 4), round(ucg_linreg(int(m), delta, 10, 1.0), 4))

# %% [markdown]
# A full report carries everything needed to recompute the value.

# %%
report = wpb_finite(50, 1.0, w1, 400, delta)
report.to_dict()
