# %% [markdown]
# # Checking the library against itself
#
# Each suite compares an implementation with an independent computation:
# brute force, finite differences or plain Monte Carlo.

# %%
import json

from ipm_pacbayes.suites import SUITES, run_suite

# %%
for name in SUITES:
    report = run_suite(name, trials=500 if name == "validity" else None)
    print(f"{name:16s} pass={report['pass']}")

# %% [markdown]
# The validity suite counts how often the bound is violated over repeated
# samples. The count must stay below ``delta`` plus a two standard error
# slack.

# %%
print(json.dumps(run_suite("validity", delta=0.1, trials=500), indent=1)[:1500])
