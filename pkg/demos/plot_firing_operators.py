"""
Firing strengths in many dimensions
===================================

Why the product t-norm breaks down as the number of features grows, how a
fixed-exponent softmin fails in two different ways, and how choosing the
exponent from the data avoids both problems.
"""

import numpy as np

from adatsk import core

##############################################################################
# Product t-norm
# --------------
#
# With unit-spread Gaussian memberships on min-max scaled data, every
# membership lies in ``[exp(-1), 1]``.  The product of a few thousand such
# numbers still leaves the double range.

rng = np.random.default_rng(0)
for D in (10, 100, 1000, 5000):
    mu = core.gaussian_membership(rng.uniform(0, 1, D), 0.5 + rng.choice([-0.5, 0.5], D))
    print(f"D={D:5d}  product={core.product_firing(mu):.3e}  "
          f"adaptive softmin={core.ada_softmin_firing(mu):.4f}  true min={mu.min():.4f}")

##############################################################################
# Softmin with a fixed exponent
# -----------------------------
#
# ``((sum v**q) / D) ** (1/q)`` approaches the minimum as ``q`` goes to minus
# infinity.  A moderate ``q`` returns something well above the minimum:

v = [0.5, 0.55, 0.49, 0.48]
print("softmin(v, -12) =", round(float(core.fixed_softmin(v, -12)), 4), " min(v) =", min(v))

##############################################################################
# and a tiny membership makes ``v**q`` overflow, which collapses the result
# to zero:

u = [1.1e-26, 1.8e-22, 1.5e-9]
print("softmin(u, -12) =", core.fixed_softmin(u, -12))

##############################################################################
# Adaptive exponent
# -----------------
#
# Picking ``q = ceil(690 / ln(min mu))`` keeps every ``mu**q`` below about
# ``1e300`` while making ``q`` as negative as the data allows.

for name, vec in (("u", u), ("v", v)):
    q = core.adaptive_exponent(vec)
    print(f"{name}: q={q:5d}  adaptive softmin={core.ada_softmin_firing(vec):.5g}  min={min(vec)}")

##############################################################################
# The result always lies between the smallest and largest membership, and it
# does not depend on the order of the inputs.

mu = rng.uniform(1e-200, 1, size=1000)
f = core.ada_softmin_firing(mu)
print(mu.min() <= f <= mu.max(), f == core.ada_softmin_firing(rng.permutation(mu)))
