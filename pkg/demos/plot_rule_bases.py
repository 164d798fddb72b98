"""
Compact, full and enhanced rule bases
=====================================

A rule base is an index matrix: row ``r`` lists, for every feature, which of
the ``S`` fuzzy sets rule ``r`` uses.  Indices start at 1.
"""

from adatsk.rulebase import build_coco, build_enfrb, build_fuco, place_centers
from adatsk.errors import CapacityError
import numpy as np

##############################################################################
# The compact rule base uses set ``s`` on every feature, giving ``S`` rules no
# matter how many features there are.

print(build_coco(3, 4).rows)

##############################################################################
# The full rule base enumerates every combination, ``S**D`` rules:

print(build_fuco(2, 3).rows)
try:
    build_fuco(10, 7)
except CapacityError as exc:
    print("refused:", exc)

##############################################################################
# The enhanced rule base sits between the two.  Each compact rule is kept and
# joined by its neighbours that shift one feature by one set in either
# direction (wrapping around), for ``(2D + 1) S`` rules.

en = build_enfrb(3, 2)
print(en.n_rules, "rules")
print(en.rows)

##############################################################################
# Every compact rule appears in the enhanced base, and every enhanced rule in
# the full one.

coco, full = set(build_coco(3, 3).as_tuples()), set(build_fuco(3, 3).as_tuples())
print(coco <= set(build_enfrb(3, 3).as_tuples()) <= full)

##############################################################################
# Fuzzy sets are spread evenly over each feature's training range.

X = np.array([[0.0, 10.0], [1.0, 30.0]])
print(place_centers(X, 5).centers)
