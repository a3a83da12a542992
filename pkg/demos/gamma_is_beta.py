"""
Gamma summands: the conditional law never moves
================================================

For Gamma(a) summands X1/(X1+X2) is Beta(a, a) and independent of the sum,
so the conditional density of Z_d is the Beta(a, a) density for every d.
The quadrature does not know this; here we compare.
"""

import numpy as np
from scipy import stats

from bigjump.conditional import pdf_zd
from bigjump.diagnostics import beta_distance
from bigjump.models import Gamma

x = np.array([0.05, 0.2, 0.5, 0.8, 0.95])
for a in (0.5, 1.0, 3.0):
    m = Gamma(a=a)
    print(f"a = {a}")
    for d in (1.0, 100.0, 1e4):
        print(f"  d = {d:>7g}  f(x) = {np.round(pdf_zd(m, d, x), 6)}")
    print(f"  Beta(a, a)   f(x) = {np.round(stats.beta(a, a).pdf(x), 6)}")
    print(f"  sup distance at d = 1000: {beta_distance(m, 1000.0):.1e}")
