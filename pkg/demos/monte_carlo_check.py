"""
Checking the density by simulation
==================================

Draw i.i.d. pairs, keep those whose sum lands in (d, d+Δ], and compare the
self-normalised ratio X1/(X1+X2) with the computed conditional CDF.  Setting
BIGJUMP_THREADS runs batches on several threads; the samples do not change.
"""

from bigjump.models import Exponential, Gamma, LognormalType
from bigjump.montecarlo import compare_mc_analytic, conditional_sample_zd

cases = [(Exponential(), 10.0, 0.1), (Gamma(a=2), 8.0, 0.1), (LognormalType(), 6.0, 0.1)]

for model, d, delta in cases:
    run = conditional_sample_zd(model, d, delta, n_target=20_000, seed=1)
    ks = compare_mc_analytic(run, model)
    print(f"{model.spec:<16} d={d:<5g} n={run.samples.size}  acceptance "
          f"{run.acceptance_rate:.2e} (predicted {run.predicted_rate:.2e})  KS {ks:.4f}")
