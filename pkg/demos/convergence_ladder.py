"""
Watching the mass move
======================

Along a ladder of d values, track the mass of Z_d near the endpoints
([0, ε) ∪ (1-ε, 1]) and near the midpoint ((1/2-ε, 1/2+ε)).  The masses
soon round to 1.0; their complements stay resolved in log space.
"""

from bigjump.diagnostics import convergence_ladder, log_window_complements
from bigjump.models import WeibullType

ladder = [10.0 * 4.0 ** k for k in range(12)]

for model, which, label in ((WeibullType(alpha=0.5), 0, "endpoint"),
                            (WeibullType(alpha=2), 1, "midpoint")):
    lad = convergence_ladder(model, ladder)
    masses = lad.endpoint_mass if which == 0 else lad.midpoint_mass
    print(f"{model.spec}: verdict {lad.verdict.value}")
    print(f"  {'d':>10}  {label + ' mass':>14}  log(1 - mass)")
    for d, mass in zip(ladder, masses):
        print(f"  {d:>10.4g}  {mass:>14.10f}  {log_window_complements(model, d)[which]:.4g}")
    print()
