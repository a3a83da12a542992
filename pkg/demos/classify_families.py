"""
Which way does the big jump go?
===============================

For i.i.d. X1, X2 with log-density u, look at Z_d = X1/d given X1+X2 = d.
Type I laws push Z_d to the endpoints (one summand carries everything);
Type II laws pull it to 1/2 (the two summands share).  The sign of the
curvature limit L = lim u''(t) decides it: L > 0 gives Type I, L < 0 gives
Type II.  This script classifies every built-in family.
"""

from bigjump.classifier import classify
from bigjump.models import model_schema, parse_model

models = ["gamma:a=0.5", "gamma:a=3", "exp", "weibull:alpha=0.5", "weibull:alpha=2",
          "lognormal", "pareto:alpha=2", "expsqrt:+", "expsqrt:-"]

print(f"{'model':<22} {'L':>5} {'divergence':>13} {'hazard':>11} {'tail':>12}  behaviour")
for spec in models:
    r = classify(parse_model(spec))
    print(f"{spec:<22} {r.L.value:>5} {r.divergence.value:>13} {r.hazard_trend.value:>11} "
          f"{r.tail_class.value:>12}  {r.behaviour.value}")

# Gamma and Pareto tails keep the divergence gap bounded, so the curvature
# sign alone settles nothing there.  Gamma(a) does not move at all: Z_d is
# Beta(a, a) for every d.  Pareto needs the pointwise certificate
# (see `bigjump analyze --certify-pointwise`).
print()
print(classify(parse_model("gamma:a=3")).notes[0])
print(len(model_schema()), "families available; see `bigjump list-models`")
