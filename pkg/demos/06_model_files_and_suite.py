"""Custom model documents and the verification suite.

Spacetimes are plain JSON: coordinate names, parameters, 16 metric expression
strings (symmetric), 4 potential components, the coupling, and a chart guard.
The suite then runs every identity check on seeded sample points and emits a
deterministic residual report.
"""

import json

from tbgrav import load_model, print_model, run_suite
from tbgrav.verify import reports_to_csv

document = {
    "name": "charged-hole",
    "coords": ["t", "r", "theta", "phi"],
    "params": {"M": 1.0, "Q": 0.3},
    "metric": [
        ["1 - 2*M/r + Q^2/r^2", "0", "0", "0"],
        ["0", "-1/(1 - 2*M/r + Q^2/r^2)", "0", "0"],
        ["0", "0", "-r^2", "0"],
        ["0", "0", "0", "-r^2*sin(theta)^2"],
    ],
    "potential": ["Q/r", "0", "0", "0"],
    "alpha": "star",
    "c": 1.0,
    "k": 1.0,
    # positive exactly when r is outside the horizon AND 0 < theta < pi
    "chart_guard": "(r - (M + sqrt(M^2 - Q^2))) + sin(theta) - sqrt((r - (M + sqrt(M^2 - Q^2)))^2 + sin(theta)^2)",
}

model = load_model(json.dumps(document))
print("loaded:", model.name, " alpha =", model.alpha)

# models round-trip through their canonical printed form
assert load_model(print_model(model)).alpha == model.alpha

reports = run_suite(model, seed=42, n_points=3)
print(f"{len(reports)} checks:")
for r in reports:
    print(f"  {'PASS' if r.passed else 'FAIL'}  {r.check:32s} max residual {r.max_residual:.2e}")

print()
print(reports_to_csv(reports))
