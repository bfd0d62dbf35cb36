"""Adaptive MiVor classification of the one-parameter problem P1.

Builds (or loads) the 500-point reference, then runs two seeded
realizations and prints the class accuracies as samples are added.
Run with ``python3 demos/adaptive_classification.py`` (a few minutes on
first use; the reference is cached afterwards).
"""

from mobsurrogate.sampling import denormalize
from mobsurrogate.workbench import StudyConfig, aggregate, get_problem, reference_grid, run_adaptive_study

spec = get_problem("P1")
ref = reference_grid(spec, progress=lambda d, n: print(f"  reference {d}/{n}"))
print(f"reference: {len(ref)} points, {100 * ref.labels.mean():.1f}% with LLE >= 0")

records = run_adaptive_study(spec, StudyConfig("mivor", budget=35, n_init=5, seeds=(0, 1)), ref)
for row in aggregate(records)[::5]:
    print(f"  n = {row['n_samples']:3d}: a_pos {row['a_pos']:6.2f}%  a_neg {row['a_neg']:6.2f}%")
for rec in records:
    omegas = sorted(round(float(x), 3) for x in denormalize(rec.X, spec.domain)[:, 0])
    print(f"seed {rec.seed}: sampled Omega [rad/s] {omegas}")
