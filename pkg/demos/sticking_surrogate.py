"""Kriging surrogates of the sticking time over (K1, K2): one-shot TPLHD
against adaptive MEPE, single seed.

Run with ``python3 demos/sticking_surrogate.py`` (several minutes).
"""

from mobsurrogate.workbench import StudyConfig, get_problem, reference_grid, run_adaptive_study

spec = get_problem("P0")
ref = reference_grid(spec, progress=lambda d, n: print(f"  reference {d}/{n}"))
for scheme in ("tplhd", "mepe"):
    rec = run_adaptive_study(spec, StudyConfig(scheme, budget=60, n_init=20, seeds=(0,)), ref)[0]
    m = rec.steps[-1].metrics
    print(f"{scheme:>5} with {rec.steps[-1].n_samples} samples: "
          f"MAE {m['mae']:.3f} s, RMSE {m['rmse']:.3f} s, R2 {m['r2']:.3f}")
