"""Largest Lyapunov exponents: estimator check on the Molaie flow, then an
angular-frequency sweep of the oscillator.

Run with ``python3 demos/lyapunov.py`` (about a minute).
"""

import numpy as np

from mobsurrogate import SystemParams, classify_lle, mob_lle
from mobsurrogate.indicators import MOLAIE_LLE, MOLAIE_X0, lyapunov_spectrum, molaie_system

print("Molaie flow: Jacobian by variational equations vs central differences")
for a in (3.30, 3.35, 3.40):
    sys_ = molaie_system(a)
    la = lyapunov_spectrum(sys_, MOLAIE_X0, MOLAIE_LLE, "analytic").lle
    lp = lyapunov_spectrum(sys_, MOLAIE_X0, MOLAIE_LLE, "perturbation").lle
    print(f"  a = {a:.2f}: analytic {la:+.4f}, perturbation {lp:+.4f} [1/s]")

print("\nOscillator over Omega (K1 = 1, K2 = 0):")
for omega in np.linspace(0.55, 0.75, 9):
    lle = mob_lle(SystemParams(Omega=float(omega)))
    state = "chaotic" if classify_lle(lle) else "regular"
    print(f"  Omega = {omega:.3f} rad/s: LLE {lle:+.4f} 1/s  {state}")
