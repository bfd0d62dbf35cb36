"""Acceptance criteria, one PASS/FAIL line each.

Lines are printed immediately and repeated in the terminal summary. Desk
studies use the cached reference surfaces (built on first use).
"""

import functools

import numpy as np
import pytest

from mobsurrogate.indicators import MOLAIE_LLE, MOLAIE_X0, lyapunov_spectrum, molaie_system
from mobsurrogate.kriging import DesignSet, fit_given_theta, loocv_errors, predict
from mobsurrogate.metrics import mae, r2, rmae, rmse
from mobsurrogate.sampling import MepeState, candidate_pool, mepe_next, mepe_update
from mobsurrogate.workbench import (
    StudyConfig,
    aggregate,
    get_problem,
    reference_grid,
    run_adaptive_study,
)

from . import conftest
from .oracles import dense_kriging_exact
from .test_dynamics import _fixed_step_error

SEEDS = (0, 1, 2, 3, 4)
_FITTED = []


def report(number, ok, detail):
    line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


def _interpolation_ok(model):
    mean, var = predict(model, model.design.X)
    y = model.design.y
    return bool(np.all(np.abs(mean - y) <= 1e-6 * (1.0 + np.abs(y)))
                and np.all(var <= 1e-6 * model.sigma2_hat + 1e-300))


@functools.lru_cache(maxsize=None)
def _study(name, scheme, budget, n_init):
    spec = get_problem(name)
    ref = reference_grid(spec)
    recs = run_adaptive_study(spec, StudyConfig(scheme, budget, n_init, seeds=SEEDS), ref)
    return spec, ref, recs


def _final(recs):
    assert all(r.status == "ok" for r in recs), [r.error for r in recs]
    return aggregate(recs)[-1]


def _final_models(recs):
    for r in recs:
        _FITTED.append(fit_given_theta(DesignSet(r.X, r.y), r.steps[-1].theta)[0])


# -- 1 -------------------------------------------------------------------------


def test_c01_molaie_lle_equivalence():
    worst, sign_ok = 0.0, True
    for a in np.linspace(3.3, 3.4, 11):
        sys_ = molaie_system(float(a))
        la = lyapunov_spectrum(sys_, MOLAIE_X0, MOLAIE_LLE, "analytic").lle
        lp = lyapunov_spectrum(sys_, MOLAIE_X0, MOLAIE_LLE, "perturbation").lle
        worst = max(worst, abs(lp - la))
        if abs(la) > 0.01 and np.sign(la) != np.sign(lp):
            sign_ok = False
    report(1, worst <= 0.02 and sign_ok,
           f"max |LLE_pert - LLE_analytic| = {worst:.2e} (<= 0.02), signs agree: {sign_ok}")


# -- 2 -------------------------------------------------------------------------


def test_c02_kriging_dense_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(25):
        m, n = int(rng.integers(2, 9)), int(rng.integers(1, 4))
        X = rng.random((m, n))
        y = rng.normal(size=m)
        theta = 10.0 ** rng.uniform(-1.0, 0.3, n)
        model, psi = fit_given_theta(DesignSet(X, y), theta)
        x_new = rng.random((4, n))
        mean, var = predict(model, x_new)
        mu, s2, psi_o, mo, vo = dense_kriging_exact(X, y, theta, model.nugget, x_new)
        for got, want in [(model.mu_hat, mu), (model.sigma2_hat, s2), (psi, psi_o)]:
            worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
        worst = max(worst, np.max(np.abs(mean - mo) / np.maximum(np.abs(mo), 1e-300)))
        worst = max(worst, np.max(np.abs(var - vo) / np.maximum(np.abs(vo), 1e-300)))
        _FITTED.append(model)
    report(2, worst <= 1e-8, f"max relative deviation from dense oracle = {worst:.2e} (<= 1e-8)")


# -- 4 -------------------------------------------------------------------------


def test_c04_integrator_order():
    hs = np.array([0.2, 0.1, 0.05])
    errs = np.array([_fixed_step_error(h) for h in hs])
    order = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    report(4, 4.5 <= order <= 5.5, f"observed order = {order:.3f} (in [4.5, 5.5])")


# -- 5 -------------------------------------------------------------------------


@pytest.mark.slow
def test_c05_p0_sticking_time_study():
    maes = {}
    for scheme, budget in [("tplhd", 60), ("mepe", 60), ("eigf", 60)]:
        _, _, recs = _study("P0", scheme, budget, 20)
        maes[scheme] = _final(recs)["mae"]
        if scheme != "tplhd":
            _final_models(recs)
    cap = 0.75 * maes["tplhd"]
    ok = all(maes[s] <= cap and maes[s] <= 0.30 for s in ("mepe", "eigf"))
    report(5, ok, f"MAE TPLHD-60 {maes['tplhd']:.3f} s, MEPE-60 {maes['mepe']:.3f} s, "
                  f"EIGF-60 {maes['eigf']:.3f} s (adaptive <= {cap:.3f} s and <= 0.30 s)")


# -- 6 -------------------------------------------------------------------------


@pytest.mark.slow
def test_c06_p1_mivor_classification():
    _, _, recs = _study("P1", "mivor", 35, 5)
    last = _final(recs)
    _final_models(recs)
    ok = last["a_pos"] >= 95.0 and last["a_neg"] >= 97.0
    report(6, ok, f"P1 budget 35: a_pos {last['a_pos']:.2f}% (>= 95), "
                  f"a_neg {last['a_neg']:.2f}% (>= 97)")


# -- 7 -------------------------------------------------------------------------


@pytest.mark.slow
def test_c07_p2_rare_class_discovery():
    _, _, recs = _study("P2", "mivor", 65, 10)
    last = _final(recs)
    _final_models(recs)
    init_stable = all(np.all(r.y[:10] < 0) for r in recs)
    found = all(np.any(r.y[10:] >= 0) for r in recs)
    ok = last["a_pos"] >= 90.0 and last["a_neg"] >= 99.0 and init_stable and found
    report(7, ok, f"P2 budget 65: a_pos {last['a_pos']:.2f}% (>= 90), a_neg {last['a_neg']:.2f}% "
                  f"(>= 99), initial all stable: {init_stable}, chaotic found in every run: {found}")


# -- 8 -------------------------------------------------------------------------


def test_c08_mepe_alpha_contract():
    X = np.array([[0.1], [0.4], [0.9]])
    model = fit_given_theta(DesignSet(X, np.array([0.0, 1.0, 0.2])), [0.3])[0]
    _FITTED.append(model)
    pool = candidate_pool(1, 5)
    point, state = mepe_next(model, X, MepeState(), pool)
    first = state.alpha
    pred, _ = predict(model, point)
    perfect = mepe_update(state, pred).alpha
    clamped = mepe_update(state, pred + 1e3).alpha
    assert np.all(loocv_errors(model) >= 0)
    ok = first == 0.5 and clamped == 0.99 and perfect == 0.0
    report(8, ok, f"alpha first {first}, clamped {clamped}, after perfect prediction {perfect}")


# -- 9 -------------------------------------------------------------------------


def test_c09_metric_identities():
    rng = np.random.default_rng(9)
    y = rng.normal(size=50)
    perfect = mae(y, y) == 0 and rmse(y, y) == 0 and rmae(y, y) == 0 and r2(y, y) == 1
    violations = 0
    for _ in range(1000):
        n = int(rng.integers(1, 50))
        a, b = rng.normal(size=n) * 10, rng.normal(size=n) * 10
        if mae(a, b) > rmse(a, b) * (1 + 1e-12):
            violations += 1
    report(9, perfect and violations == 0,
           f"perfect-prediction identities hold: {perfect}, MAE > RMSE in {violations}/1000 draws")


# -- 10 ------------------------------------------------------------------------


@pytest.mark.slow
def test_c10_determinism():
    spec, ref, recs = _study("P1", "mivor", 35, 5)
    again = run_adaptive_study(spec, StudyConfig("mivor", 35, 5, seeds=SEEDS), ref)
    same = [a.to_json() == b.to_json() for a, b in zip(recs, again)]
    report(10, all(same) and len(same) == len(SEEDS),
           f"byte-identical RunRecord JSON for {sum(same)}/{len(SEEDS)} seeded P1 realizations")


# -- 3 (runs last: covers every model fitted above) ----------------------------


def test_c03_interpolation_property():
    rng = np.random.default_rng(3)
    for m, n in [(5, 1), (10, 2), (20, 3)]:
        X = rng.random((m, n))
        _FITTED.append(fit_given_theta(DesignSet(X, np.sin(5 * X).sum(1)), np.full(n, 0.2))[0])
    bad = sum(not _interpolation_ok(mdl) for mdl in _FITTED)
    report(3, bad == 0, f"{len(_FITTED) - bad}/{len(_FITTED)} fitted models interpolate "
                        f"(|mean - y| <= 1e-6(1+|y|), var <= 1e-6 sigma2)")
