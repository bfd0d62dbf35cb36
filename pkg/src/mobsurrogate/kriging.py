"""Ordinary kriging with a Matérn 3/2 product correlation.

Inputs live in the unit cube. The constant mean and the process variance
are profiled out by generalized least squares, leaving the reduced
likelihood ``psi = sigma2_hat * det(R)**(1/m)`` to be minimized over the
per-dimension lengthscales. The minimization is a particle swarm over
log10-lengthscales followed by a compass (pattern) search on the best
particle.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .exceptions import SingularCorrelation

__all__ = [
    "DesignSet",
    "KrigingModel",
    "PSOConfig",
    "PSOResult",
    "LOG10_BOUNDS",
    "matern32",
    "correlation_matrix",
    "fit_given_theta",
    "reduced_likelihood",
    "optimize_hyperparameters",
    "pso_minimize",
    "predict",
    "loocv_errors",
    "model_to_json",
    "model_from_json",
]

SQRT3 = np.sqrt(3.0)
LOG10_BOUNDS = (-3.0, 2.0)
NUGGET_START = 1e-10
NUGGET_MAX = 1e-6
DUPLICATE_TOL = 1e-10
JSON_FORMAT = "mobsurrogate.kriging"
JSON_VERSION = 1


@dataclass(frozen=True)
class DesignSet:
    """Normalized sample locations ``X`` (m x n) and responses ``y`` (m)."""

    X: np.ndarray
    y: np.ndarray
    _absdiff: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y disagree on the number of samples")
        if np.any(X < -1e-12) or np.any(X > 1 + 1e-12):
            raise ValueError("design points must lie in the unit cube")
        if not np.all(np.isfinite(y)):
            raise ValueError("responses must be finite")
        diff = np.abs(X[:, None, :] - X[None, :, :])
        if X.shape[0] > 1:
            dist = np.sqrt((diff**2).sum(-1))
            iu = np.triu_indices(X.shape[0], 1)
            if np.any(dist[iu] < DUPLICATE_TOL):
                raise ValueError("duplicate design points")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "_absdiff", diff)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def add(self, x, y) -> "DesignSet":
        return DesignSet(np.vstack([self.X, np.atleast_2d(x)]), np.append(self.y, y))


def matern32(a, b, lengthscales):
    """Matérn 3/2 product correlation between points ``a`` and ``b``.

    Broadcasts over leading axes; the last axis indexes dimensions.
    """
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    s = SQRT3 * d / np.asarray(lengthscales, dtype=float)
    out = np.prod((1.0 + s) * np.exp(-s), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def _corr_from_absdiff(diff: np.ndarray, theta: np.ndarray) -> np.ndarray:
    s = diff * (SQRT3 / theta)
    return np.prod(1.0 + s, axis=-1) * np.exp(-s.sum(axis=-1))


def correlation_matrix(XA, XB, theta) -> np.ndarray:
    XA = np.atleast_2d(np.asarray(XA, dtype=float))
    XB = np.atleast_2d(np.asarray(XB, dtype=float))
    return _corr_from_absdiff(np.abs(XA[:, None, :] - XB[None, :, :]), np.asarray(theta, float))


@dataclass(frozen=True)
class KrigingModel:
    """A fitted ordinary kriging predictor.

    ``chol_R`` is the lower Cholesky factor of ``R + nugget * I`` and
    ``alpha_weights`` caches ``R^-1 (y - mu_hat)``.
    """

    design: DesignSet
    theta: np.ndarray
    mu_hat: float
    sigma2_hat: float
    chol_R: np.ndarray
    alpha_weights: np.ndarray
    nugget: float
    rinv_one: np.ndarray
    one_rinv_one: float

    def predict(self, x):
        return predict(self, x)


def _factorize(R: np.ndarray, nugget: float):
    m = R.shape[0]
    while True:
        try:
            L = linalg.cholesky(R + nugget * np.eye(m), lower=True, check_finite=False)
            if np.all(np.diag(L) > 0):
                return L, nugget
        except linalg.LinAlgError:
            pass
        nugget *= 10.0
        if nugget > NUGGET_MAX * (1 + 1e-9):
            raise SingularCorrelation("correlation matrix not positive definite up to nugget 1e-6")


def fit_given_theta(design: DesignSet, theta, nugget: float = NUGGET_START):
    """Fit the mean and variance for fixed lengthscales.

    Returns ``(model, psi)`` with ``psi`` the reduced likelihood computed
    from the log-determinant of the Cholesky factor.
    """
    if design.m < 2:
        raise ValueError("need at least two samples to fit")
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.shape[0] != design.n:
        raise ValueError("one lengthscale per dimension is required")
    R = _corr_from_absdiff(design._absdiff, theta)
    L, nugget = _factorize(R, nugget)
    m = design.m
    ones = np.ones(m)
    rinv_one = linalg.cho_solve((L, True), ones, check_finite=False)
    one_rinv_one = float(ones @ rinv_one)
    mu = float(rinv_one @ design.y) / one_rinv_one
    resid = design.y - mu
    alpha = linalg.cho_solve((L, True), resid, check_finite=False)
    sigma2 = max(float(resid @ alpha) / m, 0.0)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    psi = sigma2 * np.exp(logdet / m)
    model = KrigingModel(design, theta, mu, sigma2, L, alpha, nugget, rinv_one, one_rinv_one)
    return model, float(psi)


def reduced_likelihood(design: DesignSet, theta, nugget: float = NUGGET_START) -> float:
    return fit_given_theta(design, theta, nugget)[1]


def predict(model: KrigingModel, x):
    """Kriging mean and variance at one point or a batch of points.

    A single point (1-D input) returns floats; a batch returns arrays. The
    nugget is treated as part of the correlation at zero distance, so the
    mean reproduces the data at design points even after escalation.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X0 = np.atleast_2d(x)
    if np.any(X0 < 0) or np.any(X0 > 1):
        warnings.warn("prediction point outside the unit cube was clamped", stacklevel=2)
        X0 = np.clip(X0, 0.0, 1.0)
    r = correlation_matrix(X0, model.design.X, model.theta)  # (k, m)
    # the nugget belongs to the kernel at zero distance, so design points interpolate
    same = np.max(np.abs(X0[:, None, :] - model.design.X[None, :, :]), axis=-1) <= DUPLICATE_TOL
    r = r + model.nugget * same
    mean = model.mu_hat + r @ model.alpha_weights
    v = linalg.solve_triangular(model.chol_R, r.T, lower=True, check_finite=False)
    rr = np.sum(v * v, axis=0)
    u = r @ model.rinv_one - 1.0
    var = model.sigma2_hat * (1.0 - rr + u * u / model.one_rinv_one)
    var = np.maximum(var, 0.0)
    if single:
        return float(mean[0]), float(var[0])
    return mean, var


def loocv_errors(model: KrigingModel) -> np.ndarray:
    """Squared leave-one-out errors from the closed form (mean held fixed)."""
    m = model.design.m
    Rinv = linalg.cho_solve((model.chol_R, True), np.eye(m), check_finite=False)
    e = model.alpha_weights / np.diag(Rinv)
    return e * e


# -- hyperparameter search -----------------------------------------------------


@dataclass(frozen=True)
class PSOConfig:
    swarm_size: int = 40
    iterations: int = 60
    inertia: float = 0.72
    cognitive: float = 1.49
    social: float = 1.49
    local_steps: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.swarm_size < 2 or self.iterations < 1:
            raise ValueError("need swarm_size >= 2 and iterations >= 1")


@dataclass
class PSOResult:
    x: np.ndarray
    fun: float
    trace: list[float]
    n_evals: int


def pso_minimize(fun, lower, upper, cfg: PSOConfig, x0=None) -> PSOResult:
    """Particle swarm on a box followed by compass search on the incumbent.

    ``trace`` records the best-so-far value after the initial swarm, after
    every swarm iteration and after every pattern-search sweep.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = lower.shape[0]
    rng = np.random.default_rng(cfg.seed)
    span = upper - lower
    pos = lower + rng.random((cfg.swarm_size, n)) * span
    if x0 is not None:
        pos[0] = np.clip(x0, lower, upper)
    vel = (rng.random((cfg.swarm_size, n)) - 0.5) * 0.2 * span
    vmax = 0.2 * span
    vals = np.array([fun(p) for p in pos])
    n_evals = len(vals)
    pbest, pval = pos.copy(), vals.copy()
    g = int(np.argmin(pval))
    gbest, gval = pbest[g].copy(), float(pval[g])
    trace = [gval]
    for _ in range(cfg.iterations):
        r1 = rng.random((cfg.swarm_size, n))
        r2 = rng.random((cfg.swarm_size, n))
        vel = (cfg.inertia * vel + cfg.cognitive * r1 * (pbest - pos)
               + cfg.social * r2 * (gbest - pos))
        vel = np.clip(vel, -vmax, vmax)
        pos = pos + vel
        out = (pos < lower) | (pos > upper)
        pos = np.clip(pos, lower, upper)
        vel[out] = 0.0
        vals = np.array([fun(p) for p in pos])
        n_evals += len(vals)
        better = vals < pval
        pbest[better] = pos[better]
        pval[better] = vals[better]
        g = int(np.argmin(pval))
        if pval[g] < gval:
            gbest, gval = pbest[g].copy(), float(pval[g])
        trace.append(gval)

    step = 0.1 * span
    x, fx = gbest.copy(), gval
    for _ in range(cfg.local_steps):
        improved = False
        for i in range(n):
            for sgn in (1.0, -1.0):
                cand = x.copy()
                cand[i] = np.clip(cand[i] + sgn * step[i], lower[i], upper[i])
                if cand[i] == x[i]:
                    continue
                fc = fun(cand)
                n_evals += 1
                if fc < fx:
                    x, fx, improved = cand, fc, True
                    break
        if not improved:
            step = 0.5 * step
            if np.all(step < 1e-6 * span):
                trace.append(fx)
                break
        trace.append(fx)
    return PSOResult(x, float(fx), trace, n_evals)


def optimize_hyperparameters(
    design: DesignSet,
    cfg: PSOConfig | None = None,
    warm_start=None,
    nugget: float = NUGGET_START,
    return_trace: bool = False,
):
    """Minimize the reduced likelihood over log10-lengthscales in [-3, 2].

    Returns ``(theta_hat, model)``, plus the optimizer result when
    ``return_trace`` is set.
    """
    cfg = cfg or PSOConfig()
    lo = np.full(design.n, LOG10_BOUNDS[0])
    hi = np.full(design.n, LOG10_BOUNDS[1])

    def objective(logl):
        try:
            _, psi = fit_given_theta(design, 10.0**logl, nugget)
        except SingularCorrelation:
            return np.inf
        # psi can be exactly zero for constant data
        return np.log(psi) if psi > 0 else -np.inf

    x0 = None if warm_start is None else np.log10(np.asarray(warm_start, dtype=float))
    res = pso_minimize(objective, lo, hi, cfg, x0=x0)
    if not np.isfinite(res.fun) and res.fun > 0:
        raise SingularCorrelation("every particle failed to factorize the correlation matrix")
    theta = 10.0**res.x
    model, _ = fit_given_theta(design, theta, nugget)
    if return_trace:
        return theta, model, res
    return theta, model


# -- persistence ---------------------------------------------------------------


def model_to_json(model: KrigingModel) -> str:
    doc = {
        "format": JSON_FORMAT,
        "version": JSON_VERSION,
        "X": model.design.X.tolist(),
        "y": model.design.y.tolist(),
        "theta": model.theta.tolist(),
        "mu_hat": model.mu_hat,
        "sigma2_hat": model.sigma2_hat,
        "nugget": model.nugget,
    }
    return json.dumps(doc, indent=2)


def model_from_json(text: str) -> KrigingModel:
    doc = json.loads(text)
    if doc.get("format") != JSON_FORMAT:
        raise ValueError("not a serialized kriging model")
    if doc.get("version") != JSON_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')}")
    design = DesignSet(np.array(doc["X"]), np.array(doc["y"]))
    model, _ = fit_given_theta(design, np.array(doc["theta"]), float(doc["nugget"]))
    return model
