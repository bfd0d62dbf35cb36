"""Scalar indicators of the oscillator response.

* sticking time inside an observation window,
* Lyapunov exponents from tangent-space propagation with Gram-Schmidt
  renormalization, the Jacobian of the sampled map coming either from the
  variational equations or from central differences of perturbed runs,
* the binary instability classifier on the largest exponent,
* peak sets for bifurcation diagrams.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _rkf45 as _k
from .dynamics import (
    IntegratorConfig,
    State,
    SystemParams,
    Trajectory,
    integrate_system,
    _run,
)
from .exceptions import DegenerateFrame, NonFiniteState

__all__ = [
    "StickingConfig",
    "LLEConfig",
    "LyapunovResult",
    "AutonomousSystem",
    "sticking_time",
    "time_below_threshold",
    "numerical_jacobian",
    "lyapunov_spectrum",
    "classify_lle",
    "mob_lle",
    "bifurcation_scan",
    "system_bifurcation_scan",
    "find_peaks",
    "trajectory_peaks",
    "molaie_system",
    "linear_system",
    "mob_system",
    "MOLAIE_X0",
    "MOLAIE_LLE",
]

#: A point on the large chaotic/periodic attractor of the Molaie flow; the
#: origin is a stable equilibrium and attracts small initial conditions.
MOLAIE_X0 = (7.09895125, 2.19404422, -0.89269077)


@dataclass(frozen=True)
class StickingConfig:
    v_threshold: float = 1e-4
    window_start: float = 150.0
    window_end: float = 250.0

    def __post_init__(self):
        if not self.window_end > self.window_start >= 0:
            raise ValueError("need window_end > window_start >= 0")
        if not self.v_threshold > 0:
            raise ValueError("v_threshold must be positive")


@dataclass(frozen=True)
class LLEConfig:
    """Settings of the Lyapunov estimator.

    ``delta`` is the perturbation magnitude applied per state component,
    ``map_dt`` the sampling interval of the discrete map, ``transient`` the
    time discarded before accumulating and ``horizon`` the accumulation time.
    """

    delta: float = 1e-4
    map_dt: float = 0.5
    transient: float = 150.0
    horizon: float = 350.0
    renorm_every: int = 1

    def __post_init__(self):
        if not np.all(np.asarray(self.delta) > 0):
            raise ValueError("delta must be positive")
        if not self.map_dt > 0 or not self.horizon > 0:
            raise ValueError("map_dt and horizon must be positive")
        if self.transient < 0 or self.renorm_every < 1:
            raise ValueError("invalid transient or renorm_every")

    def replace(self, **changes) -> "LLEConfig":
        return dataclasses.replace(self, **changes)


#: Settings used to verify the estimator on the Molaie flow.
MOLAIE_LLE = LLEConfig(delta=1e-4, map_dt=0.05, transient=100.0, horizon=400.0)


@dataclass(frozen=True)
class LyapunovResult:
    spectrum: np.ndarray
    lle: float
    steps_used: int


@dataclass(frozen=True)
class AutonomousSystem:
    """A flow ``dy/dt = rhs(t, y, params)`` with optional tangent dynamics.

    ``rhs`` ignores ``t`` for truly autonomous flows; forced systems keep
    the absolute time as a known phase. ``jacobian(y, params)`` returns the
    state Jacobian, and ``variational_rhs`` (if given) integrates the state
    together with its row-major fundamental matrix.
    """

    dimension: int
    rhs: Callable
    params: np.ndarray
    jacobian: Callable | None = None
    variational_rhs: Callable | None = None
    name: str = ""

    def f(self, y, t: float = 0.0) -> np.ndarray:
        return np.asarray(self.rhs(float(t), np.asarray(y, dtype=float), self.params))

    def tangent_rhs(self) -> Callable:
        if self.variational_rhs is not None:
            return self.variational_rhs
        if self.jacobian is None:
            raise ValueError(f"system {self.name!r} has no analytic Jacobian")
        n, f, jac = self.dimension, self.rhs, self.jacobian

        def var(t, y, p):
            out = np.empty(n + n * n)
            out[:n] = f(t, y[:n], p)
            out[n:] = (jac(y[:n], p) @ y[n:].reshape(n, n)).ravel()
            return out

        return var


def molaie_system(a: float) -> AutonomousSystem:
    """Three-dimensional jerk flow with one stable equilibrium."""
    return AutonomousSystem(
        3, _k.molaie_rhs, np.array([float(a)]), _k.molaie_jac,
        _k.molaie_variational_rhs, name=f"molaie(a={a})",
    )


def linear_system(A) -> AutonomousSystem:
    """Constant-coefficient linear flow ``dx/dt = A x``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    return AutonomousSystem(
        n, _k.linear_rhs, A.ravel().copy(), lambda y, p: p.reshape(n, n),
        _k.linear_variational_rhs, name="linear",
    )


def mob_system(p: SystemParams) -> AutonomousSystem:
    """The forced mass-on-belt oscillator; no analytic Jacobian exists."""
    return AutonomousSystem(3, _k.mob_rhs, p.as_array(), name="mass-on-belt")


# -- sticking time -------------------------------------------------------------


def time_below_threshold(t: np.ndarray, v: np.ndarray, threshold: float) -> float:
    """Measure of ``{t : |v(t)| < threshold}`` for piecewise-linear ``v``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    a, b = v[:-1], v[1:]
    dt = np.diff(t)
    slope = b - a
    flat = slope == 0.0
    safe = np.where(flat, 1.0, slope)
    s1 = (-threshold - a) / safe
    s2 = (threshold - a) / safe
    lo = np.clip(np.minimum(s1, s2), 0.0, 1.0)
    hi = np.clip(np.maximum(s1, s2), 0.0, 1.0)
    frac = np.where(flat, (np.abs(a) < threshold).astype(float), np.maximum(hi - lo, 0.0))
    return float(np.sum(frac * dt))


def sticking_time(
    p: SystemParams,
    init: State | None = None,
    cfg: StickingConfig | None = None,
    icfg: IntegratorConfig | None = None,
) -> float:
    """Cumulative time in the window where ``|V0 - Xdot| < v_threshold``."""
    init = init or State()
    cfg = cfg or StickingConfig()
    icfg = icfg or IntegratorConfig()
    ws = max(cfg.window_start, init.t)
    grid = np.arange(ws, cfg.window_end, icfg.record_dt)
    t_rec = np.concatenate([[init.t] if init.t < ws else [], grid, [cfg.window_end]])
    traj = integrate_system(_k.mob_rhs, p.as_array(), init.t, init.vector(),
                            cfg.window_end, icfg, t_rec=t_rec)
    mask = traj.t >= ws
    measure = time_below_threshold(traj.t[mask], p.V0 - traj.y[mask, 1], cfg.v_threshold)
    return float(min(max(measure, 0.0), cfg.window_end - cfg.window_start))


# -- Lyapunov exponents --------------------------------------------------------


def numerical_jacobian(G: Callable, x, delta) -> np.ndarray:
    """Central-difference Jacobian of the map ``G`` at ``x``.

    ``delta`` is a scalar or one step per component.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    d = np.broadcast_to(np.asarray(delta, dtype=float), (n,))
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = d[j]
        col = (np.asarray(G(x + e)) - np.asarray(G(x - e))) / (2.0 * d[j])
        if not np.all(np.isfinite(col)):
            raise NonFiniteState(f"non-finite Jacobian column {j}")
        J[:, j] = col
    return J


def _gram_schmidt(V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Modified Gram-Schmidt. Returns the orthonormal frame and column norms."""
    Q = np.array(V, dtype=float)
    n = Q.shape[1]
    norms = np.empty(n)
    for j in range(n):
        for i in range(j):
            Q[:, j] -= (Q[:, i] @ Q[:, j]) * Q[:, i]
        nrm = np.sqrt(Q[:, j] @ Q[:, j])
        if not nrm > 1e-300:
            raise DegenerateFrame(f"tangent vector {j} collapsed (norm {nrm:.3g})")
        Q[:, j] /= nrm
        norms[j] = nrm
    return Q, norms


def lyapunov_spectrum(
    sys: AutonomousSystem,
    x0,
    cfg: LLEConfig | None = None,
    mode: str = "perturbation",
    icfg: IntegratorConfig | None = None,
    t0: float = 0.0,
) -> LyapunovResult:
    """Lyapunov spectrum in 1/s along the orbit started at ``(t0, x0)``.

    The base orbit advances by the sampled map in both modes, so the two
    modes differ only in how the map Jacobian is obtained.
    """
    cfg = cfg or LLEConfig()
    icfg = icfg or IntegratorConfig()
    if mode not in ("analytic", "perturbation"):
        raise ValueError(f"unknown mode {mode!r}")
    tangent = sys.tangent_rhs() if mode == "analytic" else None
    n = sys.dimension
    dt = cfg.map_dt

    def G(x, t):
        y, _, _ = _run(sys.rhs, sys.params, t, x, np.array([t, t + dt]), icfg)
        return y[-1]

    x = np.array(x0, dtype=float)
    t = float(t0)
    if cfg.transient > 0:
        y, _, _ = _run(sys.rhs, sys.params, t, x, np.array([t, t + cfg.transient]), icfg)
        x = y[-1].copy()
        t += cfg.transient

    steps = int(round(cfg.horizon / dt))
    eye = np.eye(n)
    frame = eye.copy()
    logs = np.zeros(n)
    for k in range(steps):
        if tangent is None:
            J = numerical_jacobian(lambda xx: G(xx, t), x, cfg.delta)
        else:
            aug = np.concatenate([x, eye.ravel()])
            ya, _, _ = _run(tangent, sys.params, t, aug, np.array([t, t + dt]), icfg)
            J = ya[-1, n:].reshape(n, n)
        frame = J @ frame
        x = G(x, t)
        t += dt
        if (k + 1) % cfg.renorm_every == 0 or k == steps - 1:
            frame, norms = _gram_schmidt(frame)
            logs += np.log(norms)
    spectrum = np.sort(logs / (steps * dt))[::-1]
    return LyapunovResult(spectrum, float(spectrum[0]), steps)


def classify_lle(lle: float) -> int:
    """Instability indicator: 1 when the largest exponent is non-negative."""
    if not np.isfinite(lle):
        raise ValueError("lle must be finite")
    return 1 if lle >= 0 else 0


def mob_lle(
    p: SystemParams,
    init: State | None = None,
    cfg: LLEConfig | None = None,
    icfg: IntegratorConfig | None = None,
) -> float:
    """Largest Lyapunov exponent of the oscillator (perturbation estimate)."""
    init = init or State()
    res = lyapunov_spectrum(mob_system(p), init.vector(), cfg, "perturbation", icfg, init.t)
    return res.lle


# -- bifurcation data ----------------------------------------------------------


def find_peaks(t, x, v, resolution: float = 1e-6) -> np.ndarray:
    """Local maxima of ``x`` where its rate ``v`` changes sign from + to -.

    Each maximum is refined with a parabola through three samples and the
    set is deduplicated at ``resolution``.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    idx = np.nonzero((v[:-1] > 0) & (v[1:] <= 0))[0]
    peaks = []
    for i in idx:
        j = i if x[i] >= x[i + 1] else i + 1
        if j == 0 or j == len(x) - 1:
            peaks.append(x[j])
            continue
        h0, h1 = t[j] - t[j - 1], t[j + 1] - t[j]
        if abs(h0 - h1) > 1e-9 * max(h0, h1):
            peaks.append(x[j])
            continue
        ym, y0, yp = x[j - 1], x[j], x[j + 1]
        curv = ym - 2.0 * y0 + yp
        if curv >= 0:
            peaks.append(y0)
            continue
        peaks.append(y0 - 0.125 * (yp - ym) ** 2 / curv)
    if not peaks:
        return np.empty(0)
    return np.unique(np.round(np.asarray(peaks) / resolution)) * resolution


def system_bifurcation_scan(
    factory: Callable[[float], AutonomousSystem],
    grid: Sequence[float],
    x0,
    window: tuple[float, float],
    icfg: IntegratorConfig | None = None,
    t0: float = 0.0,
) -> list[tuple[float, np.ndarray]]:
    """Peak sets of the first state component over a parameter grid.

    The second component must be the time derivative of the first.
    """
    icfg = icfg or IntegratorConfig()
    if len(grid) == 0:
        raise ValueError("empty sweep grid")
    w0, w1 = window
    if not t0 <= w0 < w1:
        raise ValueError("window must lie after the start time")
    out = []
    for value in grid:
        sys = factory(float(value))
        t_rec = np.concatenate([[t0], np.arange(w0, w1, icfg.record_dt), [w1]])
        if t_rec[1] == t0:
            t_rec = t_rec[1:]
        traj = integrate_system(sys.rhs, sys.params, t0, x0, w1, icfg, t_rec=t_rec)
        mask = traj.t >= w0
        out.append((float(value), find_peaks(traj.t[mask], traj.y[mask, 0], traj.y[mask, 1])))
    return out


def bifurcation_scan(
    p: SystemParams,
    name: str,
    grid: Sequence[float],
    window: tuple[float, float] = (150.0, 250.0),
    icfg: IntegratorConfig | None = None,
    init: State | None = None,
) -> list[tuple[float, np.ndarray]]:
    """Steady-state displacement peaks while sweeping one oscillator parameter."""
    if name not in SystemParams.field_names():
        raise ValueError(f"unknown parameter {name!r}")
    init = init or State()
    return system_bifurcation_scan(
        lambda v: mob_system(p.replace(**{name: v})), grid, init.vector(), window, icfg, init.t
    )


def trajectory_peaks(traj: Trajectory, start: float = 0.0) -> np.ndarray:
    mask = traj.t >= start
    return find_peaks(traj.t[mask], traj.y[mask, 0], traj.y[mask, 1])
