"""Mass-on-belt oscillator with an elasto-plastic friction law.

The oscillator is a Duffing-type mass driven by a moving belt through a
bristle friction model (elastic deflection ``z``, Stribeck-shaped breakaway
force and a half-sine stiction switch). The equations of motion are
integrated with an adaptive Runge-Kutta-Fehlberg 4(5) pair propagating the
fifth-order solution.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from numba.core.registry import CPUDispatcher

from . import _rkf45 as _k
from .exceptions import NonFiniteState, StepUnderflow

__all__ = [
    "SystemParams",
    "State",
    "IntegratorConfig",
    "Trajectory",
    "stribeck_g",
    "stiction_alpha",
    "bristle_rate",
    "friction_per_load",
    "rhs",
    "integrate",
    "integrate_system",
    "step_map",
]


@dataclass(frozen=True)
class SystemParams:
    """Physical and friction constants of the oscillator.

    Defaults are the shared constants of the benchmark problems with
    ``K1 = 1``, ``K2 = 0`` and ``Omega = 0.6``. When ``z_max`` is left as
    ``None`` it is taken as the deflection where the bristle force reaches
    the static breakaway force, ``N0 * mu_s / sigma0``; ``z_ba`` defaults to
    70 % of that.
    """

    M: float = 1.0
    V0: float = 0.1
    D: float = 0.0
    K1: float = 1.0
    K2: float = 0.0
    mu_s: float = 0.3
    mu_k: float = 0.15
    Vs: float = 0.1
    U0: float = 0.1
    N0: float = 1.0
    Omega: float = 0.6
    sigma0: float = 100.0
    sigma1: float = 10.0
    sigma2: float = 0.1
    z_ba: float | None = None
    z_max: float | None = None

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")
        if not self.N0 >= 0:
            raise ValueError("N0 must be non-negative")
        if not self.Vs > 0:
            raise ValueError("Vs must be positive")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if not 0 < self.mu_k <= self.mu_s:
            raise ValueError("need 0 < mu_k <= mu_s")
        zba, zmax = self.bristle_limits()
        if self.N0 > 0 and not 0 <= zba < zmax:
            raise ValueError("need 0 <= z_ba < z_max")

    def bristle_limits(self) -> tuple[float, float]:
        """Effective ``(z_ba, z_max)`` after applying the defaults."""
        zmax = self.z_max if self.z_max is not None else self.N0 * self.mu_s / self.sigma0
        zba = self.z_ba if self.z_ba is not None else 0.7 * zmax
        return float(zba), float(zmax)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def as_array(self) -> np.ndarray:
        zba, zmax = self.bristle_limits()
        return np.array(
            [
                self.M, self.V0, self.D, self.K1, self.K2, self.mu_s, self.mu_k,
                self.Vs, self.U0, self.N0, self.Omega, self.sigma0, self.sigma1,
                self.sigma2, zba, zmax,
            ],
            dtype=float,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))


@dataclass(frozen=True)
class State:
    t: float = 0.0
    X: float = 0.0
    Xdot: float = 0.0
    z: float = 0.0

    def vector(self) -> np.ndarray:
        return np.array([self.X, self.Xdot, self.z], dtype=float)


@dataclass(frozen=True)
class IntegratorConfig:
    """Step-size control and output sampling for the RKF45 integrator."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-8
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 0.1
    record_dt: float = 0.01

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.h_min <= self.h_init <= self.h_max:
            raise ValueError("need 0 < h_min <= h_init <= h_max")
        if not self.record_dt > 0:
            raise ValueError("record_dt must be positive")

    def replace(self, **changes) -> "IntegratorConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution. ``y`` has one row per sample time in ``t``."""

    t: np.ndarray
    y: np.ndarray
    n_steps: int = 0
    n_rejected: int = 0
    labels: tuple[str, ...] = field(default=("X", "Xdot", "z"))

    def __post_init__(self):
        self.t.setflags(write=False)
        self.y.setflags(write=False)

    def __len__(self):
        return len(self.t)

    @property
    def X(self) -> np.ndarray:
        return self.y[:, 0]

    @property
    def Xdot(self) -> np.ndarray:
        return self.y[:, 1]

    @property
    def z(self) -> np.ndarray:
        return self.y[:, 2]

    def relative_velocity(self, V0: float) -> np.ndarray:
        return V0 - self.y[:, 1]

    def state(self, i: int) -> State:
        return State(float(self.t[i]), *map(float, self.y[i, :3]))


# -- friction law --------------------------------------------------------------


def _scalar_or_vector(kernel, *args):
    if all(np.ndim(a) == 0 for a in args):
        return float(kernel(*map(float, args)))
    return np.vectorize(kernel, otypes=[float])(*args)


def stribeck_g(v_r, p: SystemParams):
    """Breakaway force ``N0 * (mu_k + (mu_s - mu_k) * exp(-(v_r / Vs)**2))``."""
    v_r = np.asarray(v_r, dtype=float)
    out = p.N0 * (p.mu_k + (p.mu_s - p.mu_k) * np.exp(-(v_r**2) / p.Vs**2))
    return float(out) if out.ndim == 0 else out


def stiction_alpha(z, v_r, p: SystemParams):
    """Stiction switch in ``[0, 1]``; zero when ``v_r * z < 0``."""
    zba, zmax = p.bristle_limits()
    return _scalar_or_vector(lambda zz, vv: _k.alpha_z(zz, vv, zba, zmax), z, v_r)


def bristle_rate(z, v_r, p: SystemParams):
    """Bristle deflection rate ``(1 - alpha * sigma0 / g * z * sgn(v_r)) * v_r``."""
    arr = p.as_array()
    return _scalar_or_vector(lambda zz, vv: _k.bristle(zz, vv, arr), z, v_r)


def friction_per_load(z, z_dot, v_r, p: SystemParams):
    """Friction force per unit normal load. The force itself is ``N0`` times this."""
    return p.sigma0 * np.asarray(z) + p.sigma1 * np.asarray(z_dot) + p.sigma2 * np.asarray(v_r)


def rhs(t: float, s, p: SystemParams) -> np.ndarray:
    """Time derivative ``(dX/dt, d2X/dt2, dz/dt)`` at time ``t``.

    ``s`` may be a :class:`State` (its ``t`` is ignored) or a 3-vector.
    """
    y = s.vector() if isinstance(s, State) else np.asarray(s, dtype=float)
    return _k.mob_rhs(float(t), y, p.as_array())


# -- integration ---------------------------------------------------------------


def _record_times(t0: float, t_end: float, dt: float) -> np.ndarray:
    span = t_end - t0
    n = int(np.floor(span / dt + 1e-9))
    t_rec = t0 + dt * np.arange(n + 1)
    if t_end - t_rec[-1] > 1e-12 * max(1.0, abs(t_end)):
        t_rec = np.append(t_rec, t_end)
    else:
        t_rec[-1] = t_end
    return t_rec


def _run(rhs_fn, params, t0, y0, t_rec, cfg: IntegratorConfig):
    kernel = _k.rkf45 if isinstance(rhs_fn, CPUDispatcher) else _k.rkf45.py_func
    y_rec, n_acc, n_rej, status, t_fail = kernel(
        rhs_fn, np.ascontiguousarray(params, dtype=float), float(t0),
        np.array(y0, dtype=float), t_rec,
        cfg.rel_tol, cfg.abs_tol, cfg.h_init, cfg.h_min, cfg.h_max,
    )
    if status == _k.STATUS_UNDERFLOW:
        raise StepUnderflow(f"step size fell below h_min={cfg.h_min:g} at t={t_fail:.6g}")
    if status == _k.STATUS_NONFINITE:
        raise NonFiniteState(f"non-finite state at t={t_fail:.6g}")
    return y_rec, int(n_acc), int(n_rej)


def integrate_system(
    rhs_fn, params, t0: float, y0, t_end: float, cfg: IntegratorConfig | None = None,
    t_rec: np.ndarray | None = None,
) -> Trajectory:
    """Integrate any right-hand side ``rhs_fn(t, y, params) -> dy``.

    Compiled (numba) right-hand sides run in the compiled kernel; plain
    Python callables run through the same algorithm interpreted.
    """
    cfg = cfg or IntegratorConfig()
    y0 = np.array(y0, dtype=float)
    if t_rec is None:
        if t_end < t0:
            raise ValueError("t_end must not precede t0")
        if t_end == t0:
            return Trajectory(np.array([t0], dtype=float), y0[None, :].copy(),
                              labels=tuple(f"y{i}" for i in range(len(y0))))
        t_rec = _record_times(t0, t_end, cfg.record_dt)
    y_rec, n_acc, n_rej = _run(rhs_fn, params, t0, y0, np.asarray(t_rec, dtype=float), cfg)
    return Trajectory(np.asarray(t_rec, dtype=float), y_rec, n_acc, n_rej,
                      labels=tuple(f"y{i}" for i in range(len(y0))))


def integrate(p: SystemParams, init: State, t_end: float,
              cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate the oscillator from ``init`` to ``t_end``, sampled every ``cfg.record_dt``."""
    traj = integrate_system(_k.mob_rhs, p.as_array(), init.t, init.vector(), t_end, cfg)
    return dataclasses.replace(traj, labels=("X", "Xdot", "z"))


def step_map(p: SystemParams, x, t0: float, dt: float,
             cfg: IntegratorConfig | None = None) -> np.ndarray:
    """State after integrating the oscillator from ``(t0, x)`` for ``dt`` seconds."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    y_rec, _, _ = _run(_k.mob_rhs, p.as_array(), t0, x, np.array([t0, t0 + dt]),
                       cfg or IntegratorConfig())
    return y_rec[-1].copy()
