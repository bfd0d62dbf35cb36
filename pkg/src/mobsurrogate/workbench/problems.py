"""Registry of the benchmark problems P0 to P5."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from ..dynamics import IntegratorConfig, State, SystemParams
from ..indicators import LLEConfig, StickingConfig, classify_lle, mob_lle, sticking_time
from ..sampling import Domain

__all__ = ["ProblemSpec", "PROBLEMS", "get_problem", "QOIS", "Evaluator", "PARAM_UNITS",
           "QOI_UNITS"]

QOIS = ("sticking_time", "lle", "lle_class")
QOI_UNITS = {"sticking_time": "s", "lle": "1/s", "lle_class": "1/s"}
PARAM_UNITS = {
    "M": "kg", "V0": "m/s", "D": "N*s/m", "K1": "N/m^3", "K2": "N/m", "mu_s": "1",
    "mu_k": "1", "Vs": "m/s", "U0": "N", "N0": "N", "Omega": "rad/s", "sigma0": "N/m",
    "sigma1": "N*s/m", "sigma2": "N*s/m", "z_ba": "m", "z_max": "m",
}


@dataclass(frozen=True)
class ProblemSpec:
    """A benchmark: free parameters with physical bounds over a fixed oscillator.

    ``desk_resolution`` and ``paper_resolution`` give points per dimension
    of the regular reference grid. ``initial_design`` (physical units)
    replaces the TPLHD start when set.
    """

    name: str
    free: tuple[tuple[str, float, float], ...]
    fixed: SystemParams
    qoi: str
    desk_resolution: tuple[int, ...]
    paper_resolution: tuple[int, ...]
    n_init: int
    budget: int
    initial_design: tuple[tuple[float, ...], ...] | None = None
    notes: str = ""

    def __post_init__(self):
        names = [f[0] for f in self.free]
        if len(set(names)) != len(names):
            raise ValueError("free dimension names must be distinct")
        allowed = SystemParams.field_names()
        for nm, lo, hi in self.free:
            if nm not in allowed:
                raise ValueError(f"{nm!r} is not a SystemParams field")
            if not hi > lo:
                raise ValueError(f"bad bounds for {nm}")
        if self.qoi not in QOIS:
            raise ValueError(f"unknown qoi {self.qoi!r}")
        if len(self.desk_resolution) != len(self.free):
            raise ValueError("one desk resolution per free dimension")

    @property
    def dim(self) -> int:
        return len(self.free)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f[0] for f in self.free)

    @property
    def domain(self) -> Domain:
        return Domain(np.array([f[1] for f in self.free]), np.array([f[2] for f in self.free]),
                      self.names)

    @property
    def is_classification(self) -> bool:
        return self.qoi in ("lle", "lle_class")

    def params_at(self, x_phys) -> SystemParams:
        x_phys = np.atleast_1d(np.asarray(x_phys, dtype=float))
        return self.fixed.replace(**{nm: float(v) for nm, v in zip(self.names, x_phys)})

    def with_overrides(self, **fixed_changes) -> "ProblemSpec":
        return dataclasses.replace(self, fixed=self.fixed.replace(**fixed_changes))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "free": [list(f) for f in self.free],
            "fixed": self.fixed.to_dict(),
            "qoi": self.qoi,
            "desk_resolution": list(self.desk_resolution),
            "paper_resolution": list(self.paper_resolution),
            "n_init": self.n_init,
            "budget": self.budget,
            "initial_design": None if self.initial_design is None
            else [list(p) for p in self.initial_design],
        }


@dataclass(frozen=True)
class Evaluator:
    """Evaluates the QoI of a problem at a physical point."""

    spec: ProblemSpec
    init: State = field(default_factory=State)
    icfg: IntegratorConfig = field(default_factory=IntegratorConfig)
    stick: StickingConfig = field(default_factory=StickingConfig)
    lle: LLEConfig = field(default_factory=LLEConfig)

    def __call__(self, x_phys) -> float:
        p = self.spec.params_at(x_phys)
        if self.spec.qoi == "sticking_time":
            return sticking_time(p, self.init, self.stick, self.icfg)
        return mob_lle(p, self.init, self.lle, self.icfg)

    def label(self, value: float) -> int:
        return classify_lle(value)

    def to_dict(self) -> dict:
        return {
            "init": dataclasses.asdict(self.init),
            "integrator": dataclasses.asdict(self.icfg),
            "sticking": dataclasses.asdict(self.stick),
            "lle": dataclasses.asdict(self.lle),
        }


_BASE = SystemParams(M=1.0, V0=0.1, D=0.0, mu_s=0.3, mu_k=0.15, Vs=0.1, U0=0.1, N0=1.0,
                     sigma0=100.0, sigma1=10.0, sigma2=0.1, K1=1.0, K2=0.0, Omega=0.6)

PROBLEMS: dict[str, ProblemSpec] = {
    "P0": ProblemSpec(
        "P0", (("K1", 0.5, 1.0), ("K2", 0.0, 0.6)), _BASE.replace(Omega=0.6),
        "sticking_time", (60, 60), (5000, 5000), n_init=20, budget=60,
    ),
    "P1": ProblemSpec(
        "P1", (("Omega", 0.2, 1.0),), _BASE.replace(K1=1.0, K2=0.0),
        "lle_class", (500,), (5000,), n_init=5, budget=35,
        initial_design=((0.2,), (0.36,), (0.52,), (0.68,), (0.84,)),
    ),
    "P2": ProblemSpec(
        "P2", (("K1", 0.5, 1.0), ("K2", 0.0, 0.5)), _BASE.replace(Omega=0.6),
        "lle_class", (60, 60), (100, 100), n_init=10, budget=65,
    ),
    "P3": ProblemSpec(
        "P3", (("K2", 0.0, 0.5), ("mu_k", 0.08, 0.18)), _BASE.replace(Omega=0.6, K1=1.0),
        "lle_class", (60, 60), (100, 100), n_init=5, budget=105,
    ),
    "P4": ProblemSpec(
        "P4", (("K1", 0.5, 1.0), ("K2", 0.0, 0.6)), _BASE.replace(Omega=0.7),
        "lle_class", (60, 60), (100, 100), n_init=5, budget=115,
    ),
    "P5": ProblemSpec(
        "P5", (("Omega", 0.6, 0.9), ("K2", 0.0, 0.5), ("mu_k", 0.10, 0.15)),
        _BASE.replace(K1=1.0), "lle_class", (20, 20, 20), (25, 25, 24),
        n_init=5, budget=200,
    ),
}


def get_problem(name: str) -> ProblemSpec:
    try:
        return PROBLEMS[name.upper()]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
