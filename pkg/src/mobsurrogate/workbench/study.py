"""Adaptive-sampling studies over seeded realizations."""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..exceptions import MobError
from ..indicators import classify_lle
from ..kriging import DesignSet, PSOConfig, fit_given_theta, optimize_hyperparameters, predict
from ..metrics import ReferenceSurface, class_accuracies, regression_metrics
from ..sampling import (
    MepeState,
    MivorState,
    _nearest,
    candidate_pool,
    denormalize,
    eigf_next,
    mepe_next,
    mepe_update,
    mivor_next,
    mivor_update,
    normalize,
    tplhd,
)
from .problems import Evaluator, ProblemSpec

__all__ = ["StudyConfig", "StepRecord", "RunRecord", "run_adaptive_study", "run_realization",
           "SCHEMES"]

log = logging.getLogger(__name__)

SCHEMES = ("tplhd", "mepe", "eigf", "mivor")


@dataclass(frozen=True)
class StudyConfig:
    """Settings of one adaptive study.

    ``budget`` counts all samples including the ``n_init`` initial ones.
    Lengthscales are re-optimized after every addition while the design
    has at most ``refit_full_until`` points, and every ``refit_every``
    additions beyond; in between the incumbent lengthscales are reused.
    """

    scheme: str
    budget: int
    n_init: int
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    pool_size: int | None = None
    pso: PSOConfig = field(default_factory=PSOConfig)
    refit_full_until: int = 100
    refit_every: int = 5
    exploration_rate: float = 0.4
    decrease_factor: float = 1.1
    use_initial_design: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.n_init < 1:
            raise ValueError("n_init must be at least 1")
        if self.budget < self.n_init:
            raise ValueError("budget must be at least n_init")
        if self.refit_every < 1:
            raise ValueError("refit_every must be at least 1")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def replace(self, **changes) -> "StudyConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["seeds"] = list(self.seeds)
        return d


@dataclass
class StepRecord:
    """State after ``step`` adaptive additions (step 0 is the initial design)."""

    step: int
    n_samples: int
    metrics: dict
    theta: list[float] | None = None
    point: list[float] | None = None
    value: float | None = None
    info: dict = field(default_factory=dict)


@dataclass
class RunRecord:
    """One realization: normalized design ``X``, responses ``y`` and per-step records."""

    problem: str
    scheme: str
    seed: int
    X: np.ndarray
    y: np.ndarray
    steps: list[StepRecord]
    n_init: int
    status: str = "ok"
    error: str | None = None
    wall_clock: float = 0.0

    def design_at(self, step: int) -> np.ndarray:
        """Normalized design snapshot after ``step`` additions."""
        n = self.steps[0].n_samples + step if self.scheme != "tplhd" else self.X.shape[0]
        return self.X[:n]

    @property
    def labels(self) -> np.ndarray:
        return np.array([classify_lle(v) for v in self.y], dtype=int)

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "problem": self.problem,
            "scheme": self.scheme,
            "seed": self.seed,
            "n_init": self.n_init,
            "status": self.status,
            "error": self.error,
            "X": self.X.tolist(),
            "y": self.y.tolist(),
            "steps": [_clean(dataclasses.asdict(s)) for s in self.steps],
        }
        if include_timing:
            d["wall_clock"] = self.wall_clock
        return d

    def to_json(self, include_timing: bool = False) -> str:
        """Canonical serialization. Timing is left out unless requested so
        that reruns compare byte for byte."""
        return json.dumps(self.to_dict(include_timing), sort_keys=True, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        steps = [StepRecord(**{k: (_restore(v) if k == "metrics" else v) for k, v in s.items()})
                 for s in d["steps"]]
        X = np.array(d["X"], dtype=float)
        return cls(d["problem"], d["scheme"], int(d["seed"]),
                   X.reshape(len(d["y"]), -1) if X.size else X.reshape(0, 0),
                   np.array(d["y"], dtype=float), steps, int(d["n_init"]),
                   d.get("status", "ok"), d.get("error"), float(d.get("wall_clock", 0.0)))


def _clean(obj):
    # NaN is not valid JSON; undefined values are stored as null
    if isinstance(obj, float):
        return None if math.isnan(obj) else obj
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _restore(metrics: dict) -> dict:
    return {k: (math.nan if v is None else v) for k, v in metrics.items()}


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


class _Memo:
    """Caches QoI values by exact normalized location."""

    def __init__(self, spec: ProblemSpec, evaluator: Callable):
        self.spec = spec
        self.evaluator = evaluator
        self.values: dict[bytes, float] = {}

    def __call__(self, u: np.ndarray) -> float:
        key = np.asarray(u, dtype=float).tobytes()
        if key not in self.values:
            self.values[key] = float(self.evaluator(denormalize(u, self.spec.domain)))
        return self.values[key]


def _score(spec: ProblemSpec, model, U_ref: np.ndarray | None, ref: ReferenceSurface | None):
    if model is None or ref is None:
        return {}
    mean, _ = predict(model, U_ref)
    if spec.is_classification:
        a_pos, a_neg = class_accuracies(ref.labels, (mean >= 0).astype(int))
        return {"a_pos": a_pos, "a_neg": a_neg}
    return regression_metrics(ref.y_ref, mean)


def _fit(design: DesignSet, cfg: StudyConfig, seed: int, step: int, theta, last_full: int):
    """Returns (model, theta, last_full) following the refit cadence."""
    m = design.m
    if m < 2:
        return None, None, last_full
    full = theta is None or m <= cfg.refit_full_until or m - last_full >= cfg.refit_every
    if full:
        pso = dataclasses.replace(cfg.pso, seed=_derived_seed(seed, step, 1))
        theta, model = optimize_hyperparameters(design, pso, warm_start=theta)
        return model, theta, m
    model, _ = fit_given_theta(design, theta)
    return model, theta, last_full


def initial_design(spec: ProblemSpec, cfg: StudyConfig) -> np.ndarray:
    if cfg.scheme == "tplhd":
        return tplhd(cfg.budget, spec.dim)
    if (cfg.use_initial_design and spec.initial_design is not None
            and len(spec.initial_design) == cfg.n_init):
        return normalize(np.array(spec.initial_design, dtype=float), spec.domain)
    return tplhd(cfg.n_init, spec.dim)


def run_realization(
    spec: ProblemSpec,
    cfg: StudyConfig,
    seed: int,
    reference: ReferenceSurface | None = None,
    evaluator: Callable | None = None,
) -> RunRecord:
    """One seeded adaptive run. Failures are captured in the record."""
    memo = evaluator if isinstance(evaluator, _Memo) else _Memo(spec, evaluator or Evaluator(spec))
    U_ref = None if reference is None else normalize(reference.x_ref, spec.domain)
    t_start = time.perf_counter()
    X = initial_design(spec, cfg)
    y = np.empty(0)
    steps: list[StepRecord] = []
    rec = RunRecord(spec.name, cfg.scheme, int(seed), X, y, steps, X.shape[0])
    try:
        y = np.array([memo(u) for u in X])
        rec.y = y
        design = DesignSet(X, y)
        model, theta, last_full = _fit(design, cfg, seed, 0, None, 0)
        steps.append(StepRecord(0, design.m, _score(spec, model, U_ref, reference),
                                None if theta is None else theta.tolist()))
        mepe = MepeState()
        mivor = MivorState(cfg.exploration_rate, cfg.exploration_rate, cfg.decrease_factor,
                           seed=int(seed))
        n_add = 0 if cfg.scheme == "tplhd" else cfg.budget - X.shape[0]
        for step in range(1, n_add + 1):
            pool = candidate_pool(spec.dim, [int(seed), step], cfg.pool_size)
            info: dict = {}
            if model is None:
                dmin, _ = _nearest(X, pool)
                u = pool[int(np.argmax(dmin))].copy()
                info["rule"] = "maximin"
            elif cfg.scheme == "mepe":
                u, mepe = mepe_next(model, X, mepe, pool)
                info["alpha"] = mepe.alpha
            elif cfg.scheme == "eigf":
                u = eigf_next(model, X, pool)
            else:
                u, mivor = mivor_next(model, X, (y >= 0).astype(int), mivor, pool)
                info["branch"] = mivor.last_branch
                info["exploration_rate"] = mivor.exploration_rate
            value = memo(u)
            if mepe.pending:
                mepe = mepe_update(mepe, value)
            if mivor.pending:
                mivor = mivor_update(mivor, classify_lle(value))
            X = np.vstack([X, u])
            y = np.append(y, value)
            rec.X, rec.y = X, y
            design = DesignSet(X, y)
            model, theta, last_full = _fit(design, cfg, seed, step, theta, last_full)
            steps.append(StepRecord(step, design.m, _score(spec, model, U_ref, reference),
                                    None if theta is None else theta.tolist(),
                                    u.tolist(), float(value), info))
    except (MobError, ValueError, np.linalg.LinAlgError) as exc:
        rec.status = "failed"
        rec.error = f"{type(exc).__name__}: {exc}"
        log.warning("%s/%s seed %s failed: %s", spec.name, cfg.scheme, seed, rec.error)
    rec.wall_clock = time.perf_counter() - t_start
    return rec


def run_adaptive_study(
    spec: ProblemSpec,
    cfg: StudyConfig,
    reference: ReferenceSurface | None = None,
    evaluator: Callable | None = None,
    seeds: Sequence[int] | None = None,
) -> list[RunRecord]:
    """Run ``cfg`` for every seed; QoI evaluations are shared between seeds."""
    memo = _Memo(spec, evaluator or Evaluator(spec))
    seeds = cfg.seeds if seeds is None else tuple(seeds)
    return [run_realization(spec, cfg, s, reference, memo) for s in seeds]
