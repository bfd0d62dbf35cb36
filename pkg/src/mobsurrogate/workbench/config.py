"""Study configuration files (YAML or JSON) and their resolution into objects.

A configuration is a mapping with the optional sections::

    problem: P0
    overrides: {Omega: 0.65}          # fixed SystemParams fields
    init: {t: 0, X: 0, Xdot: 0, z: 0}
    integrator: {rel_tol: 1.0e-8}
    sticking: {v_threshold: 1.0e-4}
    lle: {map_dt: 0.5}
    study: {scheme: mepe, budget: 60, n_init: 20, seeds: [0, 1, 2, 3, 4]}
    reference: {resolution: desk, layout: grid, cache_dir: null}

Missing entries take the library defaults and the problem registry values.
"""

from __future__ import annotations

import copy
import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from ..dynamics import IntegratorConfig, State
from ..indicators import LLEConfig, StickingConfig
from ..kriging import PSOConfig
from .problems import Evaluator, ProblemSpec, get_problem
from .study import StudyConfig

__all__ = ["ResolvedConfig", "load_config", "resolve_config", "deep_merge"]

SECTIONS = ("problem", "overrides", "init", "integrator", "sticking", "lle", "study",
            "reference")


def load_config(path) -> dict:
    text = Path(path).read_text()
    doc = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ValueError("configuration must be a mapping")
    unknown = set(doc) - set(SECTIONS)
    if unknown:
        raise ValueError(f"unknown configuration sections {sorted(unknown)}")
    return doc


def deep_merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        elif v is not None:
            out[k] = copy.deepcopy(v)
    return out


@dataclass(frozen=True)
class ResolvedConfig:
    spec: ProblemSpec
    evaluator: Evaluator
    study: StudyConfig
    reference: dict

    def to_dict(self) -> dict:
        return {
            "problem": self.spec.to_dict(),
            **self.evaluator.to_dict(),
            "study": self.study.to_dict(),
            "reference": dict(self.reference),
        }


def _build(cls, section: dict | None):
    section = section or {}
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - names
    if unknown:
        raise ValueError(f"unknown {cls.__name__} fields {sorted(unknown)}")
    return cls(**section)


def resolve_config(doc: dict) -> ResolvedConfig:
    spec = get_problem(doc.get("problem", "P0"))
    if doc.get("overrides"):
        spec = spec.with_overrides(**doc["overrides"])
    evaluator = Evaluator(
        spec,
        _build(State, doc.get("init")),
        _build(IntegratorConfig, doc.get("integrator")),
        _build(StickingConfig, doc.get("sticking")),
        _build(LLEConfig, doc.get("lle")),
    )
    st = dict(doc.get("study") or {})
    st.setdefault("scheme", "mivor" if spec.is_classification else "mepe")
    st.setdefault("n_init", spec.n_init)
    st.setdefault("budget", spec.budget)
    if "pso" in st:
        st["pso"] = _build(PSOConfig, st["pso"])
    if "seeds" in st:
        st["seeds"] = tuple(st["seeds"])
    study = _build(StudyConfig, st)
    ref = {"resolution": "desk", "layout": "grid", "cache_dir": None}
    ref.update(doc.get("reference") or {})
    return ResolvedConfig(spec, evaluator, study, ref)
