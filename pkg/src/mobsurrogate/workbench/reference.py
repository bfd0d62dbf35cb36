"""Reference response surfaces on dense point sets, cached on disk.

A surface is keyed by a SHA-256 of the canonical JSON of the problem, the
point layout and resolution, and the full evaluator configuration. Partial
progress is checkpointed so an interrupted build resumes where it stopped.
Writes go through a temporary file and an atomic rename, so concurrent
readers never see a torn file.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

from ..indicators import classify_lle
from ..metrics import ReferenceSurface
from ..sampling import denormalize, tplhd
from .problems import Evaluator, ProblemSpec

__all__ = ["reference_points", "reference_grid", "cache_key", "default_cache_dir"]

log = logging.getLogger(__name__)

CACHE_VERSION = 1
CHECKPOINT_EVERY = 100


def default_cache_dir() -> Path:
    return Path.home() / ".cache" / "mobsurrogate"


def _resolve_resolution(spec: ProblemSpec, resolution) -> tuple[int, ...]:
    if resolution is None or resolution == "desk":
        res = spec.desk_resolution
    elif resolution == "paper":
        res = spec.paper_resolution
    elif np.ndim(resolution) == 0:
        res = (int(resolution),) * spec.dim
    else:
        res = tuple(int(r) for r in resolution)
    if len(res) != spec.dim:
        raise ValueError(f"need {spec.dim} resolutions, got {len(res)}")
    if min(res) < 2:
        raise ValueError("resolution must be at least 2 per dimension")
    return tuple(res)


def reference_points(spec: ProblemSpec, resolution=None, layout: str = "grid") -> np.ndarray:
    """Normalized reference locations.

    ``grid`` takes bin centres ``(i + 0.5) / r`` per dimension (first
    dimension varying slowest); ``tplhd`` places ``prod(r)`` points by TPLHD.
    """
    res = _resolve_resolution(spec, resolution)
    if layout == "grid":
        axes = [(np.arange(r) + 0.5) / r for r in res]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])
    if layout == "tplhd":
        return tplhd(int(np.prod(res)), spec.dim)
    raise ValueError(f"unknown layout {layout!r}")


def cache_key(spec: ProblemSpec, evaluator: Evaluator, resolution=None,
              layout: str = "grid") -> str:
    doc = {
        "version": CACHE_VERSION,
        "problem": spec.to_dict(),
        "resolution": list(_resolve_resolution(spec, resolution)),
        "layout": layout,
        "evaluator": evaluator.to_dict(),
    }
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _save(path: Path, **arrays) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, **arrays)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def reference_grid(
    spec: ProblemSpec,
    resolution=None,
    evaluator: Evaluator | None = None,
    layout: str = "grid",
    cache_dir: str | os.PathLike | None = None,
    use_cache: bool = True,
    progress=None,
) -> ReferenceSurface:
    """Evaluate the problem QoI on a reference set.

    Parameters
    ----------
    resolution : int, sequence of int, "desk" or "paper"
        Points per dimension. ``None`` means the desk resolution.
    layout : {"grid", "tplhd"}
    cache_dir : path, optional
        Defaults to ``~/.cache/mobsurrogate``.
    progress : callable, optional
        Called as ``progress(done, total)`` after each checkpoint.

    Returns
    -------
    ReferenceSurface
        Physical coordinates, QoI values and, for Lyapunov QoIs, labels.
    """
    evaluator = evaluator or Evaluator(spec)
    if evaluator.spec != spec:
        raise ValueError("evaluator belongs to a different problem")
    U = reference_points(spec, resolution, layout)
    X = denormalize(U, spec.domain)
    total = X.shape[0]
    y = np.full(total, np.nan)
    done = np.zeros(total, dtype=bool)
    path = None
    if use_cache:
        key = cache_key(spec, evaluator, resolution, layout)
        path = Path(cache_dir or default_cache_dir()) / f"{spec.name}-{key[:16]}.npz"
        if path.exists():
            with np.load(path) as f:
                if f["y"].shape == (total,):
                    y, done = f["y"].copy(), f["done"].copy()
            log.info("reference cache %s: %d/%d done", path.name, int(done.sum()), total)

    pending = np.nonzero(~done)[0]
    for count, i in enumerate(pending, 1):
        y[i] = evaluator(X[i])
        done[i] = True
        if path is not None and (count % CHECKPOINT_EVERY == 0):
            _save(path, y=y, done=done)
        if progress is not None and (count % CHECKPOINT_EVERY == 0 or count == len(pending)):
            progress(int(done.sum()), total)
    if path is not None and len(pending):
        _save(path, y=y, done=done)

    labels = None
    if spec.is_classification:
        labels = np.array([classify_lle(v) for v in y], dtype=int)
    return ReferenceSurface(X, y, labels)
