"""Designs of experiments and adaptive acquisition.

All acquisitions work in the normalized unit cube and discretize their
continuous criteria over a seeded pool of uniform candidates. Ties are
broken by the larger distance to the existing samples, then by the lower
pool index (EIGF breaks ties by variance, then lexicographically).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import AcquisitionOrderError, EmptyPool, OutOfDomain
from .kriging import KrigingModel, loocv_errors, predict

__all__ = [
    "Domain",
    "normalize",
    "denormalize",
    "tplhd",
    "candidate_pool",
    "voronoi_assign",
    "MepeState",
    "mepe_next",
    "mepe_update",
    "mepe_alpha",
    "eigf_scores",
    "eigf_next",
    "MivorState",
    "mivor_next",
    "mivor_update",
    "MIN_SEPARATION",
]

MIN_SEPARATION = 1e-6
POOL_PER_DIM = 2000


@dataclass(frozen=True)
class Domain:
    lower: np.ndarray
    upper: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("every upper bound must exceed its lower bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


def normalize(x, d: Domain) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    span = d.upper - d.lower
    tol = 1e-12 * np.maximum(span, np.abs(d.upper))
    if np.any(x < d.lower - tol) or np.any(x > d.upper + tol):
        raise OutOfDomain(f"point {x} outside [{d.lower}, {d.upper}]")
    return np.clip((x - d.lower) / span, 0.0, 1.0)


def denormalize(u, d: Domain) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any(u < -1e-12) or np.any(u > 1 + 1e-12):
        raise OutOfDomain(f"normalized point {u} outside the unit cube")
    return d.lower + u * (d.upper - d.lower)


def tplhd(m: int, n: int) -> np.ndarray:
    """Translational propagation Latin hypercube with a one-point seed.

    A full TPLHD is built on the smallest ``k**n`` grid holding ``m`` points,
    trimmed to the ``m`` points nearest the centre and re-ranked per column.
    Points sit at bin centres.
    """
    if m < 1 or n < 1:
        raise ValueError("need m >= 1 and n >= 1")
    if m == 1:
        return np.full((1, n), 0.5)
    nd = m ** (1.0 / n)
    nd_star = int(np.ceil(nd - 1e-9))
    np_star = nd_star**n if nd_star**n > m else m
    X = np.ones((1, n))
    for c in range(n):
        seed = X.copy()
        d = np.empty(n)
        d[:c] = nd_star ** (c - 1) if c >= 1 else 0.0
        d[c] = np_star / nd_star
        d[c + 1:] = nd_star**c
        for _ in range(1, nd_star):
            seed = seed + d
            X = np.vstack([X, seed])
    if np_star > m:
        centre = np.full(n, np_star / 2.0)
        dist = np.linalg.norm(X - centre, axis=1)
        X = X[np.argsort(dist, kind="stable")[:m]]
    ranks = np.argsort(np.argsort(X, axis=0, kind="stable"), axis=0, kind="stable")
    return (ranks + 0.5) / m


def candidate_pool(n: int, seed, size: int | None = None) -> np.ndarray:
    size = POOL_PER_DIM * n if size is None else size
    return np.random.default_rng(seed).random((size, n))


def voronoi_assign(design_points, pool) -> tuple[np.ndarray, np.ndarray]:
    """Nearest design point of every pool point and the per-cell counts."""
    design_points = np.atleast_2d(np.asarray(design_points, dtype=float))
    pool = np.atleast_2d(np.asarray(pool, dtype=float))
    if design_points.shape[0] == 0:
        raise ValueError("empty design")
    _, idx = cKDTree(design_points).query(pool)
    counts = np.bincount(idx, minlength=design_points.shape[0])
    return idx, counts


def _nearest(design_points, pool):
    dist, idx = cKDTree(design_points).query(pool)
    return dist, idx


def _argmax(score: np.ndarray, dmin: np.ndarray) -> int:
    ok = np.isfinite(score)
    if not np.any(ok):
        raise EmptyPool("no admissible candidate in the pool")
    best = np.max(score[ok])
    tied = np.nonzero(ok & (score == best))[0]
    if len(tied) == 1:
        return int(tied[0])
    far = np.max(dmin[tied])
    return int(tied[dmin[tied] == far][0])


def _check_pool(pool) -> np.ndarray:
    pool = np.atleast_2d(np.asarray(pool, dtype=float))
    if pool.shape[0] == 0 or pool.size == 0:
        raise EmptyPool("candidate pool is empty")
    return pool


# -- MEPE ----------------------------------------------------------------------


@dataclass(frozen=True)
class MepeState:
    """Balance factor bookkeeping.

    ``pending`` is set between an acquisition and the update carrying the
    true response of the acquired point.
    """

    alpha: float = 0.5
    q: int = 0
    pending: bool = False
    prev_point: tuple[float, ...] | None = None
    prev_ehat: float = 0.0
    prev_pred: float = 0.0
    e_true: float | None = None


def mepe_alpha(e_true: float, ehat: float) -> float:
    """Balance factor ``0.99 * min(0.5 * e_true**2 / ehat, 1)`` for q > 1."""
    num = 0.5 * e_true * e_true
    if num == 0.0:
        return 0.0
    if ehat <= 0.0:
        return 0.99
    return 0.99 * min(num / ehat, 1.0)


def mepe_next(model: KrigingModel, design_points, state: MepeState, pool):
    """Maximize the expected prediction error over ``pool``.

    The squared LOOCV error of the design point whose Voronoi cell holds a
    candidate stands in for the bias term.
    """
    if state.pending:
        raise AcquisitionOrderError("update the MEPE state with the last response first")
    pool = _check_pool(pool)
    X = np.atleast_2d(design_points)
    alpha = 0.5 if state.q == 0 else state.alpha
    e2 = loocv_errors(model)
    dmin, nn = _nearest(X, pool)
    mean, var = predict(model, pool)
    epe = alpha * e2[nn] + (1.0 - alpha) * var
    epe = np.where(dmin >= MIN_SEPARATION, epe, -np.inf)
    k = _argmax(epe, dmin)
    new_state = dataclasses.replace(
        state, alpha=alpha, q=state.q + 1, pending=True,
        prev_point=tuple(pool[k]), prev_ehat=float(e2[nn[k]]), prev_pred=float(mean[k]),
    )
    return pool[k].copy(), new_state


def mepe_update(state: MepeState, y_true: float) -> MepeState:
    """Feed back the true response at the last acquired point."""
    if not state.pending:
        raise AcquisitionOrderError("no pending MEPE acquisition")
    e_true = float(y_true) - state.prev_pred
    return dataclasses.replace(
        state, pending=False, e_true=e_true, alpha=mepe_alpha(e_true, state.prev_ehat)
    )


# -- EIGF ----------------------------------------------------------------------


def eigf_scores(model: KrigingModel, design_points, design_y, pool):
    X = np.atleast_2d(design_points)
    dmin, nn = _nearest(X, pool)
    mean, var = predict(model, pool)
    return (mean - np.asarray(design_y)[nn]) ** 2 + var, var, dmin


def eigf_next(model: KrigingModel, design_points, pool, design_y=None) -> np.ndarray:
    """Maximize ``(mu(x) - y(x_nearest))**2 + var(x)`` over ``pool``."""
    pool = _check_pool(pool)
    y = model.design.y if design_y is None else design_y
    ei, var, dmin = eigf_scores(model, design_points, y, pool)
    ok = dmin >= MIN_SEPARATION
    if not np.any(ok):
        raise EmptyPool("no admissible candidate in the pool")
    idx = np.nonzero(ok)[0]
    keys = [pool[idx, j] for j in range(pool.shape[1] - 1, -1, -1)]
    order = np.lexsort(keys + [-var[idx], -ei[idx]])
    return pool[idx[order[0]]].copy()


# -- MiVor ---------------------------------------------------------------------


@dataclass(frozen=True)
class MivorState:
    exploration_rate: float = 0.4
    initial_rate: float = 0.4
    decrease_factor: float = 1.1
    seed: int = 0
    step: int = 0
    pending: bool = False
    last_branch: str | None = None

    def __post_init__(self):
        if not 0 <= self.exploration_rate <= 1:
            raise ValueError("exploration rate must lie in [0, 1]")
        if not self.decrease_factor > 1:
            raise ValueError("decrease factor must exceed 1")


def _explore(X, pool, dmin, nn):
    counts = np.bincount(nn, minlength=X.shape[0])
    cell = int(np.argmax(counts))
    members = np.nonzero((nn == cell) & (dmin >= MIN_SEPARATION))[0]
    if len(members) == 0:
        admissible = np.nonzero(dmin >= MIN_SEPARATION)[0]
        if len(admissible) == 0:
            raise EmptyPool("no admissible candidate in the pool")
        members = admissible
    return int(members[np.argmax(dmin[members])])


def _exploit(model, X, labels, pool, dmin):
    k = min(2, X.shape[0])
    _, nn2 = cKDTree(X).query(pool, k=k)
    nn2 = nn2.reshape(len(pool), k)
    lab = np.asarray(labels)
    in_chaotic = lab[nn2[:, 0]] == 1
    straddle = lab[nn2[:, 0]] != lab[nn2[:, -1]]
    cand = (in_chaotic | straddle) & (dmin >= MIN_SEPARATION)
    if not np.any(cand):
        return None
    mean, _ = predict(model, pool[cand])
    score = np.full(len(pool), -np.inf)
    score[cand] = dmin[cand] / (np.abs(mean) + 1e-300)
    return _argmax(score, dmin)


def mivor_next(model: KrigingModel, design_points, labels, state: MivorState, pool):
    """One MiVor acquisition. Returns ``(point, new_state)``.

    Exploration samples the pool point farthest from the samples inside
    the largest Voronoi cell. Exploitation targets the predicted class
    boundary (``mean == 0``) around chaotic samples, scoring candidates by
    distance to the samples over ``|mean|``.
    """
    if state.pending:
        raise AcquisitionOrderError("update the MiVor state with the last label first")
    pool = _check_pool(pool)
    X = np.atleast_2d(design_points)
    labels = np.asarray(labels, dtype=int)
    u = np.random.default_rng([state.seed, state.step]).random()
    dmin, nn = _nearest(X, pool)
    one_class = np.all(labels == labels[0])
    branch = "exploration" if (u < state.exploration_rate or one_class) else "exploitation"
    k = None
    if branch == "exploitation":
        k = _exploit(model, X, labels, pool, dmin)
        if k is None:
            branch = "exploration"
    if branch == "exploration":
        k = _explore(X, pool, dmin, nn)
        rate = state.exploration_rate
    else:
        rate = state.exploration_rate / state.decrease_factor
    new_state = dataclasses.replace(
        state, exploration_rate=rate, step=state.step + 1, pending=True, last_branch=branch
    )
    return pool[k].copy(), new_state


def mivor_update(state: MivorState, label: int) -> MivorState:
    """Feed back the class of the last acquired point."""
    if not state.pending:
        raise AcquisitionOrderError("no pending MiVor acquisition")
    rate = state.exploration_rate
    if state.last_branch == "exploration" and int(label) == 1:
        rate = state.initial_rate
    return dataclasses.replace(state, pending=False, exploration_rate=rate)
