"""Error measures of a surrogate against a reference response surface."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import LengthMismatch, ZeroSpread

__all__ = [
    "ReferenceSurface",
    "mae",
    "rmse",
    "rmae",
    "r2",
    "class_accuracies",
    "regression_metrics",
]


@dataclass(frozen=True)
class ReferenceSurface:
    """Reference points (physical units), their QoI values and optional labels."""

    x_ref: np.ndarray
    y_ref: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x_ref, dtype=float))
        if x.shape[0] == 1 and np.ndim(self.x_ref) == 1:
            x = x.T
        y = np.asarray(self.y_ref, dtype=float).ravel()
        if x.shape[0] != y.shape[0]:
            raise LengthMismatch("x_ref and y_ref lengths differ")
        if not np.all(np.isfinite(y)):
            raise ValueError("reference values must be finite")
        object.__setattr__(self, "x_ref", x)
        object.__setattr__(self, "y_ref", y)
        if self.labels is not None:
            object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int))

    def __len__(self):
        return self.y_ref.shape[0]


def _pair(y_ref, y_hat):
    a = np.asarray(y_ref, dtype=float).ravel()
    b = np.asarray(y_hat, dtype=float).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths {a.shape[0]} and {b.shape[0]} differ")
    if a.shape[0] < 1:
        raise LengthMismatch("empty input")
    return a, b


def mae(y_ref, y_hat) -> float:
    a, b = _pair(y_ref, y_hat)
    return float(np.mean(np.abs(a - b)))


def rmse(y_ref, y_hat) -> float:
    a, b = _pair(y_ref, y_hat)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def rmae(y_ref, y_hat) -> float:
    """Maximum absolute error over the population standard deviation of ``y_ref``."""
    a, b = _pair(y_ref, y_hat)
    sd = float(np.std(a))
    if sd == 0.0:
        raise ZeroSpread("reference values have zero spread")
    return float(np.max(np.abs(a - b)) / sd)


def r2(y_ref, y_hat) -> float:
    a, b = _pair(y_ref, y_hat)
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroSpread("reference values have zero spread")
    return 1.0 - float(np.sum((a - b) ** 2)) / ss_tot


def class_accuracies(labels_ref, labels_hat) -> tuple[float, float]:
    """Percent of reference-unstable and reference-stable points predicted correctly.

    A class absent from the reference yields ``nan`` for its percentage.
    """
    ref = np.asarray(labels_ref, dtype=int).ravel()
    hat = np.asarray(labels_hat, dtype=int).ravel()
    if ref.shape != hat.shape:
        raise LengthMismatch(f"lengths {ref.shape[0]} and {hat.shape[0]} differ")
    pos = ref == 1
    neg = ref == 0
    a_pos = 100.0 * np.sum(hat[pos] == 1) / np.sum(pos) if np.any(pos) else math.nan
    a_neg = 100.0 * np.sum(hat[neg] == 0) / np.sum(neg) if np.any(neg) else math.nan
    return float(a_pos), float(a_neg)


def regression_metrics(y_ref, y_hat) -> dict[str, float]:
    return {"mae": mae(y_ref, y_hat), "rmse": rmse(y_ref, y_hat),
            "rmae": rmae(y_ref, y_hat), "r2": r2(y_ref, y_hat)}
