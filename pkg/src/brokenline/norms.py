"""Discrete l_p objective: the norm of the residual vector f - s(X)."""

from __future__ import annotations

import math

import numpy as np

from .core import BrokenLine, DataSet, DomainError, PNorm, evaluate_many


def residual_norm(r: np.ndarray, p: PNorm) -> float:
    """l_p norm of a residual vector, overflow-safe for large finite p.

    For general p the norm is computed in the max-factored form
    ``max|r| * (sum (|r|/max|r|)^p)^(1/p)`` so that huge p never overflows.
    """
    r = np.asarray(r, dtype=float)
    if p.is_infinity:
        return float(np.max(np.abs(r)))
    if p.p == 1.0:
        return float(np.sum(np.abs(r)))
    if p.p == 2.0:
        return float(math.sqrt(np.dot(r, r)))
    top = float(np.max(np.abs(r)))
    if top == 0.0:
        return 0.0
    scaled = np.abs(r) / top
    return float(top * np.sum(scaled**p.p) ** (1.0 / p.p))


def error_norm(data: DataSet, s: BrokenLine, p: PNorm) -> float:
    """Approximation error ||f - s(X)||_p of a polyline against the data."""
    if s.a != data.a or s.b != data.b:
        raise DomainError("spline and data must share the interval [a, b]")
    return residual_norm(data.f - evaluate_many(s, data.x), p)
