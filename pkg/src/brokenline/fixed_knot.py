"""Best approximation with a fixed knot vector: the convex inner solver.

Every knot configuration examined by the global search reduces to fits of this
kind: a single line (no knots), or a continuous polyline with prescribed
breakpoints whose values are the unknowns ("hat" coordinates). p = 2 is linear
least squares, p = 1 and p = inf are linear programs solved by the built-in
simplex, and general p uses damped Newton on the smooth convex objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BrokenLine, DataSet, PNorm
from .norms import residual_norm
from .simplex import solve_lp


class ConfigurationError(ValueError):
    """A knot placement leaves some piece without data to determine it."""


@dataclass(frozen=True)
class Line:
    """y = slope * x + intercept."""

    slope: float
    intercept: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.slope) and math.isfinite(self.intercept)):
            raise ValueError("line coefficients must be finite")

    def __call__(self, x: float) -> float:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class ChainProblem:
    """A contiguous data block [lo, hi] with internal knots at data abscissae.

    ``knot_indices`` are data indices strictly between lo and hi; every piece
    between consecutive breakpoints must cover at least two data abscissae
    counting the shared endpoints.
    """

    lo: int
    hi: int
    knot_indices: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.hi <= self.lo:
            raise ValueError("chain block must contain at least two points")
        idx = (self.lo, *self.knot_indices, self.hi)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("knot indices must be strictly increasing inside the block")

    def breakpoint_indices(self) -> tuple[int, ...]:
        return (self.lo, *self.knot_indices, self.hi)


def hat_design(xs: np.ndarray, bps: np.ndarray) -> np.ndarray:
    """Interpolation-weight rows of a polyline with breakpoints ``bps`` at ``xs``.

    Each abscissa contributes one row holding the two hat weights of the piece
    covering it; an abscissa lying bit-equal on a breakpoint gets weight one
    there.
    """
    n, d = len(xs), len(bps)
    A = np.zeros((n, d))
    piece = np.clip(np.searchsorted(bps, xs, side="right") - 1, 0, d - 2)
    exact = np.flatnonzero(xs == bps[np.clip(piece, 0, d - 1)])
    w = (xs - bps[piece]) / (bps[piece + 1] - bps[piece])
    A[np.arange(n), piece] = 1.0 - w
    A[np.arange(n), piece + 1] = w
    A[exact, :] = 0.0
    A[exact, piece[exact]] = 1.0
    return A


def _check_piece_coverage(xs: np.ndarray, bps: np.ndarray, minimum: int) -> None:
    for i in range(len(bps) - 1):
        covered = int(np.sum((bps[i] <= xs) & (xs <= bps[i + 1])))
        if covered < minimum:
            raise ConfigurationError(
                f"piece [{bps[i]}, {bps[i+1]}] covers {covered} data abscissae"
                f" (need >= {minimum})"
            )


def _newton_fit(
    A: np.ndarray,
    fs: np.ndarray,
    beta0: np.ndarray,
    p: float,
    *,
    gtol: float = 1e-10,
    max_iter: int = 200,
) -> np.ndarray:
    """Damped Newton for min sum |f - A beta|^p, 1 < p < inf, p != 2.

    For p < 2 the second derivative blows up at zero residual, so the
    objective is smoothed to sum (r^2 + mu^2)^(p/2) with mu driven down to
    1e-12 by continuation.
    """
    mus = [0.0] if p >= 2.0 else [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12]
    beta = beta0.astype(float).copy()

    def objective(b: np.ndarray, mu: float) -> float:
        r = fs - A @ b
        return float(np.sum((r * r + mu * mu) ** (p / 2.0)))

    for mu in mus:
        for _ in range(max_iter):
            r = fs - A @ beta
            s2 = r * r + mu * mu
            grad = -A.T @ (p * r * s2 ** (p / 2.0 - 1.0))
            if float(np.linalg.norm(grad)) <= gtol:
                break
            if mu == 0.0:
                weights = p * (p - 1.0) * np.abs(r) ** (p - 2.0)
            else:
                weights = p * s2 ** (p / 2.0 - 2.0) * ((p - 1.0) * r * r + mu * mu)
            H = (A * weights[:, None]).T @ A
            H[np.diag_indices_from(H)] += 1e-14 * (1.0 + float(np.trace(H)))
            try:
                step = np.linalg.solve(H, -grad)
            except np.linalg.LinAlgError:
                step = -grad
            base = objective(beta, mu)
            alpha = 1.0
            while alpha > 1e-14:
                cand = beta + alpha * step
                if objective(cand, mu) <= base:
                    beta = cand
                    break
                alpha /= 2.0
            else:
                break
    return beta


def _lp_fit(A: np.ndarray, fs: np.ndarray, p: PNorm) -> np.ndarray:
    """Solve the l_1 or l_inf fitting LP over free coefficients ``beta``.

    Free variables are split into positive and negative parts; the residual
    bound variables eps satisfy -eps <= f - A beta <= eps.
    """
    n, d = A.shape
    n_eps = 1 if p.is_infinity else n
    c = np.zeros(2 * d + n_eps)
    c[2 * d :] = 1.0
    E = np.ones((n, 1)) if p.is_infinity else np.eye(n)
    A_ub = np.block([[A, -A, -E], [-A, A, -E]])
    b_ub = np.concatenate([fs, -fs])
    x, _ = solve_lp(c, A_ub, b_ub)
    return x[:d] - x[d : 2 * d]


def _fit_coefficients(A: np.ndarray, fs: np.ndarray, p: PNorm) -> np.ndarray:
    if p.p == 2.0:
        beta, *_ = np.linalg.lstsq(A, fs, rcond=None)
        return beta
    if p.p == 1.0 or p.is_infinity:
        return _lp_fit(A, fs, p)
    start, *_ = np.linalg.lstsq(A, fs, rcond=None)
    return _newton_fit(A, fs, start, p.p)


def fit_line(xs, fs, p: PNorm) -> tuple[Line, float]:
    """Line minimizing the p-norm of residuals over the given points."""
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if len(xs) != len(fs) or len(xs) < 1:
        raise ValueError("need matching xs/fs with at least one point")
    if len(xs) == 1:
        return Line(0.0, float(fs[0])), 0.0
    if p.p == 2.0:
        xm, fm = xs.mean(), fs.mean()
        sxx = float(np.dot(xs - xm, xs - xm))
        slope = float(np.dot(xs - xm, fs - fm)) / sxx if sxx > 0 else 0.0
        line = Line(slope, float(fm - slope * xm))
    else:
        A = np.column_stack([xs, np.ones_like(xs)])
        beta = _fit_coefficients(A, fs, p)
        line = Line(float(beta[0]), float(beta[1]))
    return line, residual_norm(fs - (line.slope * xs + line.intercept), p)


def fit_values(
    xs: np.ndarray, fs: np.ndarray, bps: np.ndarray, p: PNorm
) -> tuple[np.ndarray, float]:
    """Optimal breakpoint values of a polyline with fixed breakpoints ``bps``."""
    _check_piece_coverage(xs, bps, minimum=1)
    A = hat_design(xs, bps)
    values = _fit_coefficients(A, fs, p)
    return values, residual_norm(fs - A @ values, p)


def fit_chain(data: DataSet, chain: ChainProblem, p: PNorm) -> tuple[BrokenLine, float]:
    """Best polyline over one chain: fixed data knots, free breakpoint values.

    A chain with no internal knots delegates to :func:`fit_line`. The returned
    polyline spans the chain block [x_lo, x_hi] only.
    """
    if not (0 <= chain.lo and chain.hi <= len(data.x) - 1):
        raise ValueError("chain block outside the data set")
    xs = data.x[chain.lo : chain.hi + 1]
    fs = data.f[chain.lo : chain.hi + 1]
    bp_idx = chain.breakpoint_indices()
    if any(b - a < 1 for a, b in zip(bp_idx, bp_idx[1:])):
        raise ConfigurationError("each chain piece must cover two data abscissae")
    bps = data.x[list(bp_idx)]
    if not chain.knot_indices:
        line, err = fit_line(xs, fs, p)
        return BrokenLine(bps, np.array([line(bps[0]), line(bps[1])])), err
    _check_piece_coverage(xs, bps, minimum=2)
    values, err = fit_values(xs, fs, bps, p)
    return BrokenLine(bps, values), err


def fit_fixed_knots(
    data: DataSet, knots, p: PNorm
) -> tuple[BrokenLine, float]:
    """Best polyline over the full data set with interior knots fixed at ``knots``.

    The knots may sit anywhere strictly inside (a, b), on or off the data
    abscissae; only the breakpoint values are optimized.
    """
    knots = np.asarray(knots, dtype=float)
    if len(knots) and not (
        np.all(np.diff(knots) > 0) and data.a < knots[0] and knots[-1] < data.b
    ):
        raise ValueError("knots must be strictly increasing inside (a, b)")
    bps = np.concatenate(([data.a], knots, [data.b]))
    values, err = fit_values(data.x, data.f, bps, p)
    return BrokenLine(bps, values), err
