"""Domain types for broken-line approximation: data sets, polylines, norms, knot labels."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class DomainError(ValueError):
    """An abscissa or spline lies outside the domain it is used with."""


def _frozen_array(values: Iterable[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DataSet:
    """Discrete approximation target: strictly increasing abscissae with values.

    ``x`` holds x_0 < x_1 < ... < x_{mu+1}; ``f`` the sampled values. The two
    outermost abscissae are the domain ends a and b, the mu inner ones are the
    candidate data-knot positions.
    """

    x: np.ndarray
    f: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _frozen_array(self.x))
        object.__setattr__(self, "f", _frozen_array(self.f))
        if self.x.ndim != 1 or self.f.ndim != 1:
            raise ValueError("abscissae and values must be one-dimensional")
        if len(self.x) != len(self.f):
            raise ValueError("abscissae and values must have the same length")
        if len(self.x) < 2:
            raise ValueError("need at least two data points")
        if not np.all(np.isfinite(self.x)) or not np.all(np.isfinite(self.f)):
            raise ValueError("data must be finite")
        if not np.all(np.diff(self.x) > 0):
            raise ValueError("abscissae must be strictly increasing")

    @property
    def a(self) -> float:
        return float(self.x[0])

    @property
    def b(self) -> float:
        return float(self.x[-1])

    @property
    def mu(self) -> int:
        return len(self.x) - 2

    def __len__(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class BrokenLine:
    """Continuous piecewise-linear function given by its breakpoint polyline.

    ``t`` is strictly increasing, first entry a and last entry b; ``v`` are the
    values at the breakpoints. Evaluation is linear interpolation, so the
    function is continuous by construction. Interior breakpoints are the
    (candidate) knots.
    """

    t: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", _frozen_array(self.t))
        object.__setattr__(self, "v", _frozen_array(self.v))
        if self.t.ndim != 1 or self.v.ndim != 1 or len(self.t) != len(self.v):
            raise ValueError("breakpoints must be parallel 1-d sequences")
        if len(self.t) < 2:
            raise ValueError("need at least two breakpoints")
        if not np.all(np.isfinite(self.t)) or not np.all(np.isfinite(self.v)):
            raise ValueError("breakpoints must be finite")
        if not np.all(np.diff(self.t) > 0):
            raise ValueError("breakpoint abscissae must be strictly increasing")

    @property
    def a(self) -> float:
        return float(self.t[0])

    @property
    def b(self) -> float:
        return float(self.t[-1])

    @property
    def knot_count(self) -> int:
        """Number of interior breakpoints; membership in S^1_k means knot_count <= k."""
        return len(self.t) - 2

    @property
    def knots(self) -> np.ndarray:
        return self.t[1:-1]

    def slopes(self) -> np.ndarray:
        """Slope of every linear piece, left to right."""
        return np.diff(self.v) / np.diff(self.t)

    def __call__(self, x: float) -> float:
        return evaluate(self, x)


@dataclass(frozen=True)
class PNorm:
    """A discrete l_p norm selector, 1 <= p <= inf.

    The tag (one/two/infinity/general) is derived from ``p``; ``PNorm.general``
    rejects p outside (1, inf) so the special cases stay canonical.
    """

    p: float

    def __post_init__(self) -> None:
        if math.isnan(self.p) or self.p < 1.0:
            raise ValueError(f"p must satisfy 1 <= p <= inf, got {self.p}")

    @classmethod
    def one(cls) -> "PNorm":
        return cls(1.0)

    @classmethod
    def two(cls) -> "PNorm":
        return cls(2.0)

    @classmethod
    def infinity(cls) -> "PNorm":
        return cls(math.inf)

    @classmethod
    def general(cls, p: float) -> "PNorm":
        if not (1.0 < p < math.inf):
            raise ValueError(f"general p must satisfy 1 < p < inf, got {p}")
        return cls(float(p))

    @property
    def is_infinity(self) -> bool:
        return math.isinf(self.p)

    def label(self) -> str:
        if self.is_infinity:
            return "inf"
        if self.p == int(self.p):
            return str(int(self.p))
        return repr(self.p)


class PositionKind(enum.Enum):
    DATA = "data"
    INTERIOR = "interior"


@dataclass(frozen=True)
class KnotLabel:
    """Classification of one interior breakpoint relative to a data set.

    ``kind`` is DATA when the knot coincides bit-equal with an abscissa x_q
    (then ``q`` is the data index), INTERIOR when x_q < t < x_{q+1} (then ``q``
    is the gap index). ``in_boundary_region`` flags knots inside the outermost
    gaps (x_0, x_1) or (x_mu, x_{mu+1}).
    """

    index: int
    position: float
    proper: bool
    kind: PositionKind
    q: int
    in_boundary_region: bool


@dataclass(frozen=True)
class RegularizationBounds:
    """Value/slope bounds of one spline over a data set.

    m_second bounds the divided differences of the spline's values at the
    abscissae, m_prime their magnitudes, m_fourth = m_prime + (b-a)*m_second
    bounds the function values of the slope-regularized rebuild, and
    m = max(m_second, m_fourth) bounds both.
    """

    m_prime: float
    m_second: float
    m_fourth: float
    m: float


def evaluate(s: BrokenLine, x: float) -> float:
    """Evaluate the polyline at x in [a, b]; at a breakpoint returns its stored value."""
    if not (s.t[0] <= x <= s.t[-1]):
        raise DomainError(f"x={x} outside [{s.t[0]}, {s.t[-1]}]")
    i = int(np.searchsorted(s.t, x, side="right")) - 1
    if i >= 0 and s.t[i] == x:
        return float(s.v[i])
    if i == len(s.t) - 1:
        return float(s.v[-1])
    t0, t1 = s.t[i], s.t[i + 1]
    return float(s.v[i] + (x - t0) * (s.v[i + 1] - s.v[i]) / (t1 - t0))


def evaluate_many(s: BrokenLine, xs: Sequence[float]) -> np.ndarray:
    """Vectorized :func:`evaluate`; same arithmetic, bit-identical results."""
    xs = np.asarray(xs, dtype=float)
    if len(xs) == 0:
        return np.empty(0)
    if xs.min() < s.t[0] or xs.max() > s.t[-1]:
        raise DomainError(f"abscissae outside [{s.t[0]}, {s.t[-1]}]")
    i = np.clip(np.searchsorted(s.t, xs, side="right") - 1, 0, len(s.t) - 2)
    t0, t1 = s.t[i], s.t[i + 1]
    vals = s.v[i] + (xs - t0) * (s.v[i + 1] - s.v[i]) / (t1 - t0)
    exact = t0 == xs
    vals[exact] = s.v[i[exact]]
    right_end = xs == s.t[-1]
    vals[right_end] = s.v[-1]
    return vals


def default_slope_tolerance(s: BrokenLine) -> float:
    """Relative properness threshold: 1e-9 * (1 + max piece slope magnitude)."""
    return 1e-9 * (1.0 + float(np.max(np.abs(s.slopes()))))


def classify_knots(
    s: BrokenLine, data: DataSet, tau_slope: float | None = None
) -> tuple[KnotLabel, ...]:
    """Label every interior breakpoint with properness and its position class.

    A knot is proper when the slopes of its two pieces differ by more than
    ``tau_slope``. Data knots require bit-equality with an abscissa; anything
    else lies strictly inside some gap (x_q, x_{q+1}).
    """
    if s.a != data.a or s.b != data.b:
        raise DomainError("spline and data must share the interval [a, b]")
    if tau_slope is None:
        tau_slope = default_slope_tolerance(s)
    slopes = s.slopes()
    mu = data.mu
    labels = []
    for j in range(1, len(s.t) - 1):
        t = float(s.t[j])
        proper = abs(slopes[j] - slopes[j - 1]) > tau_slope
        idx = int(np.searchsorted(data.x, t, side="right")) - 1
        if data.x[idx] == t:
            kind, q, boundary = PositionKind.DATA, idx, False
        else:
            kind, q, boundary = PositionKind.INTERIOR, idx, idx == 0 or idx == mu
        labels.append(KnotLabel(j, t, proper, kind, q, boundary))
    return tuple(labels)


def proper_knot_positions(
    s: BrokenLine, data: DataSet, tau_slope: float | None = None
) -> np.ndarray:
    labels = classify_knots(s, data, tau_slope)
    return np.array([lab.position for lab in labels if lab.proper])


def spike_fixture(i: int) -> BrokenLine:
    """Polyline on [-1, 1] equal to 1 at {-1, 0, 1} but peaking at (i+1)/2.

    The family shows that polylines bounded on a grid can grow without bound
    between grid points as i increases: the breakpoints are exactly
    (-1, 1), (-1/i, 1/i), (1/2, (i+1)/2), (1, 1).
    """
    if i < 2:
        raise ValueError(f"fixture index must be >= 2, got {i}")
    return BrokenLine(
        t=np.array([-1.0, -1.0 / i, 0.5, 1.0]),
        v=np.array([1.0, 1.0 / i, (i + 1) / 2.0, 1.0]),
    )
