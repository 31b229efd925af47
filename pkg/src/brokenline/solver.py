"""Globally best broken-line approximation with at most k free knots.

The search enumerates every knot configuration that a normalized optimum can
use (junctions at data abscissae or one per gap, no junctions in the boundary
gaps, every piece covering two data abscissae), solves each configuration by
decoupled chain fits, and checks the free gap knots by intersecting the two
adjacent chain-boundary lines. Configurations whose intersection leaves the
open gap are dominated by data-knot configurations, which the enumeration
covers, so discarding them never loses the optimum.

A brute-force grid oracle provides an independent upper bound on the minimum
for cross-checking; its inner fits run on separate batched machinery (normal
equations and a vectorized Dantzig-rule simplex) so the two routes share as
little code as possible.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .core import BrokenLine, DataSet, PNorm, classify_knots
from .fixed_knot import ChainProblem, _newton_fit, fit_chain
from .norms import error_norm, residual_norm


@dataclass(frozen=True)
class Junction:
    """One knot slot: a data knot at x_q or a free knot inside gap (x_q, x_{q+1})."""

    kind: Literal["data", "gap"]
    q: int

    @property
    def code(self) -> int:
        """Total position order: x_q before gap q before x_{q+1}."""
        return 2 * self.q + (1 if self.kind == "gap" else 0)

    def __str__(self) -> str:
        return f"{self.kind[0]}{self.q}"


@dataclass(frozen=True)
class KnotConfig:
    """An ordered combinatorial placement of junctions."""

    junctions: tuple[Junction, ...] = ()

    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return (len(self.junctions), tuple(j.code for j in self.junctions))

    def validate(self, mu: int) -> None:
        codes = [j.code for j in self.junctions]
        if any(b <= a for a, b in zip(codes, codes[1:])):
            raise ValueError("junction positions must be strictly increasing")
        start = 0
        for j in self.junctions:
            if j.kind == "data" and not (1 <= j.q <= mu):
                raise ValueError(f"data junction q={j.q} outside 1..{mu}")
            if j.kind == "gap" and not (1 <= j.q <= mu - 1):
                raise ValueError(f"gap junction q={j.q} outside 1..{mu - 1}")
            if j.q - start + 1 < 2:
                raise ValueError(f"piece before junction {j} covers <2 abscissae")
            start = j.q if j.kind == "data" else j.q + 1
        if (mu + 1) - start + 1 < 2:
            raise ValueError("final piece covers <2 abscissae")

    def chains(self, mu: int) -> list[ChainProblem]:
        """Maximal runs of pieces coupled by continuity at data knots."""
        out = []
        lo, knots = 0, []
        for j in self.junctions:
            if j.kind == "data":
                knots.append(j.q)
            else:
                out.append(ChainProblem(lo, j.q, tuple(knots)))
                lo, knots = j.q + 1, []
        out.append(ChainProblem(lo, mu + 1, tuple(knots)))
        return out

    def __str__(self) -> str:
        return "+".join(str(j) for j in self.junctions) or "[]"


@dataclass(frozen=True)
class Infeasible:
    """A configuration whose free gap knot cannot sit strictly inside its gap."""

    config: KnotConfig
    reason: Literal["improper", "parallel", "outside-gap"]


@dataclass(frozen=True)
class FitResult:
    spline: BrokenLine
    error: float
    config: KnotConfig
    proper_knot_count: int
    diagnostics: tuple[str, ...] = ()


def enumerate_configs(mu: int, k: int) -> list[KnotConfig]:
    """All junction placements with 0..k junctions surviving the pruning rules.

    Ordered lexicographically by (junction count, positions). The rules are:
    junctions strictly increasing with none in the boundary gaps, and every
    piece covering at least two data abscissae counting shared data-knot
    endpoints.
    """
    if mu < 1 or k < 0:
        raise ValueError("need mu >= 1 and k >= 0")
    candidates = sorted(
        [Junction("data", q) for q in range(1, mu + 1)]
        + [Junction("gap", q) for q in range(1, mu)],
        key=lambda j: j.code,
    )
    results: list[KnotConfig] = []

    def rec(seq: list[Junction], start: int, last_code: int, r: int) -> None:
        if len(seq) == r:
            if (mu + 1) - start + 1 >= 2:
                results.append(KnotConfig(tuple(seq)))
            return
        for j in candidates:
            if j.code <= last_code or j.q - start + 1 < 2:
                continue
            seq.append(j)
            rec(seq, j.q if j.kind == "data" else j.q + 1, j.code, r)
            seq.pop()

    for r in range(k + 1):
        rec([], 0, -1, r)
    return results


def _end_line(s: BrokenLine, side: Literal["left", "right"]) -> tuple[float, float, float]:
    """(x0, y0, slope) of the first or last linear piece of a chain polyline."""
    if side == "left":
        slope = (s.v[1] - s.v[0]) / (s.t[1] - s.t[0])
        return float(s.t[0]), float(s.v[0]), float(slope)
    slope = (s.v[-1] - s.v[-2]) / (s.t[-1] - s.t[-2])
    return float(s.t[-1]), float(s.v[-1]), float(slope)


def solve_config(
    data: DataSet,
    config: KnotConfig,
    p: PNorm,
    _fit=None,
) -> FitResult | Infeasible:
    """Solve one configuration: decoupled chain fits plus gap feasibility.

    Each free gap knot must be the intersection of the two flanking chain
    lines, strictly inside its open gap (within the relative margin tau_gap).
    Identical flanking lines mean the junction is improper and the merged
    configuration (enumerated separately) covers it.
    """
    mu = data.mu
    config.validate(mu)
    fit = _fit or (lambda chain: fit_chain(data, chain, p))
    chains = config.chains(mu)
    fits = [fit(chain) for chain in chains]

    ts = [data.a]
    vs = [float(fits[0][0].v[0])]
    chain_idx = 0
    for j in config.junctions:
        spline = fits[chain_idx][0]
        if j.kind == "data":
            pos = int(np.flatnonzero(spline.t == data.x[j.q])[0])
            ts.append(float(data.x[j.q]))
            vs.append(float(spline.v[pos]))
        else:
            x0l, y0l, ml = _end_line(spline, "right")
            chain_idx += 1
            x0r, y0r, mr = _end_line(fits[chain_idx][0], "left")
            lo, hi = float(data.x[j.q]), float(data.x[j.q + 1])
            mid = 0.5 * (lo + hi)
            vl = y0l + (mid - x0l) * ml
            vr = y0r + (mid - x0r) * mr
            if abs(ml - mr) <= 1e-12 * (1.0 + abs(ml) + abs(mr)):
                if abs(vl - vr) <= 1e-12 * (1.0 + abs(vl) + abs(vr)):
                    return Infeasible(config, "improper")
                return Infeasible(config, "parallel")
            xi = (vr - vl) / (ml - mr) + mid
            tau_gap = 1e-12 * (hi - lo)
            if not (lo + tau_gap < xi < hi - tau_gap):
                return Infeasible(config, "outside-gap")
            ts.append(xi)
            vs.append(y0l + (xi - x0l) * ml)
    last = fits[-1][0]
    ts.append(data.b)
    vs.append(float(last.v[-1]))

    spline = BrokenLine(np.array(ts), np.array(vs))
    err = error_norm(data, spline, p)
    proper = sum(1 for lab in classify_knots(spline, data) if lab.proper)
    return FitResult(spline, err, config, proper)


def _interpolant_result(data: DataSet) -> FitResult:
    spline = BrokenLine(data.x, data.f)
    config = KnotConfig(tuple(Junction("data", q) for q in range(1, data.mu + 1)))
    proper = sum(1 for lab in classify_knots(spline, data) if lab.proper)
    return FitResult(spline, 0.0, config, proper, ("interpolation: mu < k+1",))


def best_fit(data: DataSet, k: int, p: PNorm, *, threads: int = 1) -> FitResult:
    """Global minimum of the discrete p-norm error over polylines with <= k knots.

    When mu < k+1 the data is reproduced exactly by the interpolating
    polyline. Otherwise every pruned configuration is solved and the minimum
    is taken, ties broken by fewer junctions then lexicographically smaller
    configuration; the merge is deterministic regardless of thread count.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if data.mu < k + 1:
        return _interpolant_result(data)

    cache: dict[ChainProblem, tuple[BrokenLine, float]] = {}

    def cached_fit(chain: ChainProblem) -> tuple[BrokenLine, float]:
        hit = cache.get(chain)
        if hit is None:
            hit = fit_chain(data, chain, p)
            cache[chain] = hit
        return hit

    configs = enumerate_configs(data.mu, k)
    solve = lambda cfg: solve_config(data, cfg, p, _fit=cached_fit)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(solve, configs))
    else:
        outcomes = [solve(cfg) for cfg in configs]

    diagnostics = []
    best: FitResult | None = None
    for out in outcomes:
        if isinstance(out, Infeasible):
            diagnostics.append(f"{out.config}: infeasible-{out.reason}")
            continue
        diagnostics.append(f"{out.config}: ok error={out.error:.17g}")
        if best is None or (out.error, out.config.sort_key()) < (
            best.error,
            best.config.sort_key(),
        ):
            best = out
    assert best is not None  # the empty configuration always succeeds
    return replace(best, diagnostics=tuple(diagnostics))


# --------------------------------------------------------------------------
# Independent grid oracle
# --------------------------------------------------------------------------
#
# The oracle evaluates whole batches of knot vectors at once. Its inner
# solvers are deliberately distinct from the primary path: batched normal
# equations instead of lstsq for p = 2, and a vectorized Dantzig-rule primal
# simplex (warm-started by the forced feasibility pivots of the fitting LP,
# so no auxiliary phase is needed) instead of the Bland tableau for p = 1 and
# p = inf. Every reported value is the residual norm of an actual polyline,
# hence always an upper bound on the true minimum.


def _batched_design(xs: np.ndarray, bps: np.ndarray) -> np.ndarray:
    """Hat-weight design tensors (C, n, d) for C breakpoint vectors at once."""
    C, d = bps.shape
    n = len(xs)
    piece = np.clip((bps[:, None, :] <= xs[None, :, None]).sum(-1) - 1, 0, d - 2)
    lo = np.take_along_axis(bps, piece, axis=1)
    hi = np.take_along_axis(bps, piece + 1, axis=1)
    w = (xs[None, :] - lo) / (hi - lo)
    A = np.zeros((C, n, d))
    np.put_along_axis(A, piece[:, :, None], (1.0 - w)[:, :, None], axis=2)
    np.put_along_axis(A, (piece + 1)[:, :, None], w[:, :, None], axis=2)
    return A


def _p2_errors_batch(A: np.ndarray, f: np.ndarray) -> np.ndarray:
    G = np.einsum("cnd,cne->cde", A, A)
    idx = np.arange(G.shape[1])
    G[:, idx, idx] += 1e-13 * (1.0 + np.trace(G, axis1=1, axis2=2))[:, None]
    b = np.einsum("cnd,n->cd", A, f)
    v = np.linalg.solve(G, b[:, :, None])[:, :, 0]
    r = f[None, :] - np.einsum("cnd,cd->cn", A, v)
    return np.sqrt(np.sum(r * r, axis=1))


def _lp_errors_batch(
    A: np.ndarray, f: np.ndarray, infinity: bool, tol: float = 1e-9, max_pivots: int = 200
) -> np.ndarray:
    """Exact min of ||f - A v||_1 (or _inf) per batch entry.

    Vectorized dense primal simplex over the batch: free values split into
    positive/negative parts, residual bounds eps, and one slack per row. The
    initial basis pivots eps into the tight row of every constraint pair,
    which is feasible by construction. Iteration truncation keeps the value
    achievable (primal feasibility is maintained throughout).
    """
    C, n, d = A.shape
    n_e = 1 if infinity else n
    m = 2 * n
    nv = 2 * d + n_e + m

    # Augmented tableau: constraint rows plus the reduced-cost row at index m.
    T = np.zeros((C, m + 1, nv + 1))
    T[:, 0:m:2, :d] = A
    T[:, 0:m:2, d : 2 * d] = -A
    T[:, 1:m:2, :d] = -A
    T[:, 1:m:2, d : 2 * d] = A
    if infinity:
        T[:, :m, 2 * d] = -1.0
    else:
        cols = 2 * d + np.arange(n)
        T[:, 2 * np.arange(n), cols] = -1.0
        T[:, 2 * np.arange(n) + 1, cols] = -1.0
    T[:, np.arange(m), 2 * d + n_e + np.arange(m)] = 1.0
    T[:, 0:m:2, -1] = f
    T[:, 1:m:2, -1] = -f
    T[:, m, 2 * d : 2 * d + n_e] = 1.0

    def pivot(rows: np.ndarray, cols: np.ndarray, ok: np.ndarray) -> None:
        ar = np.arange(T.shape[0])
        piv = np.where(ok, T[ar, rows, cols], 1.0)
        pr = T[ar, rows, :] / piv[:, None]
        colv = T[ar, :, cols]
        upd = colv[:, :, None] * pr[:, None, :]
        upd[~ok] = 0.0
        np.subtract(T, upd, out=T)
        keep = T[ar, rows, :]
        T[ar, rows, :] = np.where(ok[:, None], pr, keep)

    # Forced feasibility pivots; the right-hand side is shared by the batch,
    # so the pivot positions are too.
    everyone = np.ones(C, dtype=bool)
    if infinity:
        r = int(np.argmin(T[0, :m, -1]))
        pivot(np.full(C, r), np.full(C, 2 * d), everyone)
    else:
        for i in range(n):
            r = 2 * i if f[i] < 0 else 2 * i + 1
            pivot(np.full(C, r), np.full(C, 2 * d + i), everyone)

    # Iterate on a shrinking active sub-batch; finished combos are archived.
    values = np.zeros(C)
    alive = np.arange(C)
    for _ in range(max_pivots):
        ar = np.arange(len(alive))
        red = T[:, m, :nv]
        j = np.argmin(red, axis=1)  # Dantzig: most negative reduced cost
        done = red[ar, j] >= -tol
        if done.any():
            values[alive[done]] = -T[done, m, -1]
            keep = ~done
            alive, T, j = alive[keep], T[keep], j[keep]
            ar = np.arange(len(alive))
            if len(alive) == 0:
                break
        col = T[ar, :m, j]
        pos = col > tol
        ratios = np.full_like(col, np.inf)
        np.divide(T[:, :m, -1], col, out=ratios, where=pos)
        l = np.argmin(ratios, axis=1)
        ok = np.isfinite(ratios[ar, l])
        if not ok.any():
            break
        pivot(np.where(ok, l, 0), np.where(ok, j, nv - 1), ok)
    if len(alive):
        values[alive] = -T[:, m, -1]  # truncated: still primal feasible
    return values


def _oracle_errors(data: DataSet, bps_batch: np.ndarray, p: PNorm) -> np.ndarray:
    """Best fixed-breakpoint errors for a batch of breakpoint vectors."""
    out = np.empty(len(bps_batch))
    for start in range(0, len(bps_batch), 2048):
        chunk = bps_batch[start : start + 2048]
        A = _batched_design(data.x, chunk)
        if p.p == 2.0:
            out[start : start + len(chunk)] = _p2_errors_batch(A, data.f)
        elif p.p == 1.0 or p.is_infinity:
            out[start : start + len(chunk)] = _lp_errors_batch(A, data.f, p.is_infinity)
        else:
            for c in range(len(chunk)):
                v0, *_ = np.linalg.lstsq(A[c], data.f, rcond=None)
                v = _newton_fit(A[c], data.f, v0, p.p)
                out[start + c] = residual_norm(data.f - A[c] @ v, p)
    return out


def _grid_ladder(grid_per_gap: int) -> list[int]:
    """Coarse-to-fine resolutions g, g//4, g//16, ..., ending at the coarsest."""
    levels = []
    g = grid_per_gap
    while g >= 1:
        levels.append(g)
        g //= 4
    return levels[::-1]


def _gap_candidates(data: DataSet, resolutions: list[int]) -> list[np.ndarray]:
    """Per-gap candidates: union of equispaced grids at the given resolutions.

    Taking the union over the whole ladder makes the candidate sets nested
    along g in {1, 4, 16, 64, ...}, so refining the grid never enlarges the
    oracle minimum.
    """
    out = []
    for q in range(data.mu + 1):
        lo, hi = float(data.x[q]), float(data.x[q + 1])
        pts = {lo + (hi - lo) * i / (lvl + 1) for lvl in resolutions for i in range(1, lvl + 1)}
        out.append(np.array(sorted(pts)))
    return out


def _oracle_patterns(mu: int, k: int) -> list[tuple[Junction, ...]]:
    """All slot patterns with every piece covering two abscissae.

    Written as its own recursion (gap slots over all gaps; the coverage rule
    alone rules the boundary gaps out) so the oracle does not reuse the
    solver's pruned enumeration.
    """
    slots = sorted(
        [Junction("data", q) for q in range(1, mu + 1)]
        + [Junction("gap", q) for q in range(0, mu + 1)],
        key=lambda j: j.code,
    )
    patterns: list[tuple[Junction, ...]] = []

    def rec(seq: list[Junction], start: int, last_code: int, budget: int) -> None:
        if (mu + 1) - start + 1 >= 2:
            patterns.append(tuple(seq))
        if budget == 0:
            return
        for j in slots:
            if j.code <= last_code or j.q - start + 1 < 2:
                continue
            seq.append(j)
            rec(seq, j.q if j.kind == "data" else j.q + 1, j.code, budget - 1)
            seq.pop()

    rec([], 0, -1, k)
    return patterns


def grid_oracle(data: DataSet, k: int, p: PNorm, grid_per_gap: int) -> float:
    """Brute-force upper bound on the optimal error from gridded knot vectors.

    Knot entries range over the data abscissae x_1..x_mu plus grid_per_gap
    equispaced points inside every gap (plus their power-of-four coarsenings,
    which keeps the candidate sets nested along g in 1, 4, 16, 64, ...); all
    strictly increasing selections of size <= k whose pieces each cover two
    data abscissae are fitted. Patterns whose grid product stays within the
    exhaustive budget are evaluated outright in width-matched batches; the
    rest are searched coarse-to-fine, exhaustively while affordable and then
    by deterministic coordinate descent seeded with the best choice of the
    previous resolution. Refining g along the power-of-four ladder therefore
    only ever lowers the returned value.
    """
    if grid_per_gap < 1:
        raise ValueError("grid_per_gap must be >= 1")
    ladder = _grid_ladder(grid_per_gap)
    cands_at: dict[int, list[np.ndarray]] = {
        lvl: _gap_candidates(data, _grid_ladder(lvl)) for lvl in ladder
    }
    exhaustive_cap = 400

    def build_bps(
        pattern: tuple[Junction, ...], cands: list[np.ndarray], choices: np.ndarray
    ) -> np.ndarray:
        """Breakpoint vectors for all index rows (one column per gap slot)."""
        bps = np.empty((len(choices), len(pattern) + 2))
        bps[:, 0] = data.a
        bps[:, -1] = data.b
        slot = 0
        for col, j in enumerate(pattern, start=1):
            if j.kind == "data":
                bps[:, col] = data.x[j.q]
            else:
                bps[:, col] = cands[j.q][choices[:, slot]]
                slot += 1
        return bps

    def all_choices(sizes: list[int]) -> np.ndarray:
        if not sizes:
            return np.empty((1, 0), dtype=int)
        grids = np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def pattern_best(pattern: tuple[Junction, ...]) -> float:
        """Ladder search for one pattern too large to scan exhaustively."""
        gaps = [j.q for j in pattern if j.kind == "gap"]
        seen: dict[tuple[float, ...], float] = {}

        def eval_cached(cands: list[np.ndarray], choices: np.ndarray) -> np.ndarray:
            keys = [
                tuple(float(cands[q][c]) for q, c in zip(gaps, row)) for row in choices
            ]
            fresh = [i for i, key in enumerate(keys) if key not in seen]
            if fresh:
                errs = _oracle_errors(data, build_bps(pattern, cands, choices[fresh]), p)
                for i, e in zip(fresh, errs):
                    seen[keys[i]] = float(e)
            return np.array([seen[key] for key in keys])

        def descend(cands: list[np.ndarray], sizes: list[int], choice: np.ndarray) -> tuple[np.ndarray, float]:
            value = float(eval_cached(cands, choice[None, :])[0])
            for _ in range(12):
                moved = False
                for slot in range(len(sizes)):
                    scan = np.tile(choice, (sizes[slot], 1))
                    scan[:, slot] = np.arange(sizes[slot])
                    errs = eval_cached(cands, scan)
                    idx = int(np.argmin(errs))
                    if errs[idx] < value:
                        choice, value, moved = scan[idx], float(errs[idx]), True
                if not moved:
                    break
            return choice, value

        # Start at the finest resolution that is still exhaustively affordable;
        # each finer level runs coordinate descent from a handful of seeds
        # carried up from the level below, so refining the ladder can only
        # improve the value. The descent landscape of the kinkier norms has
        # local minima, hence the multi-seeding.
        start = 0
        for i, lvl in enumerate(ladder):
            if int(np.prod([len(cands_at[lvl][q]) for q in gaps])) <= exhaustive_cap:
                start = i
        value = np.inf
        seeds_pos: list[np.ndarray] | None = None
        for lvl in ladder[start:]:
            cands = cands_at[lvl]
            sizes = [len(cands[q]) for q in gaps]
            if int(np.prod(sizes)) <= exhaustive_cap:
                choices = all_choices(sizes)
                errs = eval_cached(cands, choices)
                order = np.argsort(errs, kind="stable")[:3]
                value = float(errs[order[0]])
                picked = [choices[idx] for idx in order]
            else:
                if seeds_pos is None:
                    seed_choices = [np.array([s // 2 for s in sizes])]
                else:
                    seed_choices = [
                        np.array(
                            [int(np.searchsorted(cands[q], pos)) for q, pos in zip(gaps, seed)]
                        )
                        for seed in seeds_pos
                    ]
                value = np.inf
                picked = []
                for seed in seed_choices:
                    choice, val = descend(cands, sizes, seed)
                    picked.append(choice)
                    value = min(value, val)
            seeds_pos = [
                np.array([cands[q][c] for q, c in zip(gaps, choice)]) for choice in picked
            ]
        return value

    top = cands_at[ladder[-1]]
    grouped: dict[int, list[np.ndarray]] = {}
    hard: list[tuple[Junction, ...]] = []
    for pattern in _oracle_patterns(data.mu, k):
        sizes = [len(top[j.q]) for j in pattern if j.kind == "gap"]
        if int(np.prod(sizes)) <= exhaustive_cap:
            grouped.setdefault(len(pattern), []).append(
                build_bps(pattern, top, all_choices(sizes))
            )
        else:
            hard.append(pattern)

    best = np.inf
    for blocks in grouped.values():
        stacked = np.concatenate(blocks, axis=0)
        best = min(best, float(_oracle_errors(data, stacked, p).min()))
    for pattern in hard:
        best = min(best, pattern_best(pattern))
    return float(best)
