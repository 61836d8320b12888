"""Dyadic and ball-cover Hausdorff contents of grid sets.

The dyadic content is an exact bottom-up minimum over the cube tree. Ball
contents are certified brackets: an explicit cover gives the upper bound and
the dyadic content times a comparability constant gives the lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import (
    Ball,
    DyadicCube,
    GridError,
    GridSet,
    ball_masks,
    cell_centers,
    cell_corners,
    cell_width,
    morton_perm,
    radius_ladder,
)

DYADIC = "dyadic-exact"
BALL_GREEDY = "ball-greedy"
BALL_EXACT = "ball-exact-small"

# candidate-by-cell coverage matrices larger than this are refused
MAX_COVERAGE_ENTRIES = 60_000_000


class ContentError(ValueError):
    """Invalid content parameters or an instance beyond the configured caps."""


def check_delta(delta: float, n: int) -> None:
    if not 0 < delta <= n:
        raise ContentError(f"delta={delta} outside (0, n] = (0, {n}]")


def side_cost(level: int, delta: float) -> float:
    """``l(Q)**delta`` for a cube at ``level``."""
    return 2.0 ** (-level * delta)


def comparability_bracket(n: int, delta: float) -> tuple[float, float]:
    """Constants ``(c_low, c_high)`` with ``c_low*Hd <= H <= c_high*Hd``.

    ``H`` is the ball-cover content and ``Hd`` the dyadic one.

    * A cube of side ``l`` sits in the ball of radius ``sqrt(n)/2 * l`` around
      its center, so any dyadic cover converts to a ball cover and
      ``H <= (sqrt(n)/2)**delta * Hd``.
    * A ball of radius ``r`` sits in an axis-parallel box of side ``2r``. Taking
      the dyadic side ``l`` with ``2r <= l < 4r``, the box meets at most two
      dyadic intervals per axis, i.e. ``2**n`` cubes of cost ``<= (4r)**delta``,
      so ``Hd <= 2**n * 4**delta * H``. On the grid, a ball containing a cell
      has ``2r >= h`` so ``l`` never drops below the cell size; if ``l > 1``
      the root cube (cost 1) is used instead.

    These are derived constants, not tight ones.
    """
    check_delta(delta, n)
    return 2.0 ** -n * 4.0 ** -delta, (math.sqrt(n) / 2) ** delta


# --------------------------------------------------------------------------
# dyadic content
# --------------------------------------------------------------------------


def _level_costs(L: int, delta: float) -> list[float]:
    return [side_cost(level, delta) for level in range(L + 1)]


def dyadic_values_morton(masks: np.ndarray, n: int, L: int, delta: float) -> np.ndarray:
    """Dyadic contents of a batch of sets given as Morton-ordered boolean rows.

    Children are folded left to right in Morton (lexicographic offset) order;
    the incremental evaluator in :mod:`hcontent.choquet` uses the identical
    arithmetic, so the two agree bitwise.
    """
    masks = np.asarray(masks, dtype=bool)
    squeeze = masks.ndim == 1
    masks = masks.reshape(-1, 1 << (n * L))
    costs = _level_costs(L, delta)
    v = masks * costs[L]
    k = 1 << n
    for level in range(L - 1, -1, -1):
        v4 = v.reshape(v.shape[0], -1, k)
        s = v4[:, :, 0]
        for o in range(1, k):
            s = s + v4[:, :, o]
        v = np.minimum(costs[level], s)
    out = v[:, 0]
    return out[0] if squeeze else out


def dyadic_values(cells: np.ndarray, n: int, L: int, delta: float) -> np.ndarray:
    """Dyadic contents of row-major boolean rows (batch)."""
    cells = np.asarray(cells, dtype=bool).reshape(-1, 1 << (n * L))
    return dyadic_values_morton(cells[:, morton_perm(n, L)], n, L, delta)


def _morton_decode(m: int, n: int, level: int) -> tuple[int, ...]:
    coords = [0] * n
    for bit in range(level):
        for d in range(n):
            coords[d] |= ((m >> (bit * n + (n - 1 - d))) & 1) << bit
    return tuple(coords)


@dataclass
class ContentResult:
    """Content value with a re-checkable cover and a lower/upper bracket."""

    value: float
    cover: list
    lower: float
    upper: float
    backend: str
    delta: float
    n: int
    L: int
    notes: dict = field(default_factory=dict)

    def cover_cost(self) -> float:
        return certificate_cost(self.cover, self.delta)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "backend": self.backend,
            "delta": self.delta,
            "n": self.n,
            "L": self.L,
            "cover": [c.to_dict() for c in self.cover],
            "notes": self.notes,
        }


def certificate_cost(cover, delta: float) -> float:
    terms = []
    for c in cover:
        if isinstance(c, DyadicCube):
            terms.append(side_cost(c.level, delta))
        else:
            terms.append(c.radius ** delta)
    return math.fsum(terms)


def certificate_covers(cover, E: GridSet) -> bool:
    """True when every occupied cell of ``E`` lies in some cover element."""
    covered = np.zeros_like(E.cells)
    for c in cover:
        if isinstance(c, DyadicCube):
            from .geometry import cube_cells

            covered |= cube_cells(c, E.L).cells
        else:
            covered |= ball_masks(np.array(c.center), [c.radius], E.n, E.L, "inner")[0]
    return not np.any(E.cells & ~covered)


def dyadic_content(E: GridSet, delta: float) -> ContentResult:
    """Exact dyadic content with its optimal cube cover.

    ``value(Q) = min(l(Q)**delta, sum of children values)`` on occupied cubes,
    zero on empty ones, ``l(Q)**delta`` on occupied cells. Ties keep the
    larger cube.
    """
    n, L = E.n, E.L
    check_delta(delta, n)
    costs = _level_costs(L, delta)
    k = 1 << n
    levels = [None] * (L + 1)
    take_parent = [None] * (L + 1)
    v = E.cells[morton_perm(n, L)] * costs[L]
    levels[L] = v
    for level in range(L - 1, -1, -1):
        v4 = v.reshape(-1, k)
        s = v4[:, 0]
        for o in range(1, k):
            s = s + v4[:, o]
        take_parent[level] = (s > 0) & (costs[level] <= s)
        v = np.minimum(costs[level], s)
        levels[level] = v
    value = float(levels[0][0])

    cover = []
    stack = [(0, 0)]
    while stack:
        level, m = stack.pop()
        if levels[level][m] == 0:
            continue
        if level == L or take_parent[level][m]:
            cover.append(DyadicCube(n, level, _morton_decode(m, n, level)))
        else:
            stack.extend((level + 1, (m << n) + o) for o in range(k - 1, -1, -1))
    return ContentResult(value, cover, value, value, DYADIC, delta, n, L)


# --------------------------------------------------------------------------
# ball covers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ContentParams:
    """Candidate-ball policy for the ball-cover backends.

    Centers come from cell centers, grid corners, or both; radii from the
    ladder ``r_min * 2**(k/2)`` up to ``sqrt(n)``. The circumscribing ball of
    every dyadic cube is always added, so each occupied cell is coverable.
    """

    delta: float
    centers: str = "both"
    r_min: float | None = None
    max_iter: int = 1_000_000
    max_cells: int = 64
    max_candidates: int = 4096

    def validate(self, n: int, L: int) -> None:
        check_delta(self.delta, n)
        if self.centers not in ("centers", "corners", "both"):
            raise ContentError(f"unknown center policy {self.centers!r}")
        if self.r_min is not None and self.r_min < cell_width(L) / 2 * (1 - 1e-12):
            raise ContentError("r_min must be at least half a cell width")


@dataclass(frozen=True)
class CandidateFamily:
    centers: np.ndarray
    radii: np.ndarray

    def __len__(self) -> int:
        return self.radii.size

    def ball(self, i: int) -> Ball:
        return Ball(tuple(self.centers[i]), float(self.radii[i]))


@lru_cache(maxsize=32)
def _family(n: int, L: int, centers: str, r_min: float | None) -> CandidateFamily:
    h = cell_width(L)
    pts = []
    if centers in ("centers", "both"):
        pts.append(cell_centers(n, L))
    if centers in ("corners", "both"):
        pts.append(cell_corners(n, L))
    pts = np.concatenate(pts)
    radii = radius_ladder(n, L, h / 2 if r_min is None else r_min)
    c = np.repeat(pts, len(radii), axis=0)
    r = np.tile(np.array(radii), pts.shape[0])
    # circumscribing balls of all dyadic cubes
    extra_c, extra_r = [], []
    for level in range(L + 1):
        side = 1 << level
        axes = np.meshgrid(*([np.arange(side)] * n), indexing="ij")
        idx = np.stack([a.reshape(-1) for a in axes], axis=1)
        extra_c.append((idx + 0.5) * 2.0 ** -level)
        extra_r.append(np.full(idx.shape[0], math.sqrt(n) / 2 * 2.0 ** -level))
    c = np.concatenate([c] + extra_c)
    r = np.concatenate([r] + extra_r)
    # sort by (radius, center lexicographic); drop duplicates
    key = np.column_stack([np.round(r, 13)] + [np.round(c[:, d], 13) for d in range(n)])
    order = np.lexsort(key.T[::-1])
    key, c, r = key[order], c[order], r[order]
    keep = np.ones(r.size, dtype=bool)
    keep[1:] = np.any(key[1:] != key[:-1], axis=1)
    c, r = c[keep], r[keep]
    c.setflags(write=False)
    r.setflags(write=False)
    return CandidateFamily(c, r)


def candidate_family(n: int, L: int, params: ContentParams) -> CandidateFamily:
    params.validate(n, L)
    return _family(n, L, params.centers, params.r_min)


def _coverage(E: GridSet, fam: CandidateFamily) -> tuple[np.ndarray, np.ndarray]:
    """Inner-mode coverage of the occupied cells by every candidate."""
    occ = np.flatnonzero(E.cells)
    if len(fam) * occ.size > MAX_COVERAGE_ENTRIES:
        raise ContentError(
            f"{len(fam)} candidates x {occ.size} cells exceeds the coverage cap"
        )
    h = cell_width(E.L)
    lo = cell_centers(E.n, E.L)[occ] - 0.5 * h
    d2 = np.zeros((len(fam), occ.size))
    for axis in range(E.n):
        x = fam.centers[:, axis, None]
        a = lo[None, :, axis]
        gap = np.maximum(np.abs(x - a), np.abs(x - a - h))
        d2 += gap * gap
    r2 = (fam.radii * fam.radii)[:, None]
    return d2 <= r2 * (1 + 1e-12), occ


def _greedy(cov: np.ndarray, cost: np.ndarray, max_iter: int) -> list[int]:
    """Weighted greedy set cover; candidates are pre-sorted for tie-breaking."""
    k = cov.shape[1]
    uncovered = np.ones(k, dtype=bool)
    gain = cov.sum(axis=1).astype(np.int64)
    chosen = []
    while uncovered.any():
        if len(chosen) >= max_iter:
            raise ContentError("greedy iteration cap reached")
        ratio = gain / cost
        best = int(np.argmax(ratio))
        if gain[best] == 0:
            raise ContentError("some occupied cell is not coverable by any candidate")
        newly = cov[best] & uncovered
        gain -= cov[:, newly].sum(axis=1)
        uncovered &= ~newly
        chosen.append(best)
    return chosen


def _prune(chosen: list[int], cov: np.ndarray, cost: np.ndarray) -> list[int]:
    """Drop balls whose cells are all covered by the rest, most expensive first."""
    mult = cov[chosen].sum(axis=0)
    keep = list(chosen)
    for i in sorted(chosen, key=lambda j: (-cost[j], j)):
        cells = cov[i]
        if np.all(mult[cells] >= 2):
            mult[cells] -= 1
            keep.remove(i)
    return keep


def _ball_lower(E: GridSet, delta: float) -> float:
    c_low, _ = comparability_bracket(E.n, delta)
    return c_low * dyadic_content(E, delta).value


def ball_content_upper(
    E: GridSet, params: ContentParams, seed_cover: list | None = None
) -> ContentResult:
    """Certified upper bound for the ball-cover content.

    The reported cover is the cheapest of: the pruned greedy cover (best
    ratio of newly covered cells to ``r**delta``; ties to the smaller radius,
    then the lexicographically smaller center), the cheapest single candidate
    covering everything, the circumscribing balls of the optimal dyadic
    cover, and ``seed_cover`` restricted to balls that cover part of ``E``.
    """
    n, L, delta = E.n, E.L, params.delta
    params.validate(n, L)
    if E.is_empty():
        return ContentResult(0.0, [], 0.0, 0.0, BALL_GREEDY, delta, n, L)
    fam = candidate_family(n, L, params)
    if len(fam) == 0:
        raise ContentError("empty candidate family")
    cov, _ = _coverage(E, fam)
    cost = fam.radii ** delta

    options = []
    greedy = _prune(_greedy(cov, cost, params.max_iter), cov, cost)
    options.append(("greedy", [fam.ball(i) for i in greedy]))
    full = np.flatnonzero(cov.all(axis=1))
    if full.size:
        options.append(("single", [fam.ball(int(full[np.argmin(cost[full])]))]))
    dy = dyadic_content(E, delta)
    options.append(
        ("dyadic", [Ball(q.center, math.sqrt(n) / 2 * q.side) for q in dy.cover])
    )
    if seed_cover:
        kept = [
            b for b in seed_cover
            if np.any(ball_masks(np.array(b.center), [b.radius], n, L, "inner")[0] & E.cells)
        ]
        if certificate_covers(kept, E):
            options.append(("seed", kept))

    costs = [certificate_cost(cv, delta) for _, cv in options]
    best = int(np.argmin(costs))
    c_low, _ = comparability_bracket(n, delta)
    upper = costs[best]
    return ContentResult(
        upper,
        options[best][1],
        c_low * dy.value,
        upper,
        BALL_GREEDY,
        delta,
        n,
        L,
        notes={"certificate": options[best][0], "candidates": len(fam)},
    )


def _reduced_family(E: GridSet, params: ContentParams):
    """Relevant, deduplicated, undominated candidates as bit patterns over occupied cells."""
    fam = candidate_family(E.n, E.L, params)
    cov, occ = _coverage(E, fam)
    cost = fam.radii ** params.delta
    useful = np.flatnonzero(cov.any(axis=1))
    cov, cost = cov[useful], cost[useful]
    # same pattern: keep the cheapest (first on ties, family order)
    packed = np.packbits(cov, axis=1)
    order = np.lexsort((np.arange(cost.size), cost))
    seen = {}
    for i in order:
        key = packed[i].tobytes()
        if key not in seen:
            seen[key] = i
    idx = np.array(sorted(seen.values()))
    cov, cost, useful = cov[idx], cost[idx], useful[idx]
    # dominance: drop i if some j covers a superset at no greater cost
    A = cov.astype(np.int32)
    inter = A @ A.T
    size = A.sum(axis=1)
    sub = inter == size[:, None]
    cheaper = (cost[None, :] < cost[:, None]) | (
        (cost[None, :] == cost[:, None]) & (size[None, :] > size[:, None])
    )
    np.fill_diagonal(sub, False)
    dominated = np.any(sub & cheaper, axis=1)
    keep = ~dominated
    return fam, cov[keep], cost[keep], useful[keep], occ


def ball_content_exact_small(E: GridSet, params: ContentParams) -> ContentResult:
    """Exact minimum of ``sum r**delta`` over covers drawn from the candidate family.

    Branch-and-bound over the relevant, undominated candidates. The lower
    bound at a node is the larger of the per-cell cost-share bound and
    ``c_low`` times the dyadic content of the uncovered cells; the incumbent
    starts from :func:`ball_content_upper`.
    """
    n, L, delta = E.n, E.L, params.delta
    params.validate(n, L)
    if E.is_empty():
        return ContentResult(0.0, [], 0.0, 0.0, BALL_EXACT, delta, n, L)
    if E.count > params.max_cells:
        raise ContentError(f"{E.count} occupied cells exceeds max_cells={params.max_cells}")
    fam, cov, cost, fam_idx, occ = _reduced_family(E, params)
    P, k = cov.shape
    if P > params.max_candidates:
        raise ContentError(
            f"{P} relevant candidates exceeds max_candidates={params.max_candidates}"
        )
    c_low, _ = comparability_bracket(n, delta)
    masks = [int("".join("1" if b else "0" for b in row[::-1]), 2) for row in cov]
    full = (1 << k) - 1
    by_cell = [[j for j in range(P) if (masks[j] >> u) & 1] for u in range(k)]
    for u in range(k):
        by_cell[u].sort(key=lambda j: (cost[j], j))

    upper = ball_content_upper(E, params)
    best_cost = upper.value
    best_cover = None
    occ_morton = np.argsort(morton_perm(n, L))[occ]
    N = 1 << (n * L)

    dy_cache: dict[int, float] = {}

    def dyadic_bound(U: int) -> float:
        v = dy_cache.get(U)
        if v is None:
            m = np.zeros(N, dtype=bool)
            bits = [u for u in range(k) if (U >> u) & 1]
            m[occ_morton[bits]] = True
            v = c_low * float(dyadic_values_morton(m, n, L, delta))
            dy_cache[U] = v
        return v

    cov_int = cov.astype(np.int64)

    def share_bound(U: int) -> float:
        u_mask = np.array([(U >> u) & 1 for u in range(k)], dtype=bool)
        cnt = cov_int[:, u_mask].sum(axis=1)
        with np.errstate(divide="ignore"):
            share = np.where(cnt > 0, cost / np.maximum(cnt, 1), np.inf)
        per_cell = np.where(cov[:, u_mask], share[:, None], np.inf).min(axis=0)
        return float(per_cell.sum())

    seen: dict[int, float] = {}
    tol = 1e-12
    stack = [(full, 0.0, ())]
    nodes = 0
    while stack:
        U, spent, picked = stack.pop()
        nodes += 1
        if U == 0:
            if spent < best_cost * (1 - tol) or best_cover is None and spent <= best_cost * (1 + tol):
                best_cost, best_cover = spent, picked
            continue
        prev = seen.get(U)
        if prev is not None and prev <= spent:
            continue
        seen[U] = spent
        lb = max(share_bound(U), dyadic_bound(U))
        if spent + lb >= best_cost * (1 - tol) and best_cover is not None:
            continue
        if spent + lb > best_cost * (1 + tol):
            continue
        u = min((c for c in range(k) if (U >> c) & 1), key=lambda c: len(by_cell[c]))
        for j in reversed(by_cell[u]):
            stack.append((U & ~masks[j], spent + cost[j], picked + (j,)))

    if best_cover is None:
        cover = upper.cover
        value = certificate_cost(cover, delta)
    else:
        cover = [fam.ball(int(fam_idx[j])) for j in best_cover]
        value = certificate_cost(cover, delta)
    return ContentResult(
        value, cover, value, value, BALL_EXACT, delta, n, L,
        notes={"candidates": P, "nodes": nodes},
    )
