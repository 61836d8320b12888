"""Independent brute-force reimplementations used as test oracles.

Nothing here imports the package's content, integral or operator code; only
the grid data types are shared.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def grid_array(values: np.ndarray, n: int, L: int) -> np.ndarray:
    return np.asarray(values).reshape((1 << L,) * n)


# --------------------------------------------------------------------------
# dyadic content by enumerating covers
# --------------------------------------------------------------------------


def _cube_block(arr: np.ndarray, level: int, index: tuple, L: int) -> np.ndarray:
    k = 1 << (L - level)
    return arr[tuple(slice(i * k, (i + 1) * k) for i in index)]


def _children(index: tuple, n: int) -> list[tuple]:
    # lexicographic offsets, axis 0 most significant
    return [tuple(2 * i + b for i, b in zip(index, bits))
            for bits in itertools.product((0, 1), repeat=n)]


def cover_values(cells: np.ndarray, n: int, L: int, delta: float,
                 level: int = 0, index: tuple | None = None) -> np.ndarray:
    """Costs of every antichain cover of the occupied part of a cube.

    A cube either is taken whole (cost ``side**delta``) or is split, in which
    case the costs of its children are added left to right in lexicographic
    child order. Every minimal dyadic cover is such an antichain, so the
    minimum of the returned array is the dyadic content.
    """
    arr = grid_array(cells, n, L)
    index = (0,) * n if index is None else index
    block = _cube_block(arr, level, index, L)
    if not block.any():
        return np.array([0.0])
    own = np.array([2.0 ** (-level * delta)])
    if level == L:
        return own
    acc = None
    for child in _children(index, n):
        vals = cover_values(cells, n, L, delta, level + 1, child)
        acc = vals if acc is None else (acc[:, None] + vals[None, :]).reshape(-1)
    return np.concatenate([own, acc])


def dyadic_by_enumeration(cells: np.ndarray, n: int, L: int, delta: float) -> float:
    return float(cover_values(cells, n, L, delta).min())


def all_cubes(n: int, L: int) -> list[tuple[int, tuple]]:
    out = []
    for level in range(L + 1):
        for idx in itertools.product(range(1 << level), repeat=n):
            out.append((level, idx))
    return out


def dyadic_by_subsets(cells: np.ndarray, n: int, L: int, delta: float) -> float:
    """Minimum over every subset of every dyadic cube (tiny grids only)."""
    cubes = all_cubes(n, L)
    N = 1 << (n * L)
    target = int("".join("1" if c else "0" for c in np.asarray(cells).reshape(-1)[::-1]) or "0", 2)
    masks = []
    for level, idx in cubes:
        m = np.zeros((1 << L,) * n, dtype=bool)
        k = 1 << (L - level)
        m[tuple(slice(i * k, (i + 1) * k) for i in idx)] = True
        masks.append(int("".join("1" if c else "0" for c in m.reshape(-1)[::-1]), 2))
    costs = [2.0 ** (-level * delta) for level, _ in cubes]
    # vectorized subset sweep: union masks and costs for all 2**len(cubes) subsets
    union = np.zeros(1, dtype=np.int64)
    cost = np.zeros(1)
    for m, c in zip(masks, costs):
        union = np.concatenate([union, union | m])
        cost = np.concatenate([cost, cost + c])
    ok = (union & target) == target
    assert N <= 62
    return float(cost[ok].min())


# --------------------------------------------------------------------------
# dyadic content by block reduction (many sets at once)
# --------------------------------------------------------------------------


def dyadic_blocks(masks: np.ndarray, n: int, L: int, delta: float) -> np.ndarray:
    """Dyadic content of each row of ``masks`` by reshaping into 2x...x2 blocks."""
    masks = np.asarray(masks, dtype=bool)
    T = masks.shape[0]
    v = masks.reshape((T,) + (1 << L,) * n) * 2.0 ** (-L * delta)
    for level in range(L - 1, -1, -1):
        side = 1 << level
        shape = [T]
        for _ in range(n):
            shape += [side, 2]
        blocks = v.reshape(shape)
        s = blocks.sum(axis=tuple(range(2, 2 * n + 1, 2)))
        v = np.where(s > 0, np.minimum(2.0 ** (-level * delta), s), 0.0)
    return v.reshape(T)


def choquet_layer_cake(values: np.ndarray, n: int, L: int, delta: float) -> float:
    """``sum (t_i - t_{i-1}) * content({f >= t_i})`` over the distinct positive values."""
    v = np.asarray(values, dtype=float).reshape(-1)
    levels = np.unique(v[v > 0])
    if levels.size == 0:
        return 0.0
    sets = v[None, :] >= levels[:, None]
    contents = dyadic_blocks(sets, n, L, delta)
    if np.isinf(levels[-1]):
        if contents[-1] > 0:
            return math.inf
    widths = np.diff(np.concatenate([[0.0], levels]))
    fin = np.isfinite(widths)
    return float((widths[fin] * contents[fin]).sum())


# --------------------------------------------------------------------------
# operators
# --------------------------------------------------------------------------


def centers(n: int, L: int) -> np.ndarray:
    h = 2.0 ** -L
    return np.array([[(i + 0.5) * h for i in idx]
                     for idx in itertools.product(range(1 << L), repeat=n)])


def maximal_centered(values, n, L, delta, kappa, radii) -> np.ndarray:
    c = centers(n, L)
    out = np.zeros(c.shape[0])
    for x in range(c.shape[0]):
        dist = np.sqrt(((c - c[x]) ** 2).sum(axis=1))
        best = 0.0
        for r in radii:
            inside = dist < r * (1 - 1e-12)
            g = np.where(inside, values, 0.0)
            best = max(best, r ** (kappa - delta) * choquet_layer_cake(g, n, L, delta))
        out[x] = best
    return out


def riesz(values, n, L, delta, alpha, floor) -> np.ndarray:
    c = centers(n, L)
    out = np.zeros(c.shape[0])
    for x in range(c.shape[0]):
        dist = np.sqrt(((c - c[x]) ** 2).sum(axis=1))
        g = np.asarray(values) * np.maximum(dist, floor) ** (alpha - delta)
        out[x] = choquet_layer_cake(g, n, L, delta)
    return out


# --------------------------------------------------------------------------
# ball covers
# --------------------------------------------------------------------------


def contains_cell(center, radius, idx, h) -> bool:
    """Closed ball contains the closed cell."""
    far = 0.0
    for c, i in zip(center, idx):
        a, b = i * h, (i + 1) * h
        far += max(abs(c - a), abs(c - b)) ** 2
    return far <= radius * radius * (1 + 1e-12)


def best_ball_cover(cells_idx, fam_centers, fam_radii, delta, h) -> float:
    """Cheapest cover of the listed cells using at most ``len(cells_idx)`` candidates."""
    k = len(cells_idx)
    cov = []
    for c, r in zip(fam_centers, fam_radii):
        bits = 0
        for u, idx in enumerate(cells_idx):
            if contains_cell(c, r, idx, h):
                bits |= 1 << u
        if bits:
            cov.append((bits, r ** delta))
    # cheapest candidate per coverage pattern
    best_per = {}
    for bits, cost in cov:
        if cost < best_per.get(bits, math.inf):
            best_per[bits] = cost
    items = list(best_per.items())
    full = (1 << k) - 1
    best = math.inf
    for size in range(1, k + 1):
        for combo in itertools.combinations(items, size):
            bits = 0
            for b, _ in combo:
                bits |= b
            if bits == full:
                best = min(best, math.fsum(c for _, c in combo))
    return best
