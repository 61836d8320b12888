"""Choquet integrals of grid functions by layer-cake over a content backend."""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .content import (
    ContentError,
    ContentParams,
    ball_content_upper,
    check_delta,
    dyadic_values_morton,
    side_cost,
)
from .geometry import GridFunction, GridSet, morton_perm

DYADIC = "dyadic-exact"
BALL_GREEDY = "ball-greedy-upper"
BACKENDS = (DYADIC, BALL_GREEDY)
_ALIASES = {"dyadic": DYADIC, "ball-greedy": BALL_GREEDY, "ball": BALL_GREEDY}

# rows x cells per chunk of batched dynamic programming
_CHUNK_ENTRIES = 1 << 23


def resolve_backend(backend: str) -> str:
    b = _ALIASES.get(backend, backend)
    if b not in BACKENDS:
        raise ContentError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    return b


@dataclass(frozen=True)
class DistributionFunction:
    """Step distribution ``t -> H({f > t})`` of a grid function.

    ``contents[k]`` is the content of ``{f >= thresholds[k]}``, which equals
    ``H({f > t})`` for ``t`` in ``[thresholds[k-1], thresholds[k])``.
    """

    thresholds: np.ndarray
    contents: np.ndarray
    infinity_content: float
    backend: str
    delta: float

    def __call__(self, t: float) -> float:
        """``H({f > t})`` for ``t >= 0``."""
        k = int(np.searchsorted(self.thresholds, t, side="right"))
        if k < self.thresholds.size:
            return float(self.contents[k])
        return self.infinity_content

    def integral(self) -> float:
        if self.infinity_content > 0:
            return float("inf")
        acc = 0.0
        prev = 0.0
        for t, c in zip(self.thresholds.tolist(), self.contents.tolist()):
            acc = acc + (t - prev) * c
            prev = t
        return acc

    def integral_power(self, p: float) -> float:
        if self.infinity_content > 0:
            return float("inf")
        acc = 0.0
        prev = 0.0
        for t, c in zip(self.thresholds.tolist(), self.contents.tolist()):
            tp = t ** p
            acc = acc + (tp - prev) * c
            prev = tp
        return acc


class _Memo:
    """Bounded LRU map guarded by a lock.

    Entries are deterministic functions of their key, so when two threads
    race on the same key the last write wins and both see the same value.
    """

    def __init__(self, maxsize: int = 512):
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            v = self._data.get(key)
            if v is not None:
                self._data.move_to_end(key)
            return v

    def put(self, key, value) -> None:
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()


_DISTRIBUTIONS = _Memo()


def clear_cache() -> None:
    _DISTRIBUTIONS.clear()


def _dyadic_superlevel_contents(f: GridFunction, thresholds: np.ndarray, delta: float) -> np.ndarray:
    vals = f.values[morton_perm(f.n, f.L)]
    N = vals.size
    out = np.empty(thresholds.size)
    step = max(1, _CHUNK_ENTRIES // N)
    for a in range(0, thresholds.size, step):
        t = thresholds[a:a + step]
        out[a:a + step] = dyadic_values_morton(vals[None, :] >= t[:, None], f.n, f.L, delta)
    return out


def distribution(
    f: GridFunction,
    delta: float,
    backend: str = DYADIC,
    params: ContentParams | None = None,
) -> DistributionFunction:
    """Distribution function of ``f`` with superlevel contents from ``backend``."""
    backend = resolve_backend(backend)
    check_delta(delta, f.n)
    if backend == BALL_GREEDY:
        params = params or ContentParams(delta=delta)
        if params.delta != delta:
            raise ContentError("params.delta differs from delta")
    key = (f.digest(), backend, float(delta), params)
    cached = _DISTRIBUTIONS.get(key)
    if cached is not None:
        return cached

    vals = f.values
    finite = vals[np.isfinite(vals)]
    thresholds = np.unique(finite[finite > 0])
    inf_cells = np.isinf(vals)
    if backend == DYADIC:
        contents = _dyadic_superlevel_contents(f, thresholds, delta)
        inf_content = (
            float(dyadic_values_morton(inf_cells[morton_perm(f.n, f.L)], f.n, f.L, delta))
            if inf_cells.any() else 0.0
        )
    else:
        contents = np.array(
            [ball_content_upper(GridSet(f.n, f.L, vals >= t), params).value for t in thresholds]
        )
        inf_content = (
            ball_content_upper(GridSet(f.n, f.L, inf_cells), params).value
            if inf_cells.any() else 0.0
        )
    thresholds.setflags(write=False)
    contents.setflags(write=False)
    dist = DistributionFunction(thresholds, contents, inf_content, backend, float(delta))
    _DISTRIBUTIONS.put(key, dist)
    return dist


def choquet_integral(
    f: GridFunction, delta: float, backend: str = DYADIC, params: ContentParams | None = None
) -> float:
    """``sum_k (t_k - t_{k-1}) * H({f >= t_k})``; infinite iff the infinity set has content."""
    return distribution(f, delta, backend, params).integral()


def choquet_integral_power(
    f: GridFunction,
    p: float,
    delta: float,
    backend: str = DYADIC,
    params: ContentParams | None = None,
) -> float:
    """Integral of ``f**p`` through the distribution of ``f``."""
    if not p > 0:
        raise ValueError(f"exponent p={p} must be positive")
    return distribution(f, delta, backend, params).integral_power(p)


def power_norm(
    f: GridFunction,
    p: float,
    delta: float,
    backend: str = DYADIC,
    params: ContentParams | None = None,
) -> float:
    """``(integral of f**p)**(1/p)`` for any ``p > 0``."""
    v = choquet_integral_power(f, p, delta, backend, params)
    return v ** (1.0 / p)


def quasi_norm(
    f: GridFunction,
    p: float,
    delta: float,
    backend: str = DYADIC,
    params: ContentParams | None = None,
) -> float:
    if p < 1:
        raise ValueError(f"quasi-norm needs p >= 1, got {p}")
    return power_norm(f, p, delta, backend, params)


# --------------------------------------------------------------------------
# batched integrals of many functions on one grid
# --------------------------------------------------------------------------


def _engine_chunk(vals: np.ndarray, n: int, L: int, delta: float) -> np.ndarray:
    """Choquet integrals of rows already sorted by ascending support size.

    Cells are inserted in decreasing value order; after each insertion only
    the path to the root is refreshed, with the same child fold and ``min``
    as :func:`hcontent.content.dyadic_values_morton`.
    """
    Q = vals.shape[0]
    k = 1 << n
    support = np.count_nonzero(vals, axis=1)
    K = int(support.max()) if Q else 0
    acc = np.zeros(Q)
    if K == 0:
        return acc
    order = np.argsort(-vals, axis=1, kind="stable")[:, :K]
    v = np.take_along_axis(vals, order, axis=1)
    costs = [side_cost(level, delta) for level in range(L + 1)]
    # flat per-level node arrays, row q of level l starting at q * 2**(n*l)
    tree = [np.zeros(Q << (n * level)) for level in range(L + 1)]
    C = np.zeros((Q, K))
    first = np.searchsorted(support, np.arange(1, K + 1), side="left")
    for s in range(K):
        a = int(first[s])
        rows = np.arange(a, Q)
        m = order[a:, s]
        tree[L][(rows << (n * L)) + m] = costs[L]
        for level in range(L - 1, -1, -1):
            m = m >> n
            base = (rows << (n * (level + 1))) + (m << n)
            child = tree[level + 1]
            acc_s = child[base]
            for o in range(1, k):
                acc_s = acc_s + child[base + o]
            tree[level][(rows << (n * level)) + m] = np.minimum(costs[level], acc_s)
        C[a:, s] = tree[0][rows]
    nxt = np.zeros(Q)
    for s in range(K - 1, -1, -1):
        acc = acc + (v[:, s] - nxt) * C[:, s]
        nxt = v[:, s]
    return acc


def unique_rows(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First occurrences of distinct rows and the map back to them."""
    seen: dict[bytes, int] = {}
    inverse = np.empty(rows.shape[0], dtype=np.int64)
    first = []
    for i, row in enumerate(rows):
        j = seen.setdefault(row.tobytes(), len(first))
        if j == len(first):
            first.append(i)
        inverse[i] = j
    return rows[first], inverse


def integrate_rows(values: np.ndarray, n: int, L: int, delta: float) -> np.ndarray:
    """Dyadic Choquet integrals of many row-major grid functions at once.

    Bitwise equal to calling :func:`choquet_integral` on each row. Rows with an
    infinite cell integrate to ``inf``; identical rows are evaluated once.
    """
    check_delta(delta, n)
    values = np.asarray(values, dtype=np.float64)
    values = values.reshape(-1, 1 << (n * L))
    out = np.zeros(values.shape[0])
    if values.shape[0] == 0:
        return out
    infinite = np.isinf(values).any(axis=1)
    out[infinite] = np.inf
    idx = np.flatnonzero(~infinite & values.any(axis=1))
    if idx.size == 0:
        return out
    rows = values[idx][:, morton_perm(n, L)] + 0.0
    uniq, inverse = unique_rows(rows)
    support = np.count_nonzero(uniq, axis=1)
    by_size = np.argsort(support, kind="stable")
    res = np.empty(uniq.shape[0])
    N = uniq.shape[1]
    step = max(1, _CHUNK_ENTRIES // (2 * N))
    for a in range(0, by_size.size, step):
        sel = by_size[a:a + step]
        res[sel] = _engine_chunk(uniq[sel], n, L, delta)
    out[idx] = res[inverse]
    return out
