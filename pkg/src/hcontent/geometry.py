"""Dyadic cubes, balls and cell grids over the half-open unit cube [0, 1)^n.

A grid at level ``L`` splits the cube into ``2**(n*L)`` half-open cells of
side ``h = 2**-L``. Cells are addressed by their row-major flat index; the
numeric kernels in :mod:`hcontent.content` and :mod:`hcontent.choquet` work
in Morton (Z-order) so that the children of a cube are contiguous.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

MAX_DIM = 3
# memory bound on 2**(n*L) cells
MAX_LEVEL = {1: 12, 2: 8, 3: 5}

# relative slack for ball/cell boundary comparisons on dyadic coordinates
BOUNDARY_RTOL = 1e-12

MODES = ("inner", "center", "outer")


class GridError(ValueError):
    """Invalid grid parameters or mismatched grids."""


def check_grid(n: int, L: int, max_level: dict | None = None) -> None:
    if n not in (1, 2, 3):
        raise GridError(f"dimension n={n} outside 1..{MAX_DIM}")
    limits = max_level or MAX_LEVEL
    if not 0 <= L <= limits[n]:
        raise GridError(f"level L={L} outside 0..{limits[n]} for n={n}")


def cell_width(L: int) -> float:
    return 2.0 ** -L


@dataclass(frozen=True)
class DyadicCube:
    """Dyadic cube of side ``2**-level`` with integer ``index`` per axis."""

    n: int
    level: int
    index: tuple[int, ...]

    def __post_init__(self):
        if len(self.index) != self.n:
            raise GridError(f"index {self.index} has wrong length for n={self.n}")
        side = 1 << self.level
        if self.level < 0 or any(not 0 <= i < side for i in self.index):
            raise GridError(f"index {self.index} out of range at level {self.level}")

    @property
    def side(self) -> float:
        return 2.0 ** -self.level

    @property
    def center(self) -> tuple[float, ...]:
        s = self.side
        return tuple((i + 0.5) * s for i in self.index)

    def children(self) -> list["DyadicCube"]:
        """The 2**n children in lexicographic offset order."""
        out = []
        for off in range(1 << self.n):
            bits = [(off >> (self.n - 1 - d)) & 1 for d in range(self.n)]
            idx = tuple(2 * i + b for i, b in zip(self.index, bits))
            out.append(DyadicCube(self.n, self.level + 1, idx))
        return out

    def contains(self, other: "DyadicCube") -> bool:
        if other.level < self.level:
            return False
        shift = other.level - self.level
        return all((j >> shift) == i for i, j in zip(self.index, other.index))

    def to_dict(self) -> dict:
        return {"level": self.level, "index": list(self.index)}


@dataclass(frozen=True)
class Ball:
    """Open Euclidean ball in cube coordinates."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GridError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def to_dict(self) -> dict:
        return {"center": list(self.center), "radius": self.radius}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GridSet:
    """Union of level-``L`` cells, stored as a flat row-major boolean array."""

    n: int
    L: int
    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        check_grid(self.n, self.L)
        cells = np.asarray(self.cells, dtype=bool).reshape(-1)
        if cells.size != 1 << (self.n * self.L):
            raise GridError(
                f"cell array has {cells.size} entries, expected 2^{self.n * self.L}"
            )
        object.__setattr__(self, "cells", _frozen(cells))

    @classmethod
    def empty(cls, n: int, L: int) -> "GridSet":
        return cls(n, L, np.zeros(1 << (n * L), dtype=bool))

    @classmethod
    def full(cls, n: int, L: int) -> "GridSet":
        return cls(n, L, np.ones(1 << (n * L), dtype=bool))

    @classmethod
    def from_indices(cls, n: int, L: int, indices: Sequence) -> "GridSet":
        cells = np.zeros(1 << (n * L), dtype=bool)
        for idx in indices:
            cells[flat_index(idx, n, L)] = True
        return cls(n, L, cells)

    @property
    def count(self) -> int:
        return int(self.cells.sum())

    def is_empty(self) -> bool:
        return not self.cells.any()

    def indices(self) -> np.ndarray:
        """Occupied cells as an ``(k, n)`` array of integer indices."""
        return np.argwhere(self.cells.reshape((1 << self.L,) * self.n))

    def _check(self, other: "GridSet") -> None:
        if (self.n, self.L) != (other.n, other.L):
            raise GridError(
                f"grid mismatch: (n={self.n}, L={self.L}) vs (n={other.n}, L={other.L})"
            )

    def __or__(self, other: "GridSet") -> "GridSet":
        self._check(other)
        return GridSet(self.n, self.L, self.cells | other.cells)

    def __and__(self, other: "GridSet") -> "GridSet":
        self._check(other)
        return GridSet(self.n, self.L, self.cells & other.cells)

    def __sub__(self, other: "GridSet") -> "GridSet":
        self._check(other)
        return GridSet(self.n, self.L, self.cells & ~other.cells)

    def __invert__(self) -> "GridSet":
        return GridSet(self.n, self.L, ~self.cells)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridSet):
            return NotImplemented
        return (self.n, self.L) == (other.n, other.L) and bool(
            np.array_equal(self.cells, other.cells)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.L, self.cells.tobytes()))

    def issubset(self, other: "GridSet") -> bool:
        self._check(other)
        return not np.any(self.cells & ~other.cells)

    def upsample(self, k: int = 1) -> "GridSet":
        """Same point set at level ``L + k`` (each cell split into 2**(n*k) children)."""
        return GridSet(self.n, self.L + k, _upsample(self.cells, self.n, self.L, k))

    def embed(self, k: int) -> "GridSet":
        """Image of the pattern under x -> 2**-k x, on the level ``L + k`` grid."""
        side = 1 << self.L
        out = np.zeros((side << k,) * self.n, dtype=bool)
        out[(slice(0, side),) * self.n] = self.cells.reshape((side,) * self.n)
        return GridSet(self.n, self.L + k, out)

    def digest(self) -> str:
        return _digest("set", self.n, self.L, np.packbits(self.cells).tobytes())


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nonnegative extended-real function, constant on each level-``L`` cell.

    Values are stored as ``abs`` of the input; ``inf`` marks infinite cells.
    """

    n: int
    L: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        check_grid(self.n, self.L)
        vals = np.abs(np.asarray(self.values, dtype=np.float64).reshape(-1))
        if vals.size != 1 << (self.n * self.L):
            raise GridError(
                f"value array has {vals.size} entries, expected 2^{self.n * self.L}"
            )
        if np.isnan(vals).any():
            raise GridError("grid function contains NaN")
        # -0.0 and 0.0 hash differently
        vals = vals + 0.0
        object.__setattr__(self, "values", _frozen(vals))

    @classmethod
    def indicator(cls, E: GridSet, value: float = 1.0) -> "GridFunction":
        return cls(E.n, E.L, E.cells * float(value))

    @classmethod
    def constant(cls, n: int, L: int, c: float) -> "GridFunction":
        return cls(n, L, np.full(1 << (n * L), float(c)))

    def support(self) -> GridSet:
        return GridSet(self.n, self.L, self.values > 0)

    def restrict(self, E: GridSet) -> "GridFunction":
        if (E.n, E.L) != (self.n, self.L):
            raise GridError("restriction set lives on a different grid")
        return GridFunction(self.n, self.L, np.where(E.cells, self.values, 0.0))

    def scale(self, a: float) -> "GridFunction":
        if a == 0:
            return GridFunction(self.n, self.L, np.zeros_like(self.values))
        return GridFunction(self.n, self.L, self.values * abs(a))

    def power(self, p: float) -> "GridFunction":
        return GridFunction(self.n, self.L, self.values ** p)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self, other)
        return GridFunction(self.n, self.L, self.values + other.values)

    def __mul__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self, other)
        with np.errstate(invalid="ignore"):
            prod = self.values * other.values
        # 0 * inf counts as 0 for integrands
        return GridFunction(self.n, self.L, np.nan_to_num(prod, nan=0.0, posinf=np.inf))

    def upsample(self, k: int = 1) -> "GridFunction":
        return GridFunction(self.n, self.L + k, _upsample(self.values, self.n, self.L, k))

    def has_infinite(self) -> bool:
        return bool(np.isinf(self.values).any())

    def digest(self) -> str:
        return _digest("function", self.n, self.L, self.values.tobytes())


def _same_grid(a, b) -> None:
    if (a.n, a.L) != (b.n, b.L):
        raise GridError(f"grid mismatch: (n={a.n}, L={a.L}) vs (n={b.n}, L={b.L})")


def _digest(kind: str, n: int, L: int, payload: bytes) -> str:
    h = hashlib.sha256(f"{kind}:{n}:{L}:".encode())
    h.update(payload)
    return h.hexdigest()[:16]


def _upsample(arr: np.ndarray, n: int, L: int, k: int) -> np.ndarray:
    if k < 0:
        raise GridError("upsampling factor must be nonnegative")
    check_grid(n, L + k)
    a = arr.reshape((1 << L,) * n)
    for axis in range(n):
        a = np.repeat(a, 1 << k, axis=axis)
    return a.reshape(-1)


def flat_index(idx, n: int, L: int) -> int:
    idx = (int(idx),) if np.isscalar(idx) else tuple(int(i) for i in idx)
    side = 1 << L
    if len(idx) != n or any(not 0 <= i < side for i in idx):
        raise GridError(f"cell index {idx} out of range for n={n}, L={L}")
    out = 0
    for i in idx:
        out = out * side + i
    return out


def unflat_index(k: int, n: int, L: int) -> tuple[int, ...]:
    side = 1 << L
    out = []
    for _ in range(n):
        k, r = divmod(k, side)
        out.append(r)
    return tuple(reversed(out))


@lru_cache(maxsize=None)
def morton_perm(n: int, L: int) -> np.ndarray:
    """``perm[m]`` is the row-major index of the cell with Morton code ``m``.

    Morton bits interleave axis 0 as the most significant bit of each group,
    so the children of a cube appear in lexicographic offset order.
    """
    N = 1 << (n * L)
    m = np.arange(N, dtype=np.int64)
    coords = [np.zeros(N, dtype=np.int64) for _ in range(n)]
    for bit in range(L):
        for d in range(n):
            src = bit * n + (n - 1 - d)
            coords[d] |= ((m >> src) & 1) << bit
    side = 1 << L
    flat = np.zeros(N, dtype=np.int64)
    for d in range(n):
        flat = flat * side + coords[d]
    return _frozen(flat)


@lru_cache(maxsize=None)
def cell_centers(n: int, L: int) -> np.ndarray:
    """Row-major ``(2**(n*L), n)`` array of cell centers."""
    side = 1 << L
    h = cell_width(L)
    axes = np.meshgrid(*([np.arange(side)] * n), indexing="ij")
    idx = np.stack([a.reshape(-1) for a in axes], axis=1)
    return _frozen((idx + 0.5) * h)


@lru_cache(maxsize=None)
def cell_corners(n: int, L: int) -> np.ndarray:
    """All ``(2**L + 1)**n`` grid vertices, row-major."""
    side = (1 << L) + 1
    h = cell_width(L)
    axes = np.meshgrid(*([np.arange(side)] * n), indexing="ij")
    idx = np.stack([a.reshape(-1) for a in axes], axis=1)
    return _frozen(idx * h)


def cell_center_distance(a, b, n: int, L: int) -> float:
    """Euclidean distance between the centers of cells ``a`` and ``b``."""
    ia = (int(a),) if np.isscalar(a) else tuple(int(i) for i in a)
    ib = (int(b),) if np.isscalar(b) else tuple(int(i) for i in b)
    flat_index(ia, n, L)
    flat_index(ib, n, L)
    h = cell_width(L)
    return h * math.sqrt(sum((x - y) ** 2 for x, y in zip(ia, ib)))


def center_distance_matrix(n: int, L: int, rows: np.ndarray | None = None) -> np.ndarray:
    """Distances from the centers of ``rows`` (default all cells) to every cell center."""
    c = cell_centers(n, L)
    src = c if rows is None else c[rows]
    d2 = np.zeros((src.shape[0], c.shape[0]))
    for axis in range(n):
        diff = src[:, axis, None] - c[None, :, axis]
        d2 += diff * diff
    return np.sqrt(d2)


def ball_masks(
    centers: np.ndarray, radii: Sequence[float], n: int, L: int, mode: str = "center"
) -> np.ndarray:
    """Discretize every (center, radius) pair.

    Returns a boolean array of shape ``(len(centers) * len(radii), N)``, ordered
    center-major. ``inner`` keeps cells whose closure lies in the closed ball,
    ``center`` keeps cells whose center lies in the open ball, ``outer`` keeps
    cells whose closure meets the closed ball.
    """
    if mode not in MODES:
        raise GridError(f"unknown discretization mode {mode!r}")
    centers = np.asarray(centers, dtype=float).reshape(-1, n)
    r = np.asarray(radii, dtype=float)
    h = cell_width(L)
    lo = cell_centers(n, L) - 0.5 * h
    d2 = np.zeros((centers.shape[0], lo.shape[0]))
    for axis in range(n):
        x = centers[:, axis, None]
        a = lo[None, :, axis]
        if mode == "inner":
            gap = np.maximum(np.abs(x - a), np.abs(x - a - h))
        elif mode == "outer":
            gap = np.maximum(0.0, np.maximum(a - x, x - a - h))
        else:
            gap = x - (a + 0.5 * h)
        d2 += gap * gap
    r2 = (r * r)[None, :, None]
    if mode == "center":
        masks = d2[:, None, :] < r2 * (1 - BOUNDARY_RTOL)
    else:
        masks = d2[:, None, :] <= r2 * (1 + BOUNDARY_RTOL)
    return masks.reshape(-1, lo.shape[0])


def discretize_ball(
    b: Ball, n: int, L: int, mode: str = "center", max_level: dict | None = None
) -> GridSet:
    check_grid(n, L, max_level)
    if len(b.center) != n:
        raise GridError(f"ball center has dimension {len(b.center)}, expected {n}")
    if any(not 0.0 <= c <= 1.0 for c in b.center):
        raise GridError(f"ball center {b.center} outside [0,1]^{n}")
    return GridSet(n, L, ball_masks(np.array(b.center), [b.radius], n, L, mode)[0])


def cube_cells(q: DyadicCube, L: int) -> GridSet:
    """The cells of level ``L`` contained in ``q``."""
    if q.level > L:
        raise GridError(f"cube level {q.level} exceeds grid level {L}")
    check_grid(q.n, L)
    side = 1 << L
    k = 1 << (L - q.level)
    cells = np.zeros((side,) * q.n, dtype=bool)
    cells[tuple(slice(i * k, (i + 1) * k) for i in q.index)] = True
    return GridSet(q.n, L, cells)


def root_cube(n: int) -> DyadicCube:
    return DyadicCube(n, 0, (0,) * n)


def radius_ladder(n: int, L: int, r_min: float | None = None) -> tuple[float, ...]:
    """Geometric radii ``r_min * 2**(k/2)`` up to ``sqrt(n)``, with ``sqrt(n)`` appended."""
    r0 = cell_width(L) if r_min is None else float(r_min)
    top = math.sqrt(n)
    out = []
    k = 0
    while True:
        r = r0 * 2.0 ** (k / 2)
        if r > top * (1 + BOUNDARY_RTOL):
            break
        out.append(r)
        k += 1
    if not out or abs(out[-1] - top) > top * BOUNDARY_RTOL:
        out.append(top)
    return tuple(out)


def ball_volume(n: int, r: float) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * r ** n
