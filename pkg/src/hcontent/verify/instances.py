"""Deterministic instance generators for the inequality suites."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..geometry import (
    DyadicCube,
    GridFunction,
    GridSet,
    ball_masks,
    cell_centers,
    cell_width,
    check_grid,
    cube_cells,
)

SET_KINDS = ("ball-indicator", "cantor-dust", "checkerboard", "union-of-cubes")
FUNCTION_KINDS = ("random-simple", "power-kernel")
KINDS = FUNCTION_KINDS + SET_KINDS


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for one instance.

    ``base_level`` builds the instance at a coarser level and upsamples it to
    ``L``, so the same continuum object can be compared across resolutions.
    ``params`` holds kind-specific options: ``dimension`` (cantor-dust),
    ``beta`` and ``floor`` (power-kernel), ``annulus`` (ball-indicator),
    ``count`` (union-of-cubes), ``scale`` (checkerboard).
    """

    kind: str
    n: int
    L: int
    seed: int = 0
    value_range: tuple[float, float] = (0.25, 4.0)
    base_level: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InstanceError(f"unknown instance kind {self.kind!r}; expected one of {KINDS}")
        check_grid(self.n, self.L)
        if self.base_level is not None and not 0 <= self.base_level <= self.L:
            raise InstanceError("base_level must lie in [0, L]")
        lo, hi = self.value_range
        if not 0 < lo <= hi:
            raise InstanceError("value_range must satisfy 0 < low <= high")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["value_range"] = list(self.value_range)
        return d


def _rng(spec: InstanceSpec) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([spec.seed & (2**64 - 1), KINDS.index(spec.kind)]))


def cantor_parameters(n: int, L: int, d: float) -> tuple[int, int]:
    """``(m, k)``: keep ``k`` of the ``2**(m*n)`` subcells at each ``m``-level step.

    The similarity dimension is ``log k / log 2**m``. Only steps ``m`` dividing
    ``L`` are used; the nearest dimension wins, ties going to the smaller ``m``
    and then the smaller ``k``.
    """
    if not 0 <= d <= n:
        raise InstanceError(f"target dimension {d} outside [0, {n}]")
    best = None
    for m in range(1, L + 1):
        if L % m:
            continue
        for k in range(1, (1 << (m * n)) + 1):
            err = abs(math.log(k) / (m * math.log(2)) - d)
            if best is None or err < best[0] - 1e-12:
                best = (err, m, k)
    if best is None or best[0] > 0.25:
        raise InstanceError(f"dimension {d} is not reachable at L={L}")
    return best[1], best[2]


def cantor_dust(n: int, L: int, d: float, rng: np.random.Generator | None = None) -> GridSet:
    """Self-similar dust keeping the ``k`` outermost subcells of each block.

    Subcells are ranked by distance of their center from the block center;
    ``rng`` breaks ties among equally distant subcells (lexicographic order
    when absent).
    """
    m, k = cantor_parameters(n, L, d)
    side = 1 << m
    sub = np.indices((side,) * n).reshape(n, -1).T
    dist = ((sub + 0.5 - side / 2) ** 2).sum(axis=1)
    tie = rng.permutation(len(sub)) if rng is not None else np.arange(len(sub))
    order = np.lexsort((tie, -dist))
    keep = sub[order[:k]]
    pts = np.zeros((1, n), dtype=np.int64)
    for _ in range(L // m):
        pts = (pts[:, None, :] * side + keep[None, :, :]).reshape(-1, n)
    return GridSet.from_indices(n, L, [tuple(p) for p in pts])


def checkerboard(n: int, L: int, scale: int | None = None) -> GridSet:
    """Cells of level ``scale`` (default ``L``) whose index sum is even."""
    scale = L if scale is None else scale
    if not 0 <= scale <= L:
        raise InstanceError("checkerboard scale must lie in [0, L]")
    idx = np.indices((1 << scale,) * n).sum(axis=0) % 2 == 0
    return GridSet(n, scale, idx.reshape(-1)).upsample(L - scale)


def _random_simple(spec: InstanceSpec, rng, L: int) -> GridFunction:
    n = spec.n
    coarse = int(rng.integers(max(0, L - 2), L + 1))
    levels = rng.uniform(*spec.value_range, size=int(rng.integers(1, 5)))
    cells = 1 << (n * coarse)
    vals = rng.choice(levels, size=cells)
    vals[rng.random(cells) < rng.uniform(0.2, 0.8)] = 0.0
    return GridFunction(n, coarse, vals).upsample(L - coarse)


def _power_kernel(spec: InstanceSpec, rng, L: int) -> GridFunction:
    n = spec.n
    beta = float(spec.params.get("beta", n / 2))
    floor = float(spec.params.get("floor", cell_width(L) / 2))
    c = cell_centers(n, L)
    x0 = c[int(rng.integers(c.shape[0]))]
    d = np.sqrt(((c - x0) ** 2).sum(axis=1))
    return GridFunction(n, L, np.maximum(d, floor) ** -beta)


def _ball_indicator(spec: InstanceSpec, rng, L: int) -> GridSet:
    n = spec.n
    h = cell_width(L)
    c = cell_centers(n, L)[int(rng.integers(1 << (n * L)))]
    r = float(spec.params.get("radius", rng.uniform(h, 0.5)))
    E = GridSet(n, L, ball_masks(c, [r], n, L, "inner")[0])
    if spec.params.get("annulus", False):
        inner = GridSet(n, L, ball_masks(c, [max(r - 2 * h, h / 4)], n, L, "center")[0])
        E = E - inner
    if E.is_empty():
        E = GridSet(n, L, ball_masks(c, [r], n, L, "outer")[0])
    return E


def _union_of_cubes(spec: InstanceSpec, rng, L: int) -> GridSet:
    n = spec.n
    E = GridSet.empty(n, L)
    for _ in range(int(spec.params.get("count", rng.integers(1, 6)))):
        level = int(rng.integers(1, L + 1)) if L > 0 else 0
        idx = tuple(int(i) for i in rng.integers(0, 1 << level, size=n))
        E = E | cube_cells(DyadicCube(n, level, idx), L)
    return E


def generate(spec: InstanceSpec) -> GridSet | GridFunction:
    """Build the instance; identical specs give bit-identical results."""
    rng = _rng(spec)
    L = spec.L if spec.base_level is None else spec.base_level
    if spec.kind == "random-simple":
        out = _random_simple(spec, rng, L)
    elif spec.kind == "power-kernel":
        out = _power_kernel(spec, rng, L)
    elif spec.kind == "ball-indicator":
        out = _ball_indicator(spec, rng, L)
    elif spec.kind == "cantor-dust":
        out = cantor_dust(spec.n, L, float(spec.params.get("dimension", spec.n / 2)), rng)
    elif spec.kind == "checkerboard":
        out = checkerboard(spec.n, L, spec.params.get("scale"))
    else:
        out = _union_of_cubes(spec, rng, L)
    return out.upsample(spec.L - L)


def as_function(obj: GridSet | GridFunction, rng: np.random.Generator | None = None,
                value_range: tuple[float, float] = (0.25, 4.0)) -> GridFunction:
    """Sets become scaled indicators (scale drawn from ``value_range`` when ``rng`` is given)."""
    if isinstance(obj, GridFunction):
        return obj
    scale = 1.0 if rng is None else float(rng.uniform(*value_range))
    return GridFunction.indicator(obj, scale)


def random_set(rng: np.random.Generator, n: int, L: int, density: float | None = None) -> GridSet:
    """Independent cells, density drawn uniformly when not given."""
    density = rng.uniform(0.05, 0.7) if density is None else density
    return GridSet(n, L, rng.random(1 << (n * L)) < density)


def random_function(rng: np.random.Generator, n: int, L: int,
                    value_range: tuple[float, float] = (0.25, 4.0)) -> GridFunction:
    """Random simple function with a few levels and a random zero set."""
    levels = rng.uniform(*value_range, size=int(rng.integers(1, 6)))
    N = 1 << (n * L)
    vals = rng.choice(levels, size=N)
    vals[rng.random(N) < rng.uniform(0.1, 0.8)] = 0.0
    return GridFunction(n, L, vals)


def mixed_corpus(n: int, L: int, count: int, seed: int, delta: float | None = None,
                 base_level: int | None = None) -> list[InstanceSpec]:
    """Rotating mix of all kinds; cantor dusts target dimension ``delta`` when given."""
    specs = []
    for i in range(count):
        kind = KINDS[i % len(KINDS)]
        params = {}
        if kind == "cantor-dust":
            params["dimension"] = delta if delta is not None else n / 2
        if kind == "ball-indicator" and (i // len(KINDS)) % 2:
            params["annulus"] = True
        base = base_level
        if kind == "cantor-dust":
            # the dust needs a level where the target dimension is reachable
            base = _cantor_level(n, L if base is None else base, params["dimension"])
        specs.append(InstanceSpec(kind, n, L, seed=seed * 100003 + i, base_level=base, params=params))
    return specs


def _cantor_level(n: int, L: int, d: float) -> int:
    for level in range(L, 0, -1):
        try:
            cantor_parameters(n, level, d)
            return level
        except InstanceError:
            continue
    raise InstanceError(f"dimension {d} not reachable at any level <= {L}")

