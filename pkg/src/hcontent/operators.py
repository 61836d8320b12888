"""Maximal operators and Riesz potentials built on Choquet integrals.

Ball integrals use center-mode discretization: a ball ``B(c, r)`` holds the
cells whose centers lie strictly inside it. Averages are normalized by the
analytic ball content ``r**delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .choquet import (
    DYADIC,
    _Memo,
    choquet_integral,
    integrate_rows,
    resolve_backend,
    unique_rows,
)
from .content import ContentError, check_delta, dyadic_values_morton
from .geometry import (
    BOUNDARY_RTOL,
    GridFunction,
    ball_masks,
    ball_volume,
    cell_centers,
    cell_corners,
    cell_width,
    center_distance_matrix,
    morton_perm,
    radius_ladder,
)

_ROW_BUDGET = 1 << 21


class OperatorError(ValueError):
    """Operator parameters outside their admissible range."""


@dataclass(frozen=True)
class RadiusLadder:
    """Finite radius set standing in for the supremum over ``r > 0``.

    ``stride`` spaces the extra grid-corner centers used by the uncentered
    operators.
    """

    radii: tuple[float, ...]
    stride: int = 1

    def __post_init__(self):
        radii = tuple(sorted(float(r) for r in self.radii))
        if not radii:
            raise OperatorError("radius ladder is empty")
        object.__setattr__(self, "radii", radii)
        if self.stride < 1:
            raise OperatorError("stride must be at least 1")

    @classmethod
    def default(cls, n: int, L: int, stride: int = 1) -> "RadiusLadder":
        return cls(radius_ladder(n, L), stride)

    def refined(self) -> "RadiusLadder":
        """Add the geometric midpoint between consecutive radii."""
        r = self.radii
        mids = [math.sqrt(a * b) for a, b in zip(r, r[1:])]
        return RadiusLadder(tuple(sorted(set(r) | set(mids))), self.stride)

    def check(self, L: int) -> None:
        if self.radii[0] < cell_width(L) * (1 - BOUNDARY_RTOL):
            raise OperatorError("smallest ladder radius is below the cell width")

    def to_dict(self) -> dict:
        return {"radii": list(self.radii), "stride": self.stride}


@dataclass
class OperatorResult:
    output: GridFunction
    operator: str
    params: dict
    input_digest: str
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "params": self.params,
            "input_digest": self.input_digest,
            "output_digest": self.output.digest(),
        }


def _ladder(f: GridFunction, ladder: RadiusLadder | None) -> RadiusLadder:
    ladder = ladder or RadiusLadder.default(f.n, f.L)
    ladder.check(f.L)
    return ladder


def _check_maximal(f: GridFunction, delta: float, kappa: float) -> None:
    check_delta(delta, f.n)
    if not 0 <= kappa < delta:
        raise OperatorError(f"kappa={kappa} outside [0, delta) = [0, {delta})")


def integrate_many(rows: np.ndarray, n: int, L: int, delta: float, backend: str) -> np.ndarray:
    """Choquet integrals of row-major grid functions with the chosen backend."""
    backend = resolve_backend(backend)
    if backend == DYADIC:
        return integrate_rows(rows, n, L, delta)
    rows = np.asarray(rows, dtype=float).reshape(-1, 1 << (n * L))
    uniq, inverse = unique_rows(rows)
    vals = np.array([choquet_integral(GridFunction(n, L, r), delta, backend) for r in uniq])
    return vals[inverse]


def _masked_integrals(
    f: GridFunction, masks: np.ndarray, delta: float, backend: str
) -> np.ndarray:
    out = np.empty(masks.shape[0])
    N = masks.shape[1]
    step = max(1, _ROW_BUDGET // N)
    for a in range(0, masks.shape[0], step):
        rows = np.where(masks[a:a + step], f.values[None, :], 0.0)
        out[a:a + step] = integrate_many(rows, f.n, f.L, delta, backend)
    return out


_TABLES = _Memo(maxsize=64)


def centered_ball_integrals(
    f: GridFunction, delta: float, ladder: RadiusLadder | None = None, backend: str = DYADIC
) -> np.ndarray:
    """``I[x, k]``: integral of ``f`` over the ball at cell ``x`` with radius ``ladder[k]``."""
    ladder = _ladder(f, ladder)
    backend = resolve_backend(backend)
    check_delta(delta, f.n)
    key = (f.digest(), float(delta), ladder.radii, backend)
    table = _TABLES.get(key)
    if table is not None:
        return table
    centers = cell_centers(f.n, f.L)
    table = np.empty((centers.shape[0], len(ladder.radii)))
    for k, r in enumerate(ladder.radii):
        masks = ball_masks(centers, [r], f.n, f.L, "center")
        table[:, k] = _masked_integrals(f, masks, delta, backend)
    table.setflags(write=False)
    _TABLES.put(key, table)
    return table


def _weights(radii, kappa: float, delta: float) -> np.ndarray:
    return np.array([r ** (kappa - delta) for r in radii])


def _params(**kw) -> dict:
    return {k: (v.to_dict() if hasattr(v, "to_dict") else v) for k, v in kw.items()}


def maximal_centered(
    f: GridFunction,
    delta: float,
    kappa: float = 0.0,
    ladder: RadiusLadder | None = None,
    backend: str = DYADIC,
) -> OperatorResult:
    """``max_r r**kappa / r**delta * integral of f over B(x, r)`` at every cell."""
    _check_maximal(f, delta, kappa)
    ladder = _ladder(f, ladder)
    table = centered_ball_integrals(f, delta, ladder, backend)
    out = (table * _weights(ladder.radii, kappa, delta)[None, :]).max(axis=1)
    return OperatorResult(
        GridFunction(f.n, f.L, out),
        "maximal-centered",
        _params(delta=delta, kappa=kappa, backend=resolve_backend(backend), ladder=ladder),
        f.digest(),
    )


def uncentered_centers(n: int, L: int, stride: int, with_cells: bool = True) -> np.ndarray:
    """Candidate centers: grid corners on the stride sub-lattice, then cell centers."""
    corners = cell_corners(n, L)
    side = (1 << L) + 1
    idx = np.indices((side,) * n).reshape(n, -1).T
    keep = np.all(idx % stride == 0, axis=1)
    if not with_cells:
        return corners[keep]
    return np.concatenate([corners[keep], cell_centers(n, L)])


def _uncentered_values(
    f: GridFunction, ladder: RadiusLadder, score, with_cells: bool = True
) -> np.ndarray:
    centers = uncentered_centers(f.n, f.L, ladder.stride, with_cells)
    out = np.zeros(f.values.size)
    for r in ladder.radii:
        masks = ball_masks(centers, [r], f.n, f.L, "center")
        vals = score(masks, r)
        hit = np.where(masks, vals[:, None], 0.0)
        out = np.maximum(out, hit.max(axis=0))
    return out


def maximal_uncentered(
    f: GridFunction,
    delta: float,
    kappa: float = 0.0,
    ladder: RadiusLadder | None = None,
    backend: str = DYADIC,
) -> OperatorResult:
    """Maximum of the normalized ball integral over candidate balls containing each cell."""
    _check_maximal(f, delta, kappa)
    ladder = _ladder(f, ladder)

    def score(masks, r):
        return r ** (kappa - delta) * _masked_integrals(f, masks, delta, backend)

    out = _uncentered_values(f, ladder, score, with_cells=False)
    # centered candidates are part of the family; take them from the shared table
    centered = maximal_centered(f, delta, kappa, ladder, backend).output.values
    out = np.maximum(out, centered)
    return OperatorResult(
        GridFunction(f.n, f.L, out),
        "maximal-uncentered",
        _params(delta=delta, kappa=kappa, backend=resolve_backend(backend), ladder=ladder),
        f.digest(),
    )


def maximal_sharp(
    f: GridFunction, delta: float, ladder: RadiusLadder | None = None, backend: str = DYADIC
) -> OperatorResult:
    """Sharp maximal function with Choquet averages ``f_B = r**-delta * integral over B``."""
    check_delta(delta, f.n)
    ladder = _ladder(f, ladder)

    def score(masks, r):
        norm = r ** -delta
        avg = norm * _masked_integrals(f, masks, delta, backend)
        res = np.full(masks.shape[0], np.inf)
        fin = np.isfinite(avg)
        if fin.any():
            dev = np.abs(f.values[None, :] - avg[fin, None])
            dev = np.where(masks[fin], dev, 0.0)
            N = masks.shape[1]
            vals = np.empty(dev.shape[0])
            step = max(1, _ROW_BUDGET // N)
            for a in range(0, dev.shape[0], step):
                vals[a:a + step] = integrate_many(dev[a:a + step], f.n, f.L, delta, backend)
            res[fin] = norm * vals
        return res

    out = _uncentered_values(f, ladder, score)
    return OperatorResult(
        GridFunction(f.n, f.L, out),
        "maximal-sharp",
        _params(delta=delta, backend=resolve_backend(backend), ladder=ladder),
        f.digest(),
    )


def classical_maximal(
    f: GridFunction, kappa: float = 0.0, ladder: RadiusLadder | None = None
) -> OperatorResult:
    """Riemann-sum Lebesgue averages ``r**kappa / |B| * sum f * h**n`` over centered balls."""
    if not 0 <= kappa < f.n:
        raise OperatorError(f"kappa={kappa} outside [0, n) = [0, {f.n})")
    ladder = _ladder(f, ladder)
    centers = cell_centers(f.n, f.L)
    vol = cell_width(f.L) ** f.n
    out = np.zeros(f.values.size)
    for r in ladder.radii:
        masks = ball_masks(centers, [r], f.n, f.L, "center")
        with np.errstate(invalid="ignore"):
            sums = np.where(masks, f.values[None, :], 0.0).sum(axis=1) * vol
        out = np.maximum(out, r ** kappa / ball_volume(f.n, r) * sums)
    return OperatorResult(
        GridFunction(f.n, f.L, out),
        "classical-maximal",
        _params(kappa=kappa, ladder=ladder),
        f.digest(),
    )


def _floor(L: int, distance_floor: float | None) -> float:
    floor = cell_width(L) / 2 if distance_floor is None else float(distance_floor)
    if not floor > 0:
        raise OperatorError("distance floor must be positive")
    return floor


def riesz_kernel_rows(
    f: GridFunction, delta: float, alpha: float, rows: np.ndarray, distance_floor: float
) -> np.ndarray:
    """Integrands ``f(y) * max(|x - y|, floor)**(alpha - delta)`` for the cells ``rows``."""
    d = center_distance_matrix(f.n, f.L, rows)
    kernel = np.maximum(d, distance_floor) ** (alpha - delta)
    with np.errstate(invalid="ignore"):
        g = f.values[None, :] * kernel
    return g


def riesz_potential(
    f: GridFunction,
    delta: float,
    alpha: float,
    backend: str = DYADIC,
    distance_floor: float | None = None,
) -> OperatorResult:
    """Choquet integral in ``y`` of ``f(y) * max(|x - y|, floor)**(alpha - delta)``."""
    check_delta(delta, f.n)
    if not 0 < alpha < delta:
        raise OperatorError(f"alpha={alpha} outside (0, delta) = (0, {delta})")
    floor = _floor(f.L, distance_floor)
    N = f.values.size
    out = np.empty(N)
    step = max(1, _ROW_BUDGET // N)
    for a in range(0, N, step):
        rows = np.arange(a, min(N, a + step))
        g = riesz_kernel_rows(f, delta, alpha, rows, floor)
        out[rows] = integrate_many(g, f.n, f.L, delta, backend)
    return OperatorResult(
        GridFunction(f.n, f.L, out),
        "riesz",
        _params(delta=delta, alpha=alpha, backend=resolve_backend(backend), distance_floor=floor),
        f.digest(),
    )


def riesz_split(
    f: GridFunction,
    delta: float,
    alpha: float,
    r: float,
    distance_floor: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Dyadic Riesz integrals restricted to ``B(x, r)`` and to its complement, per cell."""
    check_delta(delta, f.n)
    floor = _floor(f.L, distance_floor)
    N = f.values.size
    inner = np.empty(N)
    outer = np.empty(N)
    centers = cell_centers(f.n, f.L)
    step = max(1, _ROW_BUDGET // N)
    for a in range(0, N, step):
        rows = np.arange(a, min(N, a + step))
        g = riesz_kernel_rows(f, delta, alpha, rows, floor)
        mask = ball_masks(centers[rows], [r], f.n, f.L, "center")
        inner[rows] = integrate_rows(np.where(mask, g, 0.0), f.n, f.L, delta)
        outer[rows] = integrate_rows(np.where(mask, 0.0, g), f.n, f.L, delta)
    return inner, outer


def classical_riesz(
    f: GridFunction, alpha: float, distance_floor: float | None = None
) -> OperatorResult:
    """Riemann sum of ``f(y) * max(|x - y|, floor)**(alpha - n) * h**n``."""
    if not 0 < alpha < f.n:
        raise OperatorError(f"alpha={alpha} outside (0, n) = (0, {f.n})")
    floor = _floor(f.L, distance_floor)
    vol = cell_width(f.L) ** f.n
    N = f.values.size
    out = np.empty(N)
    step = max(1, _ROW_BUDGET // N)
    for a in range(0, N, step):
        rows = np.arange(a, min(N, a + step))
        d = center_distance_matrix(f.n, f.L, rows)
        with np.errstate(invalid="ignore"):
            out[rows] = (f.values[None, :] * np.maximum(d, floor) ** (alpha - f.n)).sum(axis=1) * vol
    return OperatorResult(
        GridFunction(f.n, f.L, out),
        "classical-riesz",
        _params(alpha=alpha, distance_floor=floor),
        f.digest(),
    )


@lru_cache(maxsize=32)
def grid_ball_constant(n: int, L: int, delta: float) -> float:
    """Largest ``Hd(ball) / rho**delta`` over discretized balls of radius ``rho >= h``.

    Balls are the cells whose centers lie within ``rho`` of a cell center. The
    ratio only changes at center distances, so closed balls at every distance
    ``d >= h`` (plus the one-cell ball, ratio at most 1) cover all cases. This
    is the grid's stand-in for the exact value ``H(B(x, r)) = r**delta``.
    """
    check_delta(delta, n)
    h = cell_width(L)
    d = center_distance_matrix(n, L)
    radii = np.unique(np.round(d[d >= h * (1 - 1e-9)], 12))
    perm = morton_perm(n, L)
    dm = d[:, perm]
    N = dm.shape[0]
    best = 1.0
    step = max(1, (1 << 22) // (N * N))
    for a in range(0, radii.size, step):
        rr = radii[a:a + step]
        masks = dm[None, :, :] <= rr[:, None, None] * (1 + 1e-12)
        vals = dyadic_values_morton(masks.reshape(-1, N), n, L, delta).reshape(rr.size, N)
        best = max(best, float((vals / (rr ** delta)[:, None]).max()))
    return best


def ladder_ball_constant(n: int, L: int, delta: float, ladder: RadiusLadder | None = None) -> float:
    """Largest ``Hd(ball) / r**delta`` over the centered ladder balls."""
    ladder = ladder or RadiusLadder.default(n, L)
    centers = cell_centers(n, L)
    perm = morton_perm(n, L)
    best = 0.0
    for r in ladder.radii:
        m = ball_masks(centers, [r], n, L, "center")[:, perm]
        best = max(best, float(dyadic_values_morton(m, n, L, delta).max()) / r ** delta)
    return best


def candidate_ball_constant(n: int, L: int, delta: float, ladder: RadiusLadder | None = None) -> float:
    """Largest ``Hd(ball) / r**delta`` over every ball of the uncentered candidate family."""
    ladder = ladder or RadiusLadder.default(n, L)
    centers = uncentered_centers(n, L, ladder.stride, True)
    perm = morton_perm(n, L)
    best = 0.0
    for r in ladder.radii:
        m = ball_masks(centers, [r], n, L, "center")[:, perm]
        best = max(best, float(dyadic_values_morton(m, n, L, delta).max()) / r ** delta)
    return best


def check_kernel_range(delta: float, alpha: float, n: int) -> None:
    if not 0 < delta <= n:
        raise ContentError(f"delta={delta} outside (0, {n}]")
    if not 0 < alpha < delta:
        raise OperatorError(f"alpha={alpha} outside (0, {delta})")
