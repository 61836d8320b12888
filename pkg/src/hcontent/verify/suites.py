"""Inequality suites: every property turned into per-instance lhs/rhs records.

A record holds ``lhs``, ``rhs``, the relation (``<=`` against ``cap * rhs``, or
``==``) and the ratio. Inequality records pass when
``lhs <= cap * rhs * (1 + tol)``; identity records when the relative gap is
at most ``tol``. Boundedness suites report the ratio of output and input
quasi-norms and, optionally, its stability under one level of refinement.
"""

from __future__ import annotations

import csv
import io
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .. import __version__
from ..choquet import (
    BALL_GREEDY,
    DYADIC,
    choquet_integral,
    choquet_integral_power,
    distribution,
    power_norm,
)
from ..content import (
    ContentParams,
    ball_content_upper,
    certificate_cost,
    comparability_bracket,
    dyadic_content,
)
from ..geometry import GridFunction, GridSet, cell_width
from ..operators import (
    RadiusLadder,
    centered_ball_integrals,
    classical_maximal,
    classical_riesz,
    maximal_centered,
    maximal_sharp,
    maximal_uncentered,
    riesz_potential,
    riesz_split,
)
from . import constants as K
from .instances import (
    as_function,
    generate,
    mixed_corpus,
    random_function,
    random_set,
)

EXACT_TOL = 1e-12
POINTWISE_TOL = 1e-9
STABILITY_TOL = 0.25


class SuiteError(ValueError):
    """Unknown suite or parameters outside a result's hypotheses."""


@dataclass(frozen=True)
class SuiteConfig:
    n: int = 2
    L: int = 3
    delta: float | None = None
    delta1: float | None = None
    delta2: float | None = None
    kappa: float | None = None
    alpha: float | None = None
    p: float | None = None
    q: float | None = None
    samples: int = 100
    seed: int = 0
    backend: str = DYADIC
    workers: int = 1
    cap: float | None = None
    base_level: int | None = None
    refine: bool = False
    stride: int = 1
    grid: tuple | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.grid is not None:
            d["grid"] = [dict(g) for g in self.grid]
        return d


@dataclass
class SuiteReport:
    suite: str
    records: list
    summary: dict
    environment: dict
    config: dict
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.summary["verdict"] == "pass"

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "type": "SuiteReport",
            "tool_version": __version__,
            "suite": self.suite,
            "config": self.config,
            "environment": self.environment,
            "summary": self.summary,
            "notes": self.notes,
            "records": self.records,
        }


# --------------------------------------------------------------------------
# records
# --------------------------------------------------------------------------


def _ratio(lhs: float, rhs: float) -> float:
    if rhs == 0:
        return 0.0 if lhs == 0 else math.inf
    return lhs / rhs


def le(lhs, rhs, cap: float, tol: float, **params) -> dict:
    """Record for ``lhs <= cap * rhs``."""
    lhs, rhs = float(lhs), float(rhs)
    ok = lhs == 0 or lhs <= cap * rhs * (1 + tol) or (math.isinf(lhs) and math.isinf(rhs))
    return {"relation": "<=", "lhs": lhs, "rhs": rhs, "ratio": _ratio(lhs, rhs),
            "cap": cap, "ok": bool(ok), "params": params}


def eq(lhs, rhs, tol: float, **params) -> dict:
    lhs, rhs = float(lhs), float(rhs)
    if lhs == rhs:
        gap = 0.0
    else:
        gap = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
    return {"relation": "==", "lhs": lhs, "rhs": rhs, "ratio": gap,
            "cap": tol, "ok": bool(gap <= tol), "params": params}


def pointwise(lhs: np.ndarray, rhs: np.ndarray, cap: float, tol: float, **params) -> dict:
    """Worst cell of ``lhs <= cap * rhs``."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), np.where(lhs > 0, np.inf, 0.0))
    i = int(np.argmax(r))
    bad = lhs > cap * rhs * (1 + tol)
    return {"relation": "<=", "lhs": float(lhs[i]), "rhs": float(rhs[i]), "ratio": float(r[i]),
            "cap": cap, "ok": bool(not bad.any()), "cell": i,
            "violations": int(bad.sum()), "params": params}


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _rng(suite: str, seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), zlib.crc32(suite.encode()), index]))


def _deltas(n: int) -> list[float]:
    return [d for d in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0) if d <= n]


def _pick_delta(cfg: SuiteConfig, rng) -> float:
    return cfg.delta if cfg.delta is not None else float(rng.choice(_deltas(cfg.n)))


def _dy(E: GridSet, delta: float) -> float:
    return dyadic_content(E, delta).value


def _int(f: GridFunction, delta: float, backend: str = DYADIC) -> float:
    return choquet_integral(f, delta, backend)


def _fn(rng, cfg: SuiteConfig) -> GridFunction:
    return random_function(rng, cfg.n, cfg.L)


# --------------------------------------------------------------------------
# content and integral suites
# --------------------------------------------------------------------------


def _c1(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    E = GridSet.empty(cfg.n, cfg.L)
    ball = ball_content_upper(E, ContentParams(delta=delta)).value
    return [eq(_dy(E, delta), 0.0, 0.0, delta=delta, backend=DYADIC),
            eq(ball, 0.0, 0.0, delta=delta, backend=BALL_GREEDY)]


def _c2(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    B = random_set(rng, cfg.n, cfg.L)
    A = B & random_set(rng, cfg.n, cfg.L)
    out = [le(_dy(A, delta), _dy(B, delta), 1.0, EXACT_TOL, delta=delta, backend=DYADIC)]
    if B.count <= 64:
        params = ContentParams(delta=delta)
        cert = ball_content_upper(B, params)
        a = ball_content_upper(A, params, seed_cover=cert.cover)
        out.append(le(a.value, certificate_cost(cert.cover, delta), 1.0, EXACT_TOL,
                      delta=delta, backend=BALL_GREEDY))
    return out


def _c4(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    sets = [random_set(rng, cfg.n, cfg.L) for _ in range(int(rng.integers(2, 6)))]
    U = sets[0]
    for S in sets[1:]:
        U = U | S
    return [le(_dy(U, delta), sum(_dy(S, delta) for S in sets), 1.0, EXACT_TOL, delta=delta)]


def _monotone_chain(cfg, rng, increasing: bool):
    delta = _pick_delta(cfg, rng)
    m = int(rng.integers(2, 7))
    base = random_set(rng, cfg.n, cfg.L, density=0.05)
    chain = [base]
    for _ in range(m - 1):
        chain.append(chain[-1] | random_set(rng, cfg.n, cfg.L, density=0.1))
    if not increasing:
        chain = chain[::-1]
    vals = [_dy(S, delta) for S in chain]
    out = []
    for a, b in zip(vals, vals[1:]):
        out.append(le(a, b, 1.0, EXACT_TOL, delta=delta) if increasing
                   else le(b, a, 1.0, EXACT_TOL, delta=delta))
    total = chain[0]
    for S in chain[1:]:
        total = (total | S) if increasing else (total & S)
    out.append(eq(_dy(total, delta), vals[-1], 0.0, delta=delta))
    return out


def _c5(cfg, rng, i):
    return _monotone_chain(cfg, rng, increasing=False)


def _c6(cfg, rng, i):
    return _monotone_chain(cfg, rng, increasing=True)


def _strong_subadditivity(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    A = random_set(rng, cfg.n, cfg.L)
    B = random_set(rng, cfg.n, cfg.L)
    return [le(_dy(A | B, delta) + _dy(A & B, delta), _dy(A, delta) + _dy(B, delta),
               1.0, EXACT_TOL, delta=delta)]


def _i1(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    f = _fn(rng, cfg)
    a = float(rng.uniform(0, 10))
    return [eq(_int(f.scale(a), delta), a * _int(f, delta), EXACT_TOL, delta=delta, a=a)]


def _i2(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    f = _fn(rng, cfg) if rng.random() < 0.8 else GridFunction.constant(cfg.n, cfg.L, 0.0)
    zero_integral = float(_int(f, delta) == 0)
    zero_function = float(not f.values.any())
    return [eq(zero_integral, zero_function, 0.0, delta=delta)]


def _i3(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    E = random_set(rng, cfg.n, cfg.L)
    return [eq(_int(GridFunction.indicator(E), delta), _dy(E, delta), EXACT_TOL, delta=delta)]


def _i4(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    f = _fn(rng, cfg)
    B = random_set(rng, cfg.n, cfg.L)
    A = B & random_set(rng, cfg.n, cfg.L)
    return [le(_int(f.restrict(A), delta), _int(f.restrict(B), delta), 1.0, EXACT_TOL, delta=delta)]


def _i5(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    g = _fn(rng, cfg)
    f = GridFunction(cfg.n, cfg.L, g.values * rng.random(g.values.size))
    return [le(_int(f, delta), _int(g, delta), 1.0, EXACT_TOL, delta=delta)]


def _i6(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    f, g = _fn(rng, cfg), _fn(rng, cfg)
    cap = cfg.cap if cfg.cap is not None else K.quasi_subadditivity().value
    return [le(_int(f + g, delta, cfg.backend), _int(f, delta, cfg.backend) + _int(g, delta, cfg.backend),
               cap, EXACT_TOL, delta=delta)]


def _i7(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    p = cfg.p if cfg.p is not None else float(rng.uniform(1.1, 4.0))
    if p <= 1:
        raise SuiteError(f"Hoelder needs p > 1, got p={p}")
    q = p / (p - 1)
    f, g = _fn(rng, cfg), _fn(rng, cfg)
    rhs = power_norm(f, p, delta) * power_norm(g, q, delta)
    return [le(_int(f * g, delta), rhs, K.holder().value, EXACT_TOL, delta=delta, p=p, q=q)]


def _power_identity(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    p = cfg.p if cfg.p is not None else float(rng.choice([0.5, 1.0, 1.5, 2.0, 3.0]))
    f = _fn(rng, cfg)
    return [eq(choquet_integral_power(f, p, delta), _int(f.power(p), delta), EXACT_TOL, delta=delta, p=p)]


def _two_step(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    A = random_set(rng, cfg.n, cfg.L)
    B = random_set(rng, cfg.n, cfg.L) - A
    f = GridFunction(cfg.n, cfg.L, 2.0 * A.cells + 1.0 * B.cells)
    dist = distribution(f, delta)
    out = [eq(_int(f, delta), _dy(A | B, delta) + _dy(A, delta), EXACT_TOL, delta=delta)]
    if A.count and B.count:
        out.append(eq(float(dist.contents[0]), _dy(A | B, delta), 0.0, delta=delta))
        out.append(eq(float(dist.contents[1]), _dy(A, delta), 0.0, delta=delta))
    return out


def _sublinearity(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    fs = [_fn(rng, cfg) for _ in range(int(rng.integers(2, 9)))]
    total = fs[0]
    for f in fs[1:]:
        total = total + f
    return [le(_int(total, delta), sum(_int(f, delta) for f in fs),
               K.dyadic_sublinearity().value, EXACT_TOL, delta=delta, m=len(fs))]


def _thm_3_6(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    fs = [_fn(rng, cfg) for _ in range(int(rng.integers(2, 5)))]
    total = fs[0]
    for f in fs[1:]:
        total = total + f
    cap = cfg.cap if cfg.cap is not None else K.ball_sublinearity(cfg.n, delta).value
    return [le(_int(total, delta, BALL_GREEDY), sum(_int(f, delta, BALL_GREEDY) for f in fs),
               cap, EXACT_TOL, delta=delta, m=len(fs))]


def _embedding_deltas(cfg, rng):
    if cfg.delta1 is not None and cfg.delta2 is not None:
        d1, d2 = cfg.delta1, cfg.delta2
    else:
        ds = _deltas(cfg.n)
        if len(ds) < 2:
            ds = [cfg.n / 2, cfg.n]
        a, b = sorted(rng.choice(len(ds), size=2, replace=False))
        d1, d2 = ds[a], ds[b]
    if not 0 < d1 < d2 <= cfg.n:
        raise SuiteError(f"embedding needs 0 < delta1 < delta2 <= n; got delta1={d1}, delta2={d2}, n={cfg.n}")
    return float(d1), float(d2)


def _prop_3_5(cfg, rng, i):
    d1, d2 = _embedding_deltas(cfg, rng)
    f = _fn(rng, cfg)
    lhs = _int(f, d2) ** (1 / d2)
    rhs = choquet_integral_power(f, d1 / d2, d1) ** (1 / d1)
    return [le(lhs, rhs, K.embedding(d1, d2).value, EXACT_TOL, delta1=d1, delta2=d2)]


def _quasi_norm(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    p = cfg.p if cfg.p is not None else float(rng.choice([1.0, 1.5, 2.0, 3.0]))
    if p < 1:
        raise SuiteError(f"quasi-norm needs p >= 1, got p={p}")
    f, g = _fn(rng, cfg), _fn(rng, cfg)
    a = float(rng.uniform(0, 5))
    nf, ng = power_norm(f, p, delta), power_norm(g, p, delta)
    return [le(power_norm(f + g, p, delta), nf + ng, K.quasi_norm(p).value, EXACT_TOL, delta=delta, p=p),
            eq(power_norm(f.scale(a), p, delta), a * nf, 1e-12, delta=delta, p=p, a=a)]


def _cross_backend(cfg, rng, i):
    delta = _pick_delta(cfg, rng)
    f = _fn(rng, cfg)
    c_low, c_high = comparability_bracket(cfg.n, delta)
    ball, dy = _int(f, delta, BALL_GREEDY), _int(f, delta)
    g = _fn(rng, cfg)
    k_ball = _ratio(_int(f + g, delta, BALL_GREEDY), ball + _int(g, delta, BALL_GREEDY))
    k_dy = _ratio(_int(f + g, delta), dy + _int(g, delta))
    return [le(ball, dy, c_high, EXACT_TOL, delta=delta, side="upper"),
            le(c_low * dy, ball, 1.0, EXACT_TOL, delta=delta, side="lower"),
            le(k_ball, k_dy, c_high / c_low, EXACT_TOL, delta=delta, side="i6-constant-upper"),
            le(k_dy, k_ball, c_high / c_low, EXACT_TOL, delta=delta, side="i6-constant-lower")]


# --------------------------------------------------------------------------
# pointwise operator suites
# --------------------------------------------------------------------------


def _corpus_function(cfg, rng, i, delta=None) -> tuple[GridFunction, str]:
    spec = mixed_corpus(cfg.n, cfg.L, i + 1, cfg.seed, delta, cfg.base_level)[i]
    return as_function(generate(spec), rng), spec.kind


def _gate_maximal(n, delta, kappa):
    if not 0 < delta <= n:
        raise SuiteError(f"delta={delta} must lie in (0, n] = (0, {n}]")
    if not 0 <= kappa < delta:
        raise SuiteError(f"kappa={kappa} must lie in [0, delta) = [0, {delta})")


def _comp(cfg, rng, i):
    delta = cfg.delta if cfg.delta is not None else float(cfg.n)
    kappa = cfg.kappa if cfg.kappa is not None else 0.0
    _gate_maximal(cfg.n, delta, kappa)
    f, kind = _corpus_function(cfg, rng, i, delta)
    lad = RadiusLadder.default(cfg.n, cfg.L, cfg.stride)
    mc = maximal_centered(f, delta, kappa, lad).output.values
    mu = maximal_uncentered(f, delta, kappa, lad).output.values
    cap = K.maximal_comparison(delta, kappa).value
    return [pointwise(mc, mu, 1.0, POINTWISE_TOL, side="centered<=uncentered", kind=kind),
            pointwise(mu, mc, cap, POINTWISE_TOL, side="uncentered<=2^(delta-kappa)centered", kind=kind)]


def _ladder_monotone(cfg, rng, i):
    delta = cfg.delta if cfg.delta is not None else float(cfg.n)
    kappa = cfg.kappa if cfg.kappa is not None else 0.0
    _gate_maximal(cfg.n, delta, kappa)
    f, kind = _corpus_function(cfg, rng, i, delta)
    lad = RadiusLadder.default(cfg.n, cfg.L, cfg.stride)
    out = []
    for op in (maximal_centered, maximal_uncentered):
        a = op(f, delta, kappa, lad).output.values
        b = op(f, delta, kappa, lad.refined()).output.values
        out.append(pointwise(a, b, 1.0, 0.0, operator=op.__name__, kind=kind))
    return out


PROP_4_5_GRID = tuple(
    {"delta": d, "kappa": k, "q": q}
    for d, k, q in [
        (2.0, 0.5, 1.5), (2.0, 0.5, 3.0), (2.0, 1.0, 1.5), (2.0, 1.5, 1.2),
        (1.5, 0.5, 2.0), (1.5, 0.75, 1.5), (1.0, 0.25, 2.0), (1.0, 0.5, 1.5),
        (0.5, 0.25, 1.5), (2.0, 0.25, 6.0), (1.5, 1.0, 1.25), (1.0, 0.75, 1.2),
    ]
)

LEMMA_5_1_GRID = tuple(
    {"delta": d, "alpha": a, "kappa": k, "p": p}
    for d, a, k, p in [
        (2.0, 1.0, 0.0, 1.0), (2.0, 1.0, 0.5, 1.5), (2.0, 0.5, 0.0, 2.0), (2.0, 1.5, 1.0, 1.2),
        (1.5, 0.5, 0.25, 1.0), (1.5, 1.0, 0.5, 1.25), (1.0, 0.5, 0.0, 1.5), (1.0, 0.25, 0.1, 3.0),
        (2.0, 0.5, 0.25, 3.0), (1.5, 0.75, 0.0, 1.5), (0.5, 0.25, 0.0, 1.5), (2.0, 1.0, 0.0, 1.8),
    ]
)


def _gate_prop_4_5(n, delta, kappa, q):
    if not 0 < delta <= n:
        raise SuiteError(f"delta={delta} must lie in (0, n] = (0, {n}]")
    if not 0 < kappa < delta:
        raise SuiteError(f"kappa={kappa} must lie in (0, delta) = (0, {delta})")
    if not 1 < q < delta / kappa:
        raise SuiteError(f"q={q} must lie in (1, delta/kappa) = (1, {delta / kappa:g})")


def _gate_hedberg(n, delta, alpha, kappa, p):
    if not 0 < delta <= n:
        raise SuiteError(f"delta={delta} must lie in (0, n] = (0, {n}]")
    if not 0 < alpha < delta:
        raise SuiteError(f"alpha={alpha} must lie in (0, delta) = (0, {delta})")
    if not 0 <= kappa < alpha:
        raise SuiteError(f"kappa={kappa} must lie in [0, alpha) = [0, {alpha})")
    if not 1 <= p < delta / alpha:
        raise SuiteError(f"p={p} must lie in [1, delta/alpha) = [1, {delta / alpha:g})")


def _grid(cfg, default, keys):
    if cfg.grid is not None:
        return [dict(g) for g in cfg.grid]
    if all(getattr(cfg, k) is not None for k in keys):
        return [{k: getattr(cfg, k) for k in keys}]
    return [g for g in default if g["delta"] <= cfg.n]


def _maximal_from_table(table, radii, kappa, delta):
    w = np.array([r ** (kappa - delta) for r in radii])
    return (table * w[None, :]).max(axis=1)


def _prop_4_5(cfg, rng, i):
    f = _fn(rng, cfg)
    lad = RadiusLadder.default(cfg.n, cfg.L)
    out = []
    for g in _grid(cfg, PROP_4_5_GRID, ("delta", "kappa", "q")):
        delta, kappa, q = g["delta"], g["kappa"], g["q"]
        _gate_prop_4_5(cfg.n, delta, kappa, q)
        table = centered_ball_integrals(f, delta, lad)
        lhs = _maximal_from_table(table, lad.radii, kappa, delta)
        m = _maximal_from_table(table, lad.radii, 0.0, delta)
        norm = choquet_integral_power(f, q, delta)
        rhs = norm ** (kappa / delta) * m ** (1 - q * kappa / delta)
        cap = K.fractional_pointwise(cfg.n, cfg.L, delta, kappa, q).value
        out.append(pointwise(lhs, rhs, cap, POINTWISE_TOL, **g))
    return out


def _lemma_5_1(cfg, rng, i):
    f = _fn(rng, cfg)
    lad = RadiusLadder.default(cfg.n, cfg.L)
    out = []
    for g in _grid(cfg, LEMMA_5_1_GRID, ("delta", "alpha", "kappa", "p")):
        delta, alpha, kappa, p = g["delta"], g["alpha"], g["kappa"], g["p"]
        _gate_hedberg(cfg.n, delta, alpha, kappa, p)
        table = centered_ball_integrals(f, delta, lad)
        m = _maximal_from_table(table, lad.radii, kappa, delta)
        r = riesz_potential(f, delta, alpha).output.values
        norm = choquet_integral_power(f, p, delta)
        rhs = m ** ((delta - p * alpha) / (delta - kappa * p)) * norm ** ((alpha - kappa) / (delta - kappa * p))
        cap = K.hedberg(cfg.n, cfg.L, delta, alpha, kappa, p).value
        out.append(pointwise(r, rhs, cap, POINTWISE_TOL, **g))
    return out


def _hedberg_split(cfg, rng, i):
    """Ball part and tail part of the Riesz potential, each against its own constant."""
    E = random_set(rng, cfg.n, cfg.L)
    f = GridFunction.indicator(E)
    lad = RadiusLadder.default(cfg.n, cfg.L)
    h = cell_width(cfg.L)
    out = []
    for g in _grid(cfg, LEMMA_5_1_GRID, ("delta", "alpha", "kappa", "p")):
        delta, alpha, kappa, p = g["delta"], g["alpha"], g["kappa"], g["p"]
        _gate_hedberg(cfg.n, delta, alpha, kappa, p)
        m = _maximal_from_table(centered_ball_integrals(f, delta, lad), lad.radii, kappa, delta)
        norm = choquet_integral_power(f, p, delta) ** (1 / p)
        A = K.hedberg_ball_part(delta, alpha, kappa).value
        B = K.hedberg_tail_part(cfg.n, cfg.L, delta, alpha, p).value
        r = h
        while r <= 2 * math.sqrt(cfg.n):
            inner, outer = riesz_split(f, delta, alpha, r)
            out.append(pointwise(inner, r ** (alpha - kappa) * m, A, POINTWISE_TOL, part="ball", r=r, **g))
            out.append(pointwise(outer, np.full_like(outer, norm * r ** (alpha - delta / p)), B,
                                 POINTWISE_TOL, part="tail", r=r, **g))
            r *= 2
    return out


def _sharp_pointwise(cfg, rng, i):
    n = cfg.n
    f, kind = _corpus_function(cfg, rng, i, float(n))
    lad = RadiusLadder.default(n, cfg.L, cfg.stride)
    s = maximal_sharp(f, float(n), lad).output.values
    u = maximal_uncentered(f, float(n), 0.0, lad).output.values
    rec = pointwise(s, u, K.sharp_bound_grid(n, cfg.L, cfg.stride).value, POINTWISE_TOL, kind=kind)
    rec["above_paper_cap"] = int((s > K.sharp_bound().value * u * (1 + POINTWISE_TOL)).sum())
    return [rec]


def _two_sided(a: np.ndarray, b: np.ndarray, **params) -> dict:
    mask = (a > 0) & (b > 0) & np.isfinite(a) & np.isfinite(b)
    if not mask.any():
        return {"relation": "bracket", "lhs": 0.0, "rhs": 0.0, "ratio": 0.0, "min_ratio": 0.0,
                "cap": math.inf, "ok": True, "params": params}
    r = a[mask] / b[mask]
    hi, lo = float(r.max()), float(r.min())
    ok = math.isfinite(hi) and lo > 0 and not np.any((a > 0) != (b > 0))
    return {"relation": "bracket", "lhs": hi, "rhs": 1.0, "ratio": hi, "min_ratio": lo,
            "cap": math.inf, "ok": bool(ok), "params": params}


def _compare_classical(cfg, rng, i):
    f, kind = _corpus_function(cfg, rng, i, float(cfg.n))
    kappa = cfg.kappa if cfg.kappa is not None else 0.0
    lad = RadiusLadder.default(cfg.n, cfg.L)
    a = maximal_centered(f, float(cfg.n), kappa, lad).output.values
    b = classical_maximal(f, kappa, lad).output.values
    return [_two_sided(a, b, kappa=kappa, kind=kind)]


def _riesz_classical(cfg, rng, i):
    f, kind = _corpus_function(cfg, rng, i, float(cfg.n))
    alpha = cfg.alpha if cfg.alpha is not None else cfg.n / 2
    a = riesz_potential(f, float(cfg.n), alpha).output.values
    b = classical_riesz(f, alpha).output.values
    return [_two_sided(a, b, alpha=alpha, kind=kind)]


# --------------------------------------------------------------------------
# boundedness suites
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Boundedness:
    """Operator, output exponent and output content dimension of one result."""

    apply: object
    exponent: object
    lhs_delta: object
    gate: object
    defaults: dict


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise SuiteError(msg)


def _gate_43(n, d, k, a, p):
    _need(0 < d <= n, f"delta={d} must lie in (0, n] = (0, {n}]")
    _need(p > d / n, f"p={p} must lie in (delta/n, inf) = ({d / n:g}, inf)")


def _gate_46(n, d, k, a, p):
    _need(0 < d <= n, f"delta={d} must lie in (0, n] = (0, {n}]")
    _need(0 <= k < d, f"kappa={k} must lie in [0, delta) = [0, {d})")
    hi = d / k if k > 0 else math.inf
    _need(d / n < p < hi, f"p={p} must lie in (delta/n, delta/kappa) = ({d / n:g}, {hi:g})")


def _gate_47(n, d, k, a, p):
    _need(0 < d < n, f"delta={d} must lie in (0, n) = (0, {n})")
    _need(0 <= k < d, f"kappa={k} must lie in [0, delta) = [0, {d})")
    hi = d / k if k > 0 else math.inf
    _need(1 < p < hi, f"p={p} must lie in (1, delta/kappa) = (1, {hi:g})")


def _gate_52(n, d, k, a, p):
    _need(0 < d <= n, f"delta={d} must lie in (0, n] = (0, {n}]")
    _need(0 < a < d, f"alpha={a} must lie in (0, delta) = (0, {d})")
    _need(d / n < p < d / a, f"p={p} must lie in (delta/n, delta/alpha) = ({d / n:g}, {d / a:g})")


def _gate_54(n, d, k, a, p):
    _gate_52(n, d, k, a, p)
    _need(0 <= k < a, f"kappa={k} must lie in [0, alpha) = [0, {a})")


def _gate_55(n, d, k, a, p):
    _need(0 < d < n, f"delta={d} must lie in (0, n) = (0, {n})")
    _need(0 < a < d, f"alpha={a} must lie in (0, delta) = (0, {d})")
    _need(1 < p < d / a, f"p={p} must lie in (1, delta/alpha) = (1, {d / a:g})")


def _lad(f, stride):
    return RadiusLadder.default(f.n, f.L, stride)


BOUNDEDNESS = {
    "thm-4.3": Boundedness(
        lambda f, d, k, a, s: maximal_centered(f, float(f.n), 0.0, _lad(f, s)).output,
        lambda d, k, a, p: p, lambda d, k, a, p: d, _gate_43,
        {"delta": 1.5, "p": 1.5}),
    "thm-4.6": Boundedness(
        lambda f, d, k, a, s: maximal_centered(f, float(f.n), k, _lad(f, s)).output,
        lambda d, k, a, p: d * p / (d - p * k), lambda d, k, a, p: d, _gate_46,
        {"delta": 1.5, "kappa": 0.5, "p": 1.5}),
    "thm-4.7": Boundedness(
        lambda f, d, k, a, s: maximal_centered(f, d, k, _lad(f, s)).output,
        lambda d, k, a, p: d * p / (d - p * k), lambda d, k, a, p: d, _gate_47,
        {"delta": 1.5, "kappa": 0.5, "p": 1.5}),
    "cor-4.9": Boundedness(
        lambda f, d, k, a, s: maximal_uncentered(f, float(f.n), k, _lad(f, s)).output,
        lambda d, k, a, p: d * p / (d - p * k), lambda d, k, a, p: d, _gate_46,
        {"delta": 1.5, "kappa": 0.5, "p": 1.5}),
    "prop-4.10": Boundedness(
        lambda f, d, k, a, s: maximal_sharp(f, float(f.n), _lad(f, s)).output,
        lambda d, k, a, p: p, lambda d, k, a, p: d, _gate_43,
        {"delta": 1.5, "p": 1.5}),
    "thm-5.2": Boundedness(
        lambda f, d, k, a, s: riesz_potential(f, float(f.n), a).output,
        lambda d, k, a, p: d * p / (d - p * a), lambda d, k, a, p: d, _gate_52,
        {"delta": 1.5, "alpha": 0.5, "p": 1.0}),
    "thm-5.4": Boundedness(
        lambda f, d, k, a, s: riesz_potential(f, float(f.n), a).output,
        lambda d, k, a, p: p * (d - k * p) / (d - p * a), lambda d, k, a, p: d - k * p, _gate_54,
        {"delta": 1.5, "alpha": 0.5, "kappa": 0.25, "p": 1.0}),
    "thm-5.5": Boundedness(
        lambda f, d, k, a, s: riesz_potential(f, d, a).output,
        lambda d, k, a, p: d * p / (d - p * a), lambda d, k, a, p: d, _gate_55,
        {"delta": 1.5, "alpha": 0.5, "p": 1.5}),
}


def _bparams(suite: str, cfg: SuiteConfig) -> tuple[float, float, float, float]:
    dflt = BOUNDEDNESS[suite].defaults
    d = cfg.delta if cfg.delta is not None else dflt["delta"]
    k = cfg.kappa if cfg.kappa is not None else dflt.get("kappa", 0.0)
    a = cfg.alpha if cfg.alpha is not None else dflt.get("alpha", 0.0)
    p = cfg.p if cfg.p is not None else dflt["p"]
    return float(d), float(k), float(a), float(p)


def boundedness_ratio(suite: str, f: GridFunction, params, stride: int = 1) -> tuple[float, float]:
    """Output quasi-norm at the result's exponent and input quasi-norm at ``p``."""
    d, k, a, p = params
    b = BOUNDEDNESS[suite]
    out = b.apply(f, d, k, a, stride)
    lhs = power_norm(out, b.exponent(d, k, a, p), b.lhs_delta(d, k, a, p))
    rhs = power_norm(f, p, d)
    return lhs, rhs


def _boundedness_records(suite: str, cfg: SuiteConfig, index: int, params, L: int) -> dict:
    d = params[0]
    base = cfg.base_level if cfg.base_level is not None else min(cfg.L, 3)
    spec = mixed_corpus(cfg.n, L, index + 1, cfg.seed, d, min(base, L))[index]
    rng = _rng(suite, cfg.seed, index)
    f = as_function(generate(spec), rng)
    lhs, rhs = boundedness_ratio(suite, f, params, cfg.stride)
    cap = cfg.cap if cfg.cap is not None else math.inf
    rec = le(lhs, rhs, cap, POINTWISE_TOL, kind=spec.kind, L=L, digest=f.digest())
    rec["ok"] = bool(rec["ok"] and math.isfinite(rec["ratio"]))
    return rec


# --------------------------------------------------------------------------
# registry and runner
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteDef:
    run: object
    cap: object
    description: str


EXACT_SUITES = {
    "c1": SuiteDef(_c1, lambda c: K.Cap(0.0, K.PAPER), "content of the empty set is zero"),
    "c2": SuiteDef(_c2, lambda c: K.Cap(1.0, K.PAPER), "monotonicity of the content"),
    "c4": SuiteDef(_c4, lambda c: K.Cap(1.0, K.PAPER), "finite subadditivity"),
    "c5": SuiteDef(_c5, lambda c: K.Cap(1.0, K.PAPER), "decreasing chains: monotone, limit attained"),
    "c6": SuiteDef(_c6, lambda c: K.Cap(1.0, K.PAPER), "increasing chains: monotone, limit attained"),
    "strong-subadditivity": SuiteDef(_strong_subadditivity, lambda c: K.Cap(1.0, K.PAPER),
                                     "H(A u B) + H(A n B) <= H(A) + H(B)"),
    "i1": SuiteDef(_i1, lambda c: K.Cap(EXACT_TOL, K.PAPER), "positive homogeneity"),
    "i2": SuiteDef(_i2, lambda c: K.Cap(0.0, K.PAPER), "zero integral iff zero function"),
    "i3": SuiteDef(_i3, lambda c: K.Cap(EXACT_TOL, K.PAPER), "integral of an indicator is the content"),
    "i4": SuiteDef(_i4, lambda c: K.Cap(1.0, K.PAPER), "monotone in the domain"),
    "i5": SuiteDef(_i5, lambda c: K.Cap(1.0, K.PAPER), "monotone in the integrand"),
    "i6": SuiteDef(_i6, lambda c: K.quasi_subadditivity(), "quasi-subadditivity, constant 2"),
    "i7": SuiteDef(_i7, lambda c: K.holder(), "Hoelder inequality, constant 2"),
    "power-identity": SuiteDef(_power_identity, lambda c: K.Cap(EXACT_TOL, K.PAPER),
                               "change of variables for f**p"),
    "two-step": SuiteDef(_two_step, lambda c: K.Cap(EXACT_TOL, K.PAPER), "layer-cake of 2 chi_A + chi_B"),
    "sublinearity": SuiteDef(_sublinearity, lambda c: K.dyadic_sublinearity(), "dyadic sublinearity"),
    "thm-3.6": SuiteDef(_thm_3_6, lambda c: K.ball_sublinearity(c.n, c.delta or c.n),
                        "quasi-sublinearity for the ball content"),
    "prop-3.5": SuiteDef(_prop_3_5, lambda c: K.Cap(math.nan, K.PAPER, "(delta2/delta1)**(1/delta2)"),
                         "embedding between content dimensions"),
    "quasi-norm": SuiteDef(_quasi_norm, lambda c: K.quasi_norm(c.p or 2.0), "quasi-triangle inequality"),
    "cross-backend": SuiteDef(_cross_backend, lambda c: K.Cap(math.nan, K.DERIVED, "comparability bracket"),
                              "ball and dyadic integrals and constants within the bracket"),
}

POINTWISE_SUITES = {
    "comp": SuiteDef(_comp, lambda c: K.maximal_comparison(c.delta or c.n, c.kappa or 0.0),
                     "centered <= uncentered <= 2^(delta-kappa) centered"),
    "ladder-monotone": SuiteDef(_ladder_monotone, lambda c: K.Cap(1.0, K.PAPER),
                                "refining the ladder never decreases maximal functions"),
    "prop-4.5": SuiteDef(_prop_4_5, lambda c: K.Cap(math.nan, K.TRACED, "per grid point"),
                         "pointwise fractional maximal bound"),
    "lemma-5.1": SuiteDef(_lemma_5_1, lambda c: K.Cap(math.nan, K.TRACED, "per grid point"),
                          "pointwise Hedberg inequality"),
    "hedberg-split": SuiteDef(_hedberg_split, lambda c: K.Cap(math.nan, K.PAPER, "per part"),
                              "ball part and tail part of the Riesz potential"),
    "sharp-pointwise": SuiteDef(_sharp_pointwise, lambda c: K.sharp_bound_grid(c.n, c.L, c.stride),
                                "sharp maximal function <= (2 + 2K) uncentered maximal function; "
                                "records count cells above the continuum constant 4"),
    "compare-classical": SuiteDef(_compare_classical, lambda c: K.unbounded(),
                                  "content vs Lebesgue maximal function bracket"),
    "riesz-classical": SuiteDef(_riesz_classical, lambda c: K.unbounded(),
                                "content vs classical Riesz potential bracket"),
}

SUITES = sorted([*EXACT_SUITES, *POINTWISE_SUITES, *BOUNDEDNESS])


def _aliases() -> dict:
    out = {"i7-holder": "i7", "i6-quasi-subadditivity": "i6", "holder": "i7"}
    return out


def resolve_suite(suite: str) -> str:
    s = _aliases().get(suite, suite)
    if s not in SUITES:
        raise SuiteError(f"unknown suite {suite!r}; known suites: {', '.join(SUITES)}")
    return s


def _map(fn, items, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _summary(records: list, cap: K.Cap) -> dict:
    ineq = [r["ratio"] for r in records if r["relation"] != "=="]
    gaps = [r["ratio"] for r in records if r["relation"] == "=="]
    violations = sum(not r["ok"] for r in records)
    return {
        "count": len(records),
        "max_ratio": max(ineq) if ineq else None,
        "median_ratio": float(np.median(ineq)) if ineq else None,
        "max_identity_gap": max(gaps) if gaps else None,
        "cap": cap.value,
        "cap_provenance": cap.provenance,
        "cap_note": cap.note,
        "violations": violations,
        "verdict": "pass" if violations == 0 else "fail",
    }


def _environment(cfg: SuiteConfig) -> dict:
    return {
        "backend": cfg.backend,
        "n": cfg.n,
        "L": cfg.L,
        "ladder": "cell width * 2**(k/2) up to sqrt(n)",
        "distance_floor": "half cell width",
        "stride": cfg.stride,
        "exact_tolerance": EXACT_TOL,
        "pointwise_tolerance": POINTWISE_TOL,
    }


def run_suite(suite: str, config: SuiteConfig | None = None) -> SuiteReport:
    """Run one suite; records come back ordered by instance index."""
    suite = resolve_suite(suite)
    cfg = config or SuiteConfig()
    if cfg.samples < 1:
        raise SuiteError("samples must be positive")
    if suite in BOUNDEDNESS:
        return _run_boundedness(suite, cfg)
    table = EXACT_SUITES if suite in EXACT_SUITES else POINTWISE_SUITES
    sdef = table[suite]
    _validate(suite, cfg)

    def one(i):
        recs = sdef.run(cfg, _rng(suite, cfg.seed, i), i)
        for r in recs:
            r["index"] = i
        return recs

    records = [r for recs in _map(one, range(cfg.samples), cfg.workers) for r in recs]
    return SuiteReport(suite, records, _summary(records, sdef.cap(cfg)), _environment(cfg),
                       cfg.to_dict(), [sdef.description])


def _validate(suite: str, cfg: SuiteConfig) -> None:
    """Check explicit parameters against the hypotheses before any work."""
    if cfg.delta is not None and not 0 < cfg.delta <= cfg.n:
        raise SuiteError(f"delta={cfg.delta} must lie in (0, n] = (0, {cfg.n}]")
    if suite == "prop-4.5":
        for g in _grid(cfg, PROP_4_5_GRID, ("delta", "kappa", "q")):
            _gate_prop_4_5(cfg.n, g["delta"], g["kappa"], g["q"])
    elif suite in ("lemma-5.1", "hedberg-split"):
        for g in _grid(cfg, LEMMA_5_1_GRID, ("delta", "alpha", "kappa", "p")):
            _gate_hedberg(cfg.n, g["delta"], g["alpha"], g["kappa"], g["p"])
    elif suite == "i7" and cfg.p is not None and cfg.p <= 1:
        raise SuiteError(f"p={cfg.p} must lie in (1, inf) for the Hoelder inequality")
    elif suite == "quasi-norm" and cfg.p is not None and cfg.p < 1:
        raise SuiteError(f"p={cfg.p} must lie in [1, inf) for the quasi-norm")
    elif suite == "prop-3.5" and (cfg.delta1 is not None or cfg.delta2 is not None):
        d1, d2 = cfg.delta1, cfg.delta2
        if d1 is None or d2 is None or not 0 < d1 < d2 <= cfg.n:
            raise SuiteError(f"need 0 < delta1 < delta2 <= n = {cfg.n}; got delta1={d1}, delta2={d2}")
    elif suite in ("comp", "ladder-monotone"):
        _gate_maximal(cfg.n, cfg.delta if cfg.delta is not None else cfg.n, cfg.kappa or 0.0)


def _run_boundedness(suite: str, cfg: SuiteConfig) -> SuiteReport:
    params = _bparams(suite, cfg)
    BOUNDEDNESS[suite].gate(cfg.n, *params)
    levels = [cfg.L, cfg.L + 1] if cfg.refine else [cfg.L]
    records = []
    per_level = {}
    for L in levels:
        recs = _map(lambda i: _boundedness_records(suite, cfg, i, params, L), range(cfg.samples), cfg.workers)
        for i, r in enumerate(recs):
            r["index"] = i
        records.extend(recs)
        per_level[L] = max(r["ratio"] for r in recs)
    cap = K.Cap(cfg.cap, K.EMPIRICAL, "configured cap") if cfg.cap is not None else K.unbounded()
    summary = _summary(records, cap)
    summary["max_ratio_by_level"] = {str(k): v for k, v in per_level.items()}
    if cfg.refine:
        a, b = per_level[levels[0]], per_level[levels[1]]
        variation = abs(b - a) / max(a, b) if max(a, b) > 0 else 0.0
        summary["refinement_variation"] = variation
        summary["refinement_tolerance"] = STABILITY_TOL
        if not variation < STABILITY_TOL:
            summary["verdict"] = "fail"
    d, k, a, p = params
    b = BOUNDEDNESS[suite]
    env = _environment(cfg)
    env.update({"delta": d, "kappa": k, "alpha": a, "p": p,
                "output_exponent": b.exponent(d, k, a, p), "output_content_dimension": b.lhs_delta(d, k, a, p)})
    notes = ["empirical ratios are lower bounds on operator norms; no theorem is claimed verified"]
    return SuiteReport(suite, records, summary, env, cfg.to_dict(), notes)


# --------------------------------------------------------------------------
# constant sweeps
# --------------------------------------------------------------------------


def estimate_constant(suite: str, grid: list[dict], config: SuiteConfig | None = None) -> list[dict]:
    """Empirical constant at each parameter point; rows carry a trend flag.

    ``thm-4.3`` and the other boundedness suites vary their parameters via
    the grid entries; ``lemma-5.1`` reports the traced constant next to the
    observed maximum; ``i6`` reports the observed quasi-subadditivity ratio.
    """
    suite = resolve_suite(suite)
    cfg = config or SuiteConfig()
    rows = []
    for point in grid:
        c = replace(cfg, **{k: v for k, v in point.items() if k in SuiteConfig.__dataclass_fields__})
        if suite in ("lemma-5.1", "hedberg-split", "prop-4.5"):
            c = replace(c, grid=(dict(point),))
        rep = run_suite(suite, c)
        row = dict(point)
        row["max_ratio"] = rep.summary["max_ratio"]
        if suite == "lemma-5.1":
            row["traced_constant"] = K.hedberg(cfg.n, cfg.L, point["delta"], point["alpha"],
                                               point["kappa"], point["p"]).value
        row["verdict"] = rep.summary["verdict"]
        rows.append(row)
    key = "traced_constant" if suite == "lemma-5.1" else "max_ratio"
    for prev, row in zip([None] + rows[:-1], rows):
        if prev is None:
            row["trend"] = ""
        else:
            row["trend"] = "up" if row[key] > prev[key] else ("down" if row[key] < prev[key] else "flat")
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0].keys())
    for r in rows[1:]:
        keys.extend(k for k in r if k not in keys)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in keys})
    return buf.getvalue()


def report_csv(report: SuiteReport) -> str:
    rows = []
    for r in report.records:
        row = {"suite": report.suite, "index": r.get("index"), "relation": r["relation"],
               "lhs": r["lhs"], "rhs": r["rhs"], "ratio": r["ratio"], "cap": r["cap"], "ok": r["ok"]}
        row.update({f"param_{k}": v for k, v in sorted(r["params"].items())})
        rows.append(row)
    return rows_to_csv(rows)
