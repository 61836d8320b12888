"""Acceptance gate: one test per criterion, each printing a pass/fail line."""

import json
import time

import numpy as np
import pytest

from hcontent.cli import main
from hcontent.content import (
    ContentParams,
    ball_content_exact_small,
    ball_content_upper,
    comparability_bracket,
    dyadic_content,
)
from hcontent.geometry import Ball, GridFunction, GridSet, cell_width, discretize_ball
from hcontent.operators import RadiusLadder, maximal_centered, riesz_potential
from hcontent.verify import SuiteConfig, estimate_constant, run_suite
from hcontent.verify.suites import BOUNDEDNESS

import oracles

pytestmark = pytest.mark.slow


def report(capsys, number, title, ok, seconds, budget, detail=""):
    within = seconds < budget
    verdict = "PASS" if ok and within else "FAIL"
    line = f"[criterion {number}] {verdict}  {title}  ({seconds:.1f}s of {budget:.0f}s){'  ' + detail if detail else ''}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line
    assert within, line


def test_criterion_1_dyadic_dp_bitwise(capsys):
    t = time.perf_counter()
    rng = np.random.default_rng(2024)
    mismatches = 0
    for k in range(200):
        n = 1 + k % 2
        L = 1 + (k // 2) % 3
        E = GridSet(n, L, rng.random(1 << (n * L)) < rng.uniform(0.05, 0.9))
        deltas = [d for d in (0.5, 1.0, 1.5, 2.0) if d <= n]
        delta = deltas[k % len(deltas)]
        if dyadic_content(E, delta).value != oracles.dyadic_by_enumeration(E.cells, n, L, delta):
            mismatches += 1
    report(capsys, 1, "dyadic DP equals cover enumeration bitwise on 200 sets",
           mismatches == 0, time.perf_counter() - t, 60, f"mismatches={mismatches}")


def ball_cases():
    # (n, L, r, center); a cell-centered interval of radius r holds an odd
    # number of cells and its exact content is below r**delta, so n = 1 uses corners
    for r, L in ((1 / 4, 4), (1 / 8, 5)):
        yield 1, L, r, (0.5,)
        yield 2, L, r, (0.5, 0.5)
        h = cell_width(L)
        yield 2, L, r, (0.5 + h / 2, 0.5 + h / 2)


def test_criterion_2_ball_values(capsys):
    t = time.perf_counter()
    failures = []
    for n, L, r, center in ball_cases():
        b = Ball(center, r)
        inner = discretize_ball(b, n, L, "inner")
        outer = discretize_ball(b, n, L, "outer")
        eta = (outer.count - inner.count) / outer.count
        for d in (0.5, 1.0, 1.5, 2.0):
            if d > n:
                continue
            target = r ** d
            params = ContentParams(delta=d, max_cells=256)
            upper = ball_content_upper(inner, params).value
            exact = ball_content_exact_small(inner, params).value
            dy = dyadic_content(inner, d).value
            c_low, c_high = comparability_bracket(n, d)
            lo, hi = target * (1 - eta) / c_high, target * (1 + eta) / c_low
            if upper > target * (1 + 1e-12):
                failures.append(("upper", n, L, r, center, d, upper))
            if abs(exact - target) > 1e-12 * target:
                failures.append(("exact", n, L, r, center, d, exact))
            if not lo <= dy <= hi:
                failures.append(("bracket", n, L, r, center, d, dy, lo, hi))
    report(capsys, 2, "ball content equals r**delta; dyadic value inside the bracket",
           not failures, time.perf_counter() - t, 60, f"failures={failures}" if failures else "")


def suites_clean(names, cfg):
    out = {}
    for s in names:
        rep = run_suite(s, cfg)
        out[s] = rep.summary
    bad = {s: v["violations"] for s, v in out.items() if v["verdict"] != "pass"}
    return out, bad


def test_criterion_3_exact_identities(capsys):
    t = time.perf_counter()
    names = ["i1", "i3", "power-identity", "two-step"]
    out, bad = suites_clean(names, SuiteConfig(n=2, L=3, samples=1000, seed=3))
    gaps = {s: out[s]["max_identity_gap"] for s in names}
    report(capsys, 3, "exact integral identities at 1e-12 on 1000 instances",
           not bad, time.perf_counter() - t, 60, f"max gaps={gaps}")


def test_criterion_4_explicit_constants(capsys):
    t = time.perf_counter()
    names = ["i6", "i7", "sublinearity", "strong-subadditivity", "prop-3.5"]
    out, bad = suites_clean(names, SuiteConfig(n=2, L=3, samples=1000, seed=4, workers=4))
    ratios = {s: round(out[s]["max_ratio"] or 0.0, 4) for s in names}
    report(capsys, 4, "inequalities with explicit constants, zero violations on 1000 instances",
           not bad, time.perf_counter() - t, 300, f"max ratios={ratios} violations={bad}")


def test_criterion_5_pointwise(capsys):
    t = time.perf_counter()
    cfg = SuiteConfig(n=2, L=4, samples=100, seed=5, workers=4)
    out, bad = suites_clean(["prop-4.5", "lemma-5.1"], cfg)
    split = run_suite("hedberg-split", SuiteConfig(n=2, L=4, samples=20, seed=5, workers=4)).summary
    if split["verdict"] != "pass":
        bad["hedberg-split"] = split["violations"]
    detail = (f"prop-4.5 max={out['prop-4.5']['max_ratio']:.3f} "
              f"lemma-5.1 max={out['lemma-5.1']['max_ratio']:.3f} ball/tail max={split['max_ratio']:.3f}")
    report(capsys, 5, "pointwise inequalities at every cell, 12-point grids, n=2 L=4",
           not bad, time.perf_counter() - t, 600, detail)


def test_criterion_6_boundedness(capsys):
    t = time.perf_counter()
    cfg = SuiteConfig(n=2, L=4, samples=50, seed=6, refine=True, stride=2, workers=4)
    problems = {}
    levels = {}
    for s in sorted(BOUNDEDNESS):
        summ = run_suite(s, cfg).summary
        by = summ["max_ratio_by_level"]
        levels[s] = (round(by["4"], 3), round(by["5"], 3), round(summ["refinement_variation"], 3))
        if not all(np.isfinite(v) for v in by.values()) or summ["verdict"] != "pass":
            problems[s] = levels[s]
    nd = 1.5 / 2
    rows = estimate_constant("thm-4.3", [{"p": 1.05 * nd}, {"p": 2 * nd}],
                             SuiteConfig(n=2, L=4, samples=50, seed=6, delta=1.5, stride=2, workers=4))
    factor = rows[0]["max_ratio"] / rows[1]["max_ratio"]
    if not factor >= 2:
        problems["thm-4.3 sweep"] = factor
    report(capsys, 6, "boundedness ratios finite and refinement-stable; blow-up near p = delta/n",
           not problems, time.perf_counter() - t, 1800,
           f"(L4, L5, variation)={levels} blow-up factor={factor:.2f}")


def test_criterion_7_operator_oracles(capsys):
    t = time.perf_counter()
    n, L = 2, 4
    rng = np.random.default_rng(7)
    lad = RadiusLadder.default(n, L)
    worst = 0.0
    for k in range(20):
        levels = rng.uniform(0.25, 4.0, size=int(rng.integers(1, 5)))
        v = rng.choice(levels, size=1 << (n * L))
        v[rng.random(v.size) < 0.5] = 0.0
        f = GridFunction(n, L, v)
        delta = (2.0, 1.5, 1.0)[k % 3]
        kappa, alpha = delta / 4, delta / 2
        got = maximal_centered(f, delta, kappa, lad).output.values
        want = oracles.maximal_centered(v, n, L, delta, kappa, lad.radii)
        worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(np.abs(want), 1e-300))))
        got = riesz_potential(f, delta, alpha).output.values
        want = oracles.riesz(v, n, L, delta, alpha, cell_width(L) / 2)
        worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(np.abs(want), 1e-300))))
    report(capsys, 7, "maximal and Riesz operators match brute force on 20 instances",
           worst <= 1e-10, time.perf_counter() - t, 300, f"worst relative error={worst:.2e}")


def test_criterion_8_determinism(capsys, tmp_path, monkeypatch):
    t = time.perf_counter()
    monkeypatch.chdir(tmp_path)
    args = ["verify", "--suite", "i6", "--suite", "prop-3.5", "--suite", "thm-5.2",
            "--n", "2", "--L", "3", "--samples", "40", "--seed", "11"]
    assert main(args + ["--no-timestamp", "-o", "a.json"]) == 0
    assert main(args + ["--no-timestamp", "-o", "b.json"]) == 0
    same_bytes = (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    a = json.loads((tmp_path / "a.json").read_text())
    assert main(args + ["--workers", "4", "-o", "c.json"]) == 0
    c = json.loads((tmp_path / "c.json").read_text())
    same_numbers = all(
        x["records"] == y["records"] and x["summary"] == y["summary"]
        for x, y in zip(a["reports"], c["reports"])
    )
    report(capsys, 8, "repeated verify runs byte-identical; thread count changes nothing",
           same_bytes and same_numbers, time.perf_counter() - t, 300,
           f"repeat identical={same_bytes} workers 1 vs 4 identical={same_numbers}")
