import math

import numpy as np
import pytest

from hcontent.content import dyadic_content
from hcontent.verify import SUITES, SuiteConfig, SuiteError, estimate_constant, run_suite
from hcontent.verify import constants as K
from hcontent.verify.instances import (
    KINDS,
    InstanceError,
    InstanceSpec,
    cantor_dust,
    cantor_parameters,
    checkerboard,
    generate,
    mixed_corpus,
)
from hcontent.verify.suites import BOUNDEDNESS, SuiteReport, le, pointwise, report_csv, rows_to_csv

SLOW_POINTWISE = {"prop-4.5", "lemma-5.1", "hedberg-split", "sharp-pointwise", "comp", "ladder-monotone"}


@pytest.mark.parametrize("suite", SUITES)
def test_every_suite_runs_and_passes_small(suite):
    L = 3 if suite in SLOW_POINTWISE or suite in BOUNDEDNESS else 2
    cfg = SuiteConfig(n=2, L=L, samples=3, seed=1, stride=2 if suite in BOUNDEDNESS else 1)
    rep = run_suite(suite, cfg)
    assert isinstance(rep, SuiteReport)
    assert rep.summary["count"] >= 3
    assert rep.summary["verdict"] == "pass", rep.summary
    doc = rep.to_dict()
    assert doc["schema"] == 1 and doc["suite"] == suite
    assert all("lhs" in r and "rhs" in r and "relation" in r for r in doc["records"])
    assert doc["summary"]["cap_provenance"] in (K.PAPER, K.TRACED, K.DERIVED, K.EMPIRICAL)


def test_reports_are_deterministic_across_threads():
    cfg = SuiteConfig(n=2, L=3, samples=12, seed=5)
    a = run_suite("i6", cfg).to_dict()
    b = run_suite("i6", cfg).to_dict()
    c = run_suite("i6", SuiteConfig(n=2, L=3, samples=12, seed=5, workers=4)).to_dict()
    assert a["records"] == b["records"] == c["records"]
    assert a["summary"] == c["summary"]
    d = run_suite("i6", SuiteConfig(n=2, L=3, samples=12, seed=6)).to_dict()
    assert d["records"] != a["records"]


def test_records_pass_and_fail():
    assert le(1.0, 1.0, 1.0, 0.0)["ok"]
    assert not le(1.1, 1.0, 1.0, 1e-12)["ok"]
    assert le(0.0, 0.0, 1.0, 0.0)["ratio"] == 0.0
    # zero against zero holds even with an unbounded cap
    assert le(0.0, 0.0, math.inf, 1e-9)["ok"]
    assert not le(1.0, 0.0, math.inf, 1e-9)["ok"]
    rec = pointwise(np.array([1.0, 3.0]), np.array([1.0, 1.0]), 2.0, 0.0)
    assert not rec["ok"] and rec["violations"] == 1 and rec["cell"] == 1


def test_artificial_cap_fails():
    rep = run_suite("i6", SuiteConfig(n=2, L=2, samples=20, cap=0.5))
    assert rep.summary["verdict"] == "fail" and rep.summary["violations"] > 0


@pytest.mark.parametrize("suite,kw,fragment", [
    ("thm-5.2", dict(delta=1.5, alpha=0.5, p=0.7), "(0.75, 3)"),
    ("thm-4.3", dict(delta=1.5, p=0.75), "delta/n"),
    ("thm-4.6", dict(delta=1.5, kappa=0.5, p=3.0), "delta/kappa"),
    ("thm-4.7", dict(delta=2.0, kappa=0.5, p=1.5), "(0, n)"),
    ("thm-5.4", dict(delta=1.5, alpha=0.5, kappa=0.5, p=1.0), "[0, alpha)"),
    ("thm-5.5", dict(delta=1.5, alpha=0.5, p=1.0), "(1, delta/alpha)"),
    ("prop-4.5", dict(delta=2.0, kappa=1.0, q=2.5), "delta/kappa"),
    ("lemma-5.1", dict(delta=2.0, alpha=1.0, kappa=0.0, p=2.0), "delta/alpha"),
    ("prop-3.5", dict(delta1=1.5, delta2=1.0), "delta1 < delta2"),
    ("i7", dict(p=1.0), "(1, inf)"),
])
def test_hypothesis_gates(suite, kw, fragment):
    with pytest.raises(SuiteError) as exc:
        run_suite(suite, SuiteConfig(n=2, L=2, samples=1, **kw))
    assert fragment in str(exc.value)


def test_unknown_suite():
    with pytest.raises(SuiteError):
        run_suite("thm-9.9")
    assert run_suite("i7-holder", SuiteConfig(n=1, L=3, samples=2)).suite == "i7"


def test_refinement_mode_reports_variation():
    rep = run_suite("thm-5.2", SuiteConfig(n=2, L=3, samples=4, refine=True))
    s = rep.summary
    assert set(s["max_ratio_by_level"]) == {"3", "4"}
    assert 0 <= s["refinement_variation"] < 1
    assert rep.environment["output_exponent"] == pytest.approx(1.5 * 1.0 / (1.5 - 1.0 * 0.5))


def test_estimate_constant_rows_and_csv():
    rows = estimate_constant("thm-4.3", [{"p": 0.7875}, {"p": 1.5}], SuiteConfig(n=2, L=3, samples=6, delta=1.5))
    assert [r["p"] for r in rows] == [0.7875, 1.5]
    assert rows[0]["trend"] == "" and rows[1]["trend"] in ("up", "down", "flat")
    assert rows[0]["max_ratio"] > rows[1]["max_ratio"]
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == "p,max_ratio,verdict,trend"
    rows = estimate_constant("lemma-5.1", [{"delta": 2.0, "alpha": a, "kappa": 0.0, "p": 1.0} for a in (0.5, 1.0)],
                             SuiteConfig(n=2, L=3, samples=2))
    assert all(r["max_ratio"] <= r["traced_constant"] for r in rows)


def test_report_csv():
    rep = run_suite("c4", SuiteConfig(n=1, L=3, samples=3))
    lines = report_csv(rep).splitlines()
    assert lines[0].startswith("suite,index,relation,lhs,rhs,ratio,cap,ok")
    assert len(lines) == 4


def test_constants_provenance():
    assert K.quasi_subadditivity().value == 2 and K.quasi_subadditivity().provenance == K.PAPER
    assert K.embedding(1.0, 2.0).value == pytest.approx(2 ** 0.5)
    assert K.quasi_norm(1.0).value == 2 and K.quasi_norm(2.0).value == 4
    assert K.hedberg_ball_part(2.0, 1.0, 0.0).value == pytest.approx(4.0)
    assert K.unbounded().value == math.inf
    h = K.hedberg(2, 3, 2.0, 1.0, 0.0, 1.0)
    assert h.provenance == K.TRACED and h.value > K.hedberg_ball_part(2.0, 1.0, 0.0).value
    assert K.sharp_bound_grid(2, 3).value >= 4


# instances ---------------------------------------------------------------


def test_cantor_parameters_and_dust():
    assert cantor_parameters(2, 4, 1.0) == (1, 2)
    E = cantor_dust(2, 4, 1.0)
    assert E.count == 16
    # self-similar: content at delta = dimension stays bounded across levels
    vals = [dyadic_content(cantor_dust(2, L, 1.0), 1.0).value for L in (2, 3, 4)]
    assert max(vals) / min(vals) < 2
    with pytest.raises(InstanceError):
        cantor_parameters(2, 4, 3.0)


def test_checkerboard():
    E = checkerboard(2, 2)
    assert E.count == 8
    assert dyadic_content(E, 2.0).value == 0.5
    assert checkerboard(2, 3, scale=1).count == 32


@pytest.mark.parametrize("kind", KINDS)
def test_generate_is_deterministic(kind):
    spec = InstanceSpec(kind, 2, 4, seed=3, params={"dimension": 1.0} if kind == "cantor-dust" else {})
    a, b = generate(spec), generate(spec)
    assert a.digest() == b.digest()
    coarse = InstanceSpec(kind, 2, 4, seed=3, base_level=2,
                          params={"dimension": 1.0} if kind == "cantor-dust" else {})
    assert generate(coarse).L == 4


def test_base_level_gives_the_same_object_at_two_resolutions():
    for spec in mixed_corpus(2, 4, 12, seed=1, delta=1.5, base_level=3):
        fine = InstanceSpec(spec.kind, 2, 5, spec.seed, spec.value_range, spec.base_level, spec.params)
        assert generate(fine).digest() == generate(spec).upsample(1).digest()


def test_instance_validation():
    with pytest.raises(InstanceError):
        InstanceSpec("spiral", 2, 3)
    with pytest.raises(InstanceError):
        InstanceSpec("checkerboard", 2, 3, base_level=5)
    with pytest.raises(InstanceError):
        InstanceSpec("checkerboard", 2, 3, value_range=(0.0, 1.0))
