"""Command-line entry point.

Exit codes: 0 success or all suites pass, 1 a suite failed, 2 usage or
validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import __version__
from .choquet import choquet_integral, choquet_integral_power, resolve_backend
from .content import (
    ContentError,
    ContentParams,
    ball_content_exact_small,
    ball_content_upper,
    comparability_bracket,
    dyadic_content,
)
from .geometry import GridError, GridFunction, GridSet
from .io import (
    ENCODINGS,
    SchemaError,
    artifact,
    dumps,
    function_to_dict,
    load_grid,
    read_json,
    set_to_dict,
    write_text,
)
from .operators import (
    OperatorError,
    RadiusLadder,
    classical_maximal,
    classical_riesz,
    maximal_centered,
    maximal_sharp,
    maximal_uncentered,
    riesz_potential,
)
from .render import SCALES, RenderError, heatmap_svg
from .verify.instances import KINDS, InstanceError, InstanceSpec, as_function, generate
from .verify.suites import SUITES, SuiteConfig, SuiteError, estimate_constant, report_csv, rows_to_csv, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

VALIDATION_ERRORS = (ContentError, GridError, OperatorError, SuiteError, InstanceError,
                     SchemaError, RenderError, ValueError)


class UsageError(Exception):
    pass


# defaults applied after the config file and the flags are merged
DEFAULTS = {
    "n": 2, "L": 3, "seed": 0, "kind": "random-simple", "encoding": None, "dimension": None,
    "base_level": None, "delta": None, "kappa": 0.0, "alpha": None, "p": 1.0, "q": None,
    "backend": "dyadic", "variant": "centered", "stride": 1, "refine_ladder": False,
    "floor": None, "classical": False, "samples": 100, "workers": 1, "cap": None,
    "refine": False, "delta1": None, "delta2": None, "scale": "linear", "svg": None,
    "csv": None, "output": None, "input": None, "suite": None, "param": None, "values": None,
    "timestamp": True, "max_candidates": 4096,
}


def _parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", help="JSON file of parameters; flags override it")
    common.add_argument("--output", "-o", help="output path (stdout when absent)")

    grid = argparse.ArgumentParser(add_help=False, argument_default=S)
    grid.add_argument("--n", type=int, help="dimension")
    grid.add_argument("--L", type=int, help="grid level")
    grid.add_argument("--seed", type=int)

    inp = argparse.ArgumentParser(add_help=False, argument_default=S)
    inp.add_argument("--input", "-i", help="GridSet or GridFunction JSON")
    inp.add_argument("--delta", type=float, help="content dimension")
    inp.add_argument("--backend", help="dyadic (default) or ball-greedy")

    ladder = argparse.ArgumentParser(add_help=False, argument_default=S)
    ladder.add_argument("--stride", type=int, help="sublattice stride of uncentered centers")
    ladder.add_argument("--refine-ladder", action="store_true", help="insert geometric midpoints into the ladder")

    fig = argparse.ArgumentParser(add_help=False, argument_default=S)
    fig.add_argument("--svg", help="also write an SVG heatmap of the output")
    fig.add_argument("--scale", choices=SCALES, help="heatmap color scale")

    p = argparse.ArgumentParser(prog="hcontent", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"hcontent {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common, grid], help="generate a GridSet or GridFunction",
                       argument_default=S)
    g.add_argument("--kind", choices=KINDS)
    g.add_argument("--dimension", type=float, help="target dimension of a cantor dust")
    g.add_argument("--base-level", type=int, help="build at this level and upsample to L")
    g.add_argument("--encoding", choices=ENCODINGS)

    c = sub.add_parser("content", parents=[common, inp], help="content of a GridSet", argument_default=S)
    c.add_argument("--max-candidates", type=int, help="candidate cap for the exact ball search")

    it = sub.add_parser("integrate", parents=[common, inp], help="Choquet integral of f**p",
                        argument_default=S)
    it.add_argument("--p", type=float)

    m = sub.add_parser("maximal", parents=[common, inp, ladder, fig], help="maximal functions",
                       argument_default=S)
    m.add_argument("--kappa", type=float)
    m.add_argument("--variant", choices=("centered", "uncentered", "sharp", "classical"))

    r = sub.add_parser("riesz", parents=[common, inp, fig], help="Riesz potential", argument_default=S)
    r.add_argument("--alpha", type=float)
    r.add_argument("--floor", type=float, help="distance floor of the kernel (default half a cell)")
    r.add_argument("--classical", action="store_true", help="Riemann-sum Lebesgue potential instead")

    v = sub.add_parser("verify", parents=[common, grid], help="run inequality suites", argument_default=S)
    _suite_flags(v)
    v.add_argument("--suite", action="append", help=f"suite id (repeatable) or 'all'; one of {', '.join(SUITES)}")
    v.add_argument("--csv", help="also write the per-record CSV")
    v.add_argument("--refine", action="store_true", help="boundedness suites: compare L and L+1")
    v.add_argument("--no-timestamp", dest="timestamp", action="store_false")

    s = sub.add_parser("sweep", parents=[common, grid], help="empirical constant over a parameter sweep",
                       argument_default=S)
    _suite_flags(s)
    s.add_argument("--suite")
    s.add_argument("--param", help="parameter to sweep (e.g. p or alpha)")
    s.add_argument("--values", help="comma-separated values")

    rd = sub.add_parser("render", parents=[common], help="SVG heatmap of a GridFunction", argument_default=S)
    rd.add_argument("--input", "-i")
    rd.add_argument("--scale", choices=SCALES)
    return p


def _suite_flags(p: argparse.ArgumentParser) -> None:
    for name in ("delta", "delta1", "delta2", "kappa", "alpha", "p", "q", "cap"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--base-level", type=int)
    p.add_argument("--backend")


def load_config(argv) -> tuple[dict, set]:
    """Defaults, then the JSON config file, then explicit flags.

    Also returns the keys set by the user, so suites can tell a given
    parameter from a default.
    """
    args = vars(_parser().parse_args(argv))
    cfg = dict(DEFAULTS)
    path = args.pop("config", None)
    given = set()
    if path is not None:
        doc = read_json(path)
        if not isinstance(doc, dict):
            raise SchemaError(f"{path}: config must be a JSON object")
        doc.pop("command", None)
        unknown = sorted(set(doc) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"{path}: unknown config keys {unknown}")
        cfg.update(doc)
        given |= set(doc)
    cfg.update(args)
    given |= set(args) - {"command"}
    return cfg, given


def _emit(cfg: dict, text: str) -> None:
    if cfg["output"]:
        write_text(cfg["output"], text)
    else:
        sys.stdout.write(text)


def _need(cfg: dict, *keys) -> None:
    for k in keys:
        if cfg.get(k) is None:
            raise UsageError(f"--{k.replace('_', '-')} is required for {cfg['command']}")


def _echo(cfg: dict) -> dict:
    return {k: v for k, v in sorted(cfg.items()) if not k.startswith("_") and k != "output"}


def _read_input(cfg: dict):
    _need(cfg, "input")
    return load_grid(read_json(cfg["input"]))


def _as_function(obj) -> GridFunction:
    return as_function(obj) if isinstance(obj, GridSet) else obj


def cmd_gen(cfg: dict) -> int:
    params = {}
    if cfg["dimension"] is not None:
        params["dimension"] = cfg["dimension"]
    spec = InstanceSpec(cfg["kind"], cfg["n"], cfg["L"], seed=cfg["seed"], base_level=cfg["base_level"],
                        params=params)
    obj = generate(spec)
    if isinstance(obj, GridSet):
        doc = set_to_dict(obj, cfg["encoding"] or "rle")
    else:
        doc = function_to_dict(obj, cfg["encoding"] or "dense")
    doc["tool_version"] = __version__
    doc["config"] = _echo(cfg)
    doc["instance"] = spec.to_dict()
    _emit(cfg, dumps(doc))
    return EXIT_OK


def _content_result(E: GridSet, delta: float, backend: str, cfg: dict):
    key = backend.lower()
    if key in ("dyadic", "dyadic-exact"):
        return dyadic_content(E, delta)
    params = ContentParams(delta=delta, max_candidates=cfg["max_candidates"])
    if key in ("ball", "ball-greedy", "ball-greedy-upper"):
        return ball_content_upper(E, params)
    if key in ("ball-exact", "ball-exact-small"):
        return ball_content_exact_small(E, params)
    raise UsageError(f"unknown backend {backend!r}; expected dyadic, ball-greedy or ball-exact")


def cmd_content(cfg: dict) -> int:
    _need(cfg, "delta")
    E = _read_input(cfg)
    if not isinstance(E, GridSet):
        raise SchemaError("content needs a GridSet input")
    res = _content_result(E, cfg["delta"], cfg["backend"], cfg)
    c_low, c_high = comparability_bracket(E.n, cfg["delta"])
    body = {"result": res.to_dict(), "value": res.value, "certificate": res.to_dict()["cover"],
            "bracket": {"c_low": c_low, "c_high": c_high,
                        "relation": "c_low * dyadic <= ball content <= c_high * dyadic"}}
    _emit(cfg, dumps(artifact("ContentResult", body, _echo(cfg), {"input": E.digest()})))
    return EXIT_OK


def cmd_integrate(cfg: dict) -> int:
    _need(cfg, "delta")
    f = _as_function(_read_input(cfg))
    backend = resolve_backend(cfg["backend"])
    p = cfg["p"]
    value = choquet_integral(f, cfg["delta"], backend) if p == 1 else choquet_integral_power(
        f, p, cfg["delta"], backend)
    body = {"value": value, "backend": backend, "delta": cfg["delta"], "p": p}
    _emit(cfg, dumps(artifact("IntegralResult", body, _echo(cfg), {"input": f.digest()})))
    return EXIT_OK


def _operator_output(cfg: dict, res) -> int:
    doc = artifact("OperatorResult", {"result": res.to_dict(), "output": function_to_dict(res.output)},
                   _echo(cfg), {"input": res.input_digest})
    _emit(cfg, dumps(doc))
    if cfg["svg"]:
        write_text(cfg["svg"], heatmap_svg(res.output, cfg["scale"], title=res.operator))
    return EXIT_OK


def cmd_maximal(cfg: dict) -> int:
    f = _as_function(_read_input(cfg))
    delta = cfg["delta"] if cfg["delta"] is not None else float(f.n)
    ladder = RadiusLadder.default(f.n, f.L, cfg["stride"])
    if cfg["refine_ladder"]:
        ladder = ladder.refined()
    backend = resolve_backend(cfg["backend"])
    variant = cfg["variant"]
    if variant == "centered":
        res = maximal_centered(f, delta, cfg["kappa"], ladder, backend)
    elif variant == "uncentered":
        res = maximal_uncentered(f, delta, cfg["kappa"], ladder, backend)
    elif variant == "sharp":
        res = maximal_sharp(f, delta, ladder, backend)
    elif variant == "classical":
        res = classical_maximal(f, cfg["kappa"], ladder)
    else:
        raise UsageError(f"unknown variant {variant!r}")
    return _operator_output(cfg, res)


def cmd_riesz(cfg: dict) -> int:
    _need(cfg, "alpha")
    f = _as_function(_read_input(cfg))
    if cfg["classical"]:
        res = classical_riesz(f, cfg["alpha"], cfg["floor"])
    else:
        delta = cfg["delta"] if cfg["delta"] is not None else float(f.n)
        res = riesz_potential(f, delta, cfg["alpha"], resolve_backend(cfg["backend"]), cfg["floor"])
    return _operator_output(cfg, res)


def _suite_config(cfg: dict) -> SuiteConfig:
    given = cfg["_given"]

    def opt(key):
        return cfg[key] if key in given else None

    return SuiteConfig(
        n=cfg["n"], L=cfg["L"], delta=opt("delta"), delta1=opt("delta1"), delta2=opt("delta2"),
        kappa=opt("kappa"), alpha=opt("alpha"), p=opt("p"), q=opt("q"),
        samples=cfg["samples"], seed=cfg["seed"], backend=resolve_backend(cfg["backend"]),
        workers=cfg["workers"], cap=cfg["cap"], base_level=cfg["base_level"], refine=cfg["refine"],
        stride=cfg["stride"],
    )


def cmd_verify(cfg: dict) -> int:
    _need(cfg, "suite")
    suites = cfg["suite"] if isinstance(cfg["suite"], list) else [cfg["suite"]]
    if "all" in suites:
        suites = list(SUITES)
    scfg = _suite_config(cfg)
    reports = [run_suite(s, scfg) for s in suites]
    doc = {"schema": 1, "type": "VerifyRun", "tool_version": __version__, "config": _echo(cfg),
           "verdict": "pass" if all(r.passed for r in reports) else "fail",
           "reports": [r.to_dict() for r in reports]}
    if cfg["timestamp"]:
        doc["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    _emit(cfg, dumps(doc))
    if cfg["csv"]:
        parts = [report_csv(r) for r in reports]
        header = parts[0].split("\n", 1)[0] if parts else ""
        body = [p.split("\n", 1)[1] if "\n" in p else "" for p in parts]
        write_text(cfg["csv"], header + "\n" + "".join(body) if header else "")
    for r in reports:
        s = r.summary
        print(f"{r.suite}: {s['verdict']} count={s['count']} max_ratio={s['max_ratio']} "
              f"violations={s['violations']}", file=sys.stderr)
    return EXIT_OK if doc["verdict"] == "pass" else EXIT_FAIL


def cmd_sweep(cfg: dict) -> int:
    _need(cfg, "suite", "param", "values")
    values = cfg["values"]
    if isinstance(values, str):
        try:
            values = [float(v) for v in values.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"--values must be comma-separated numbers ({exc})") from exc
    if not values:
        raise UsageError("--values is empty")
    base = _suite_config(cfg)
    point_base = {}
    if cfg["suite"] in ("lemma-5.1", "hedberg-split"):
        point_base = {"delta": cfg["delta"], "alpha": cfg["alpha"], "kappa": cfg["kappa"], "p": cfg["p"]}
    elif cfg["suite"] == "prop-4.5":
        point_base = {"delta": cfg["delta"], "kappa": cfg["kappa"], "q": cfg["q"]}
    grid = []
    for v in values:
        point = {k: x for k, x in point_base.items() if x is not None}
        point[cfg["param"]] = v
        grid.append(point)
    rows = estimate_constant(cfg["suite"], grid, base)
    _emit(cfg, rows_to_csv(rows))
    return EXIT_OK


def cmd_render(cfg: dict) -> int:
    obj = _read_input(cfg)
    f = _as_function(obj)
    _emit(cfg, heatmap_svg(f, cfg["scale"], title=cfg["input"]))
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen, "content": cmd_content, "integrate": cmd_integrate, "maximal": cmd_maximal,
    "riesz": cmd_riesz, "verify": cmd_verify, "sweep": cmd_sweep, "render": cmd_render,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg, given = load_config(argv)
        cfg["_given"] = given
        return COMMANDS[cfg["command"]](cfg)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
