"""Command-line interface: file I/O, dispatch and SVG rendering."""
from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Sequence

from . import polytope as P
from .corpus import BUILDERS, ExperimentConfig, build_named, random_game, run_experiment
from .determinacy import (adam_first_check, check_certificate, decide_determinacy, five_curves_family,
                          limit_family)
from .model import (AND, OR, ModelError, ThresholdQuery, binarize, game_from_json, game_to_json, goal_unfold,
                    is_persistent, lift_template, query_from_json, query_to_json, swap_players, validate,
                    validate_query)
from .oracle import GuardExceeded, dq_standard_oracle, forall_exists_oracle, standard_cq_oracle
from .polytope import DwcPolytope, PolytopeError, Region
from .qualitative import alternating_safety_det, solve_qual_dq
from .rational import RationalParseError, fmt_q, to_q
from .si import SiMode, si_solve
from .vi import Fixpoint, Horizon, dq_achievable_point, dq_region, run_cq_vi, run_forall_exists_vi

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_UNKNOWN = 0, 1, 2, 3


class InputError(Exception):
    pass


# inputs -----------------------------------------------------------------------------

def _read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as ex:
        raise InputError(f"{path}: {ex.strerror}")
    except json.JSONDecodeError as ex:
        raise InputError(f"{path}: line {ex.lineno} column {ex.colno}: {ex.msg}")


def _builder_params(items) -> dict:
    out = {}
    for it in items or ():
        k, _, v = it.partition("=")
        out[k] = int(v) if v.lstrip("-").isdigit() else v
    return out


def parse_inputs(args):
    """(game, template, threshold query or None) from --game/--query files or --model."""
    if getattr(args, "model", None):
        g, q = build_named(args.model, **_builder_params(args.param))
        tq = q if isinstance(q, ThresholdQuery) else None
        t = q.template if tq else q
        if getattr(args, "query", None):
            t, tq = query_from_json(g, _read_json(args.query))
    else:
        if not getattr(args, "game", None):
            raise InputError("give --game FILE (with --query FILE) or --model NAME")
        g = game_from_json(_read_json(args.game))
        if not args.query:
            raise InputError("--query FILE is required with --game")
        t, tq = query_from_json(g, _read_json(args.query))
    errs = validate(g) + validate_query(g, t)
    if errs:
        raise InputError("; ".join(errs))
    if getattr(args, "state", None):
        g = g.with_initial(g.index_of(args.state))
    return g, t, tq


def _thresholds(args, tq, t):
    if getattr(args, "thresholds", None):
        xs = tuple(to_q(x) for x in args.thresholds.split(","))
        strict = tuple(bool(int(c)) for c in args.strict.split(",")) if args.strict else ()
        return ThresholdQuery(t, xs, strict)
    if tq is None:
        raise InputError("thresholds needed: --thresholds a,b,...")
    return tq


# outputs ----------------------------------------------------------------------------

def _dump(obj, args) -> bytes:
    data = (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode()
    out = getattr(args, "out", None)
    if out:
        with open(out, "wb") as f:
            f.write(data)
    else:
        sys.stdout.buffer.write(data)
    return data


def _write_text(text: str, args):
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


_PALETTE = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860")


def _polygon(p: DwcPolytope, size: int, pad: int) -> str:
    gens = sorted(p.generators, key=lambda v: (v[0], -v[1]))
    pts = [(0, 0), (0, gens[0][1])] + [tuple(v) for v in gens] + [(gens[-1][0], 0)]

    def xy(v):
        return f"{pad + float(v[0]) * size:.2f},{pad + (1 - float(v[1])) * size:.2f}"
    return " ".join(xy(v) for v in pts)


def render_svg(parts: Sequence[DwcPolytope], title: str = "", size: int = 240) -> str:
    if any(p.dim != 2 for p in parts):
        raise PolytopeError("SVG output needs two objectives")
    pad = 30
    w = size + 2 * pad
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" viewBox="0 0 {w} {w}">',
             f'<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="#000"/>']
    for i, p in enumerate(parts):
        c = _PALETTE[i % len(_PALETTE)]
        lines.append(f'<polygon points="{_polygon(p, size, pad)}" fill="{c}" fill-opacity="0.35" '
                     f'stroke="{c}" stroke-width="2"/>')
    lines.append(f'<text x="{pad + size / 2}" y="{w - 6}" text-anchor="middle" font-size="12">objective 1</text>')
    lines.append(f'<text x="12" y="{pad + size / 2}" text-anchor="middle" font-size="12" '
                 f'transform="rotate(-90 12 {pad + size / 2})">objective 2</text>')
    lines.append(f'<text x="{pad}" y="{w - 6}" font-size="10">0</text>')
    lines.append(f'<text x="{pad + size - 4}" y="{w - 6}" font-size="10">1</text>')
    if title:
        lines.append(f'<text x="{w / 2}" y="18" text-anchor="middle" font-size="13">{title}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _stats_json(stats):
    return [[k, s, c] for k, s, c in stats.rows()]


def _values_json(g, vals):
    return {g.labels[s]: vals[s].to_json() for s in g.states()}


# commands ---------------------------------------------------------------------------

def _mode(args):
    return Horizon(args.k) if args.k is not None else Fixpoint(args.fixpoint_cap)


def cmd_solve(args) -> int:
    g, t, _ = parse_inputs(args)
    if t.connective != AND:
        raise InputError("solve takes a conjunctive query; use dq for disjunctive ones")
    timeout = args.timeout_ms / 1000 if args.timeout_ms else None
    if args.semantics == "standard":
        deadline = time.perf_counter() + timeout if timeout else None
        r = run_cq_vi(g, t, _mode(args), deadline)
        vals, fams, ok = r.values, None, r.status in ("horizon", "converged")
    else:
        r = run_forall_exists_vi(g, t, _mode(args), prune=args.prune, family_cap=args.family_cap,
                                 timeout=timeout)
        vals, fams, ok = r.intersections, r.families, r.complete
    rg = r.game
    if args.format == "svg":
        if not ok:
            return EXIT_UNKNOWN
        _write_text(render_svg([vals[rg.initial]], rg.labels[rg.initial]), args)
        return EXIT_OK
    out = {"semantics": args.semantics, "status": r.status, "iterations": r.iterations,
           "initial": rg.labels[rg.initial]}
    if vals is not None and ok:
        out["values"] = _values_json(rg, vals)
    if fams is not None and ok:
        out["families"] = {rg.labels[s]: [p.to_json() for p in fams[s]] for s in rg.states()}
    out["stats"] = _stats_json(r.stats)
    if args.semantics == "forall-exists":
        out["raw_counts"] = r.stats.raw_counts
    _dump(out, args)
    return EXIT_OK if ok else EXIT_UNKNOWN


def cmd_dq(args) -> int:
    g, t, tq = parse_inputs(args)
    if t.connective != OR:
        raise InputError("dq takes a disjunctive query")
    timeout = args.timeout_ms / 1000 if args.timeout_ms else None
    kw = dict(family_cap=args.family_cap, timeout=timeout)
    if args.region or args.format == "svg":
        r = dq_region(g, t, _mode(args), args.prune, **kw)
        if r.region is None:
            _dump({"status": r.status}, args)
            return EXIT_UNKNOWN
        if args.format == "svg":
            _write_text(render_svg(r.region.parts, g.labels[g.initial]), args)
        else:
            _dump({"status": r.status, "region": r.region.to_json(), "dual_value": r.dual_value.to_json()}, args)
        return EXIT_OK
    tq = _thresholds(args, tq, t)
    d = dq_achievable_point(g, tq, _mode(args), args.prune, **kw)
    _dump({"status": d.status, "achievable": d.achievable,
           "dual_value": d.dual_value.to_json() if d.dual_value is not None else None}, args)
    if d.achievable is None:
        return EXIT_UNKNOWN
    return EXIT_OK if d.achievable else EXIT_NEGATIVE


def _binarized(g, t):
    if not is_persistent(g, t):
        g, t, _ = goal_unfold(g, t)
    gb, origin = binarize(g)
    tb = lift_template(t, origin)
    if tb.connective == OR:
        gb, tb = swap_players(gb), tb.dual(gb)
    return gb, tb


def _report_json(rep):
    return {"verdict": rep.verdict, "strong_verdict": rep.strong_verdict,
            "closure_phi": rep.closure_phi, "initial_member": rep.initial_member,
            "cond1_intersection_closed": rep.cond1_intersection_closed,
            "cond2_conv_distributes": rep.cond2_conv_distributes,
            "cond3_weighted_distributes": rep.cond3_weighted_distributes,
            "cond2_at_random": rep.cond2_at_random, "cond3_at_eve": rep.cond3_at_eve,
            "witnesses": {k: repr(v) for k, v in sorted(rep.witnesses.items())}}


def cmd_determinacy(args) -> int:
    g, t, _ = parse_inputs(args)
    if args.action == "structural":
        gb, tb = _binarized(g, t)
        det2 = gb.is_deterministic() and tb.n == 2
        out = {"adam_first": adam_first_check(g), "deterministic_two_objectives": det2}
        _dump(out, args)
        return EXIT_OK if out["adam_first"] or det2 else EXIT_UNKNOWN
    if args.action == "certify":
        gb, tb = _binarized(g, t)
        if args.family == "five-curves":
            fam = five_curves_family(gb, tb.n)
        elif args.family == "limit":
            lf = limit_family(gb, tb, args.fixpoint_cap)
            if lf.families is None:
                _dump({"status": "unconverged"}, args)
                return EXIT_UNKNOWN
            fam = lf.families
        else:
            data = _read_json(args.family_file)
            fam = tuple(tuple(DwcPolytope.from_json(p) for p in data[gb.labels[s]]) for s in gb.states())
        rep = check_certificate(gb, tb, fam)
        _dump(_report_json(rep), args)
        return EXIT_OK if rep.verdict else EXIT_NEGATIVE
    v = decide_determinacy(g, t, args.fixpoint_cap)
    out = {"verdict": v.verdict, "method": v.method, "detail": v.detail}
    _dump(out, args)
    return {"determined": EXIT_OK, "not_determined": EXIT_NEGATIVE}.get(v.verdict, EXIT_UNKNOWN)


def cmd_si(args) -> int:
    g, t, _ = parse_inputs(args)
    mode = SiMode(args.mode) if args.mode else (SiMode.DQ_STANDARD if t.connective == OR else SiMode.CQ_FORALL_EXISTS)
    r = si_solve(g, t, mode, args.fixpoint_cap, prune=args.prune)
    if r.status != "ok":
        _dump({"status": r.status}, args)
        return EXIT_UNKNOWN
    if args.format == "svg":
        parts = r.value.parts if isinstance(r.value, Region) else [r.value]
        _write_text(render_svg(parts, g.labels[g.initial]), args)
        return EXIT_OK
    out = {"mode": mode.value, "value": r.value.to_json(), "explored": r.explored, "strategies": r.total}
    if args.trace:
        out["trace"] = r.trace.to_json(g)
    _dump(out, args)
    return EXIT_OK


def cmd_qual(args) -> int:
    g, t, tq = parse_inputs(args)
    if args.semantics == "deterministic":
        ok = alternating_safety_det(g, t, args.method)
        _dump({"deterministic_strategy_wins": ok}, args)
    else:
        ok, idx = solve_qual_dq(g, tq if tq is not None else t)
        _dump({"almost_sure": ok, "objective": idx}, args)
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_oracle(args) -> int:
    g, t, tq = parse_inputs(args)
    if args.kind == "dq":
        ok = dq_standard_oracle(g, _thresholds(args, tq, t), args.guard)
        _dump({"achievable": ok}, args)
        return EXIT_OK if ok else EXIT_NEGATIVE
    if t.connective != AND:
        raise InputError("this oracle takes a conjunctive query; use --kind dq for disjunctive ones")
    if args.k is None:
        raise InputError("--k is required for this oracle")
    fn = forall_exists_oracle if args.kind == "forall-exists" else standard_cq_oracle
    v = fn(g, t, args.k)
    _dump({"kind": args.kind, "k": args.k, "value": v.to_json()}, args)
    return EXIT_OK


def cmd_zoo(args) -> int:
    if not args.name:
        _dump(sorted(BUILDERS), args)
        return EXIT_OK
    g, q = build_named(args.name, **_builder_params(args.param))
    _dump({"game": game_to_json(g), "query": query_to_json(g, q)}, args)
    return EXIT_OK


def cmd_generate(args) -> int:
    g, q = random_game(args.m, args.l, args.seed)
    _dump({"game": game_to_json(g), "query": query_to_json(g, q)}, args)
    return EXIT_OK


def cmd_bench(args) -> int:
    hs = tuple(range(1, args.kmax + 1))
    cfg = ExperimentConfig(instances=args.instances, m=args.m, l=args.l, seed=args.seed, horizons=hs,
                           timeout=args.timeout_ms / 1000, compare_unpruned=args.prune,
                           family_cap=args.family_cap)
    rows, runs, screened = run_experiment(cfg, csv_path=args.out)
    table = [{"k": r.k, "mean_pruned": r.mean_pruned, "mean_unpruned": r.mean_unpruned,
              "timeouts_pruned": r.timeouts_pruned, "timeouts_unpruned": r.timeouts_unpruned,
              "completed": r.completed} for r in rows]
    sys.stdout.write(json.dumps({"screened": screened, "instances": len(runs), "rows": table}, indent=2) + "\n")
    return EXIT_OK


def cmd_render(args) -> int:
    data = _read_json(args.input)
    if isinstance(data, dict):
        key = args.key
        if key is None:
            raise InputError("input is an object; choose an entry with --key")
        data = data.get("values", data).get(key) if "values" in data else data.get(key)
        if data is None:
            raise InputError(f"no entry {args.key!r}")
    # a polytope is a list of points, a region a list of polytopes
    if data and isinstance(data[0][0], list):
        parts = [DwcPolytope.from_json(p) for p in data]
    else:
        parts = [DwcPolytope.from_json(data)]
    _write_text(render_svg(parts, args.title or ""), args)
    return EXIT_OK


def cmd_validate(args) -> int:
    g = game_from_json(_read_json(args.game))
    diags = validate(g)
    if args.query:
        t, _ = query_from_json(g, _read_json(args.query))
        diags += validate_query(g, t)
    _dump({"valid": not diags, "diagnostics": diags}, args)
    return EXIT_OK if not diags else EXIT_INPUT


# parser -----------------------------------------------------------------------------

def _inputs(p):
    p.add_argument("--game", help="game JSON file")
    p.add_argument("--query", help="query JSON file")
    p.add_argument("--model", help="built-in construction instead of files (see `zoo`)")
    p.add_argument("--param", action="append", help="builder parameter, e.g. n=3")
    p.add_argument("--state", help="solve from this state instead of the initial one")


def _iteration(p):
    p.add_argument("--k", type=int, help="horizon; omit to iterate to a fixpoint")
    p.add_argument("--fixpoint-cap", type=int, default=1000)
    p.add_argument("--family-cap", type=int, default=10_000)
    p.add_argument("--prune", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--timeout-ms", type=int, default=0)


def _output(p, formats=("json",)):
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--format", choices=formats, default=formats[0])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mosg", description="Exact multi-objective stochastic game solver")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="Pareto sets of a conjunctive query")
    _inputs(p), _iteration(p), _output(p, ("json", "svg"))
    p.add_argument("--semantics", choices=("standard", "forall-exists"), default="forall-exists")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("dq", help="disjunctive query: threshold decision or region")
    _inputs(p), _iteration(p), _output(p, ("json", "svg"))
    p.add_argument("--thresholds", help="comma separated, e.g. 3/4,3/4")
    p.add_argument("--strict", help="comma separated 0/1 flags")
    p.add_argument("--region", action="store_true", help="output the whole achievable region")
    p.set_defaults(fn=cmd_dq)

    p = sub.add_parser("determinacy", help="certify, check structurally, or decide determinacy")
    p.add_argument("action", choices=("certify", "structural", "decide"))
    _inputs(p), _output(p)
    p.add_argument("--family", choices=("five-curves", "limit", "file"), default="five-curves")
    p.add_argument("--family-file")
    p.add_argument("--fixpoint-cap", type=int, default=1000)
    p.set_defaults(fn=cmd_determinacy)

    p = sub.add_parser("si", help="strategy iteration over memoryless strategies")
    _inputs(p), _output(p, ("json", "svg"))
    p.add_argument("--mode", choices=[m.value for m in SiMode])
    p.add_argument("--trace", action="store_true")
    p.add_argument("--fixpoint-cap", type=int, default=1000)
    p.add_argument("--prune", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(fn=cmd_si)

    p = sub.add_parser("qual", help="qualitative disjunctive queries")
    _inputs(p), _output(p)
    p.add_argument("--semantics", choices=("general", "deterministic"), default="general",
                   help="deterministic: both players use deterministic strategies (safety objectives)")
    p.add_argument("--method", choices=("tree", "stack"), default="tree")
    p.set_defaults(fn=cmd_qual)

    p = sub.add_parser("oracle", help="brute-force reference computations")
    _inputs(p), _output(p)
    p.add_argument("--kind", choices=("forall-exists", "standard", "dq"), default="forall-exists")
    p.add_argument("--k", type=int)
    p.add_argument("--thresholds")
    p.add_argument("--strict")
    p.add_argument("--guard", type=int, default=10 ** 6)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("zoo", help="list or export built-in constructions")
    p.add_argument("name", nargs="?")
    p.add_argument("--param", action="append")
    _output(p)
    p.set_defaults(fn=cmd_zoo)

    p = sub.add_parser("generate", help="random game in JSON")
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    _output(p)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("bench", help="pruned vs unpruned family sizes on random games (CSV)")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument("--timeout-ms", type=int, default=10_000)
    p.add_argument("--family-cap", type=int, default=10_000)
    p.add_argument("--prune", action=argparse.BooleanOptionalAction, default=True,
                   help="--no-prune skips the unpruned comparison runs")
    p.add_argument("--out", help="CSV path")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("render", help="SVG of a polytope or region JSON")
    p.add_argument("input")
    p.add_argument("--key", help="state label when the input is a result object")
    p.add_argument("--title")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("validate", help="check a game (and query) file")
    p.add_argument("--game", required=True)
    p.add_argument("--query")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (InputError, ModelError, RationalParseError, PolytopeError) as ex:
        sys.stderr.write(f"error: {ex}\n")
        return EXIT_INPUT
    except GuardExceeded as ex:
        sys.stderr.write(f"gave up: {ex}\n")
        return EXIT_UNKNOWN


if __name__ == "__main__":
    sys.exit(main())
