"""SVG pictures of the small example games' value sets.

    python3 scripts/figures.py --out artifacts/figures
"""
import argparse
from pathlib import Path

from mosg.cli import render_svg
from mosg.corpus import det_strat_mem, intro, no_analog_left, no_analog_right
from mosg.model import cq, dq
from mosg.vi import Fixpoint, Horizon, dq_region, run_cq_vi, run_forall_exists_vi


def regions(g, q, names):
    for name in names:
        r = dq_region(g, q, state=g.index_of(name)).region
        yield name, list(r.parts)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="artifacts/figures")
    out = Path(ap.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = []

    g, q = intro()
    for s, parts in regions(g, q, ["s0", "s1", "s2"]):
        jobs.append((f"intro_dq_{s}", parts, f"intro {s}: disjunction"))
    c = cq(*q.objectives)
    jobs.append(("intro_cq_standard", [run_cq_vi(g, c, Fixpoint()).initial_value], "intro s0: conjunction"))
    jobs.append(("intro_cq_forall_exists", [run_forall_exists_vi(g, c, Fixpoint()).initial_value],
                 "intro s0: conjunction, Adam first"))

    g, q = det_strat_mem()
    jobs.append(("det_strat_mem_dq", list(dq_region(g, dq(*q.objectives)).region.parts), "det-strat-mem s0"))

    g, q = no_analog_right()
    r = run_forall_exists_vi(g, q, Horizon(2))
    s0 = g.index_of("s0")
    jobs.append(("no_analog_right_family", list(r.families[s0]), "no-analog-right s0, k = 2 family"))
    jobs.append(("no_analog_right_value", [r.intersections[s0]], "no-analog-right s0, k = 2"))

    g, q = no_analog_left()
    for s, parts in regions(g, q, ["s0", "t0"]):
        jobs.append((f"no_analog_left_{s}", parts, f"no-analog-left {s}"))

    for name, parts, title in jobs:
        (out / f"{name}.svg").write_text(render_svg(parts, title))
        print(out / f"{name}.svg")


if __name__ == "__main__":
    main()
