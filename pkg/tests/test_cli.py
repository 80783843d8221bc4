import json

import pytest

from mosg.cli import EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK, EXIT_UNKNOWN, main, render_svg
from mosg.model import game_from_json, game_to_json, query_from_json, query_to_json
from mosg.polytope import DwcPolytope, PolytopeError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_solve_no_analog_right(capsys):
    code, out = run(capsys, "solve", "--model", "no-analog-right", "--semantics", "forall-exists", "--k", "2")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["status"] == "horizon"
    assert data["values"]["s0"] == [["1/2", "1/2"]]


def test_solve_standard(capsys):
    code, out = run(capsys, "solve", "--model", "no-analog-right", "--semantics", "standard")
    assert code == EXIT_OK
    assert sorted(json.loads(out)["values"]["s0"]) == [["0/1", "1/2"], ["1/2", "0/1"]]


def test_solve_rejects_dq(capsys):
    assert run(capsys, "solve", "--model", "intro")[0] == EXIT_INPUT


def test_dq_threshold_exit_codes(capsys):
    assert run(capsys, "dq", "--model", "no-analog-left", "--thresholds", "3/4,3/4")[0] == EXIT_NEGATIVE
    assert run(capsys, "dq", "--model", "no-analog-left", "--thresholds", "3/4,3/4",
               "--state", "t0")[0] == EXIT_OK


def test_dq_region_svg_deterministic(capsys):
    a = run(capsys, "dq", "--model", "intro", "--region", "--format", "svg")
    b = run(capsys, "dq", "--model", "intro", "--region", "--format", "svg")
    assert a[0] == EXIT_OK and a[1] == b[1]
    assert a[1].startswith("<svg") and a[1].count("<polygon") >= 1


def test_svg_needs_two_dims():
    with pytest.raises(PolytopeError):
        render_svg([DwcPolytope.from_json([["1/2", "1/2", "1/2"]])])
    assert render_svg([DwcPolytope.from_json([["0", "0"]])]).count("<polygon") >= 1


def test_determinacy_decide(capsys):
    assert run(capsys, "determinacy", "decide", "--model", "floor-heating")[0] == EXIT_OK
    assert run(capsys, "determinacy", "decide", "--model", "intro")[0] == EXIT_NEGATIVE
    # flower never stops and a cap of one iteration cannot settle it
    code, out = run(capsys, "determinacy", "decide", "--model", "flower", "--param", "n=2",
                    "--fixpoint-cap", "1")
    assert code == EXIT_UNKNOWN
    assert json.loads(out)["verdict"] == "unknown"


def test_determinacy_structural(capsys):
    code, out = run(capsys, "determinacy", "structural", "--model", "det-strat-mem")
    assert code == EXIT_OK and json.loads(out)["adam_first"]


def test_si_intro(capsys):
    code, out = run(capsys, "si", "--model", "intro", "--trace")
    data = json.loads(out)
    assert code == EXIT_OK and "trace" in data


def test_qual(capsys):
    code, out = run(capsys, "qual", "--model", "intro")
    assert code == EXIT_NEGATIVE and json.loads(out)["almost_sure"] is False


def test_oracle_needs_k(capsys):
    assert run(capsys, "oracle", "--model", "no-analog-right")[0] == EXIT_INPUT
    assert run(capsys, "oracle", "--model", "intro", "--k", "2")[0] == EXIT_INPUT
    code, out = run(capsys, "oracle", "--model", "no-analog-right", "--k", "2")
    assert code == EXIT_OK and json.loads(out)["value"] == [["1/2", "1/2"]]


def test_zoo_roundtrip(capsys, tmp_path):
    code, out = run(capsys, "zoo")
    assert code == EXIT_OK and "intro" in json.loads(out)
    code, out = run(capsys, "zoo", "penalty", "--param", "n=2")
    data = json.loads(out)
    g = game_from_json(data["game"])
    assert game_to_json(g) == data["game"]
    t, th = query_from_json(g, data["query"])
    assert query_to_json(g, t) == data["query"]


def test_generate_and_validate(capsys, tmp_path):
    code, out = run(capsys, "generate", "--m", "8", "--seed", "3")
    assert code == EXIT_OK
    assert out == run(capsys, "generate", "--m", "8", "--seed", "3")[1]
    data = json.loads(out)
    gp, qp = tmp_path / "g.json", tmp_path / "q.json"
    gp.write_text(json.dumps(data["game"]))
    qp.write_text(json.dumps(data["query"]))
    code, out = run(capsys, "validate", "--game", str(gp), "--query", str(qp))
    assert code == EXIT_OK and json.loads(out)["valid"]
    code, _ = run(capsys, "solve", "--game", str(gp), "--query", str(qp), "--k", "2")
    assert code == EXIT_OK


def test_bad_input(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"states": [{"id": "x", "owner": "wizard", "succ": ["x"]}], "initial": "x"}))
    code = main(["validate", "--game", str(bad)])
    err = capsys.readouterr().err
    assert code == EXIT_INPUT and "'x'" in err
    assert main(["solve", "--game", str(tmp_path / "missing.json"), "--query", str(bad)]) == EXIT_INPUT
    assert main(["zoo", "three-stage", "--param", "n=3"]) == EXIT_INPUT
    assert main(["dq", "--model", "intro", "--thresholds", "a,b"]) == EXIT_INPUT


def test_render_roundtrip(capsys, tmp_path):
    code, out = run(capsys, "solve", "--model", "no-analog-right", "--semantics", "standard")
    p = tmp_path / "r.json"
    p.write_text(out)
    code, svg = run(capsys, "render", str(p), "--key", "s0", "--title", "s0")
    assert code == EXIT_OK and svg.startswith("<svg")
    assert main(["render", str(p)]) == EXIT_INPUT


def test_bench_csv(capsys, tmp_path):
    out = tmp_path / "b.csv"
    code, txt = run(capsys, "bench", "--instances", "2", "--m", "6", "--kmax", "2", "--out", str(out))
    assert code == EXIT_OK
    assert out.read_text().splitlines()[0].startswith("instance_id,seed,k,state")
    assert json.loads(txt)["instances"] == 2
