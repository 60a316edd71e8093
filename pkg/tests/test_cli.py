import json

import pytest

from rbnet.cli import main
from rbnet.consts import EXIT_BUDGET, EXIT_FAILS, EXIT_HOLDS, EXIT_USAGE
from rbnet.protocol import parse_protocol
from rbnet.reductions import read_net
from rbnet.trace import load_trace
from rbnet.xutils import asset_path

from conftest import LONELY, RELAY


def run(capsys, *argv) -> tuple[int, dict]:
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else {}


class TestCheck:
    def test_saturation(self, capsys):
        code, payload = run(capsys, "check", asset_path("fig1.rbn"))
        assert code == EXIT_HOLDS
        assert payload["holds"] is True
        assert payload["method"] == "saturation"
        assert payload["certificate"]["iterations"] == 2

    def test_bundled_asset_by_name(self, capsys):
        code, payload = run(capsys, "check", "fig1.rbn")
        assert code == EXIT_HOLDS

    def test_saturation_fails(self, capsys, write_protocol):
        code, payload = run(capsys, "check", write_protocol(LONELY))
        assert code == EXIT_FAILS
        assert payload["holds"] is False

    def test_saturation_answers_local_regimes(self, capsys):
        code, payload = run(capsys, "check", "fig1.rbn", "--policy", "local=1")
        assert code == EXIT_HOLDS
        assert "note" in payload

    def test_constant_regime_needs_nodes(self, capsys):
        assert main(["check", "fig1.rbn", "--policy", "k=1"]) == EXIT_USAGE

    def test_coverability(self, capsys, write_protocol):
        code, payload = run(capsys, "check", write_protocol(LONELY), "--coverability", "done")
        assert code == EXIT_HOLDS
        assert payload["property"] == "coverability"
        assert main(["check", "fig1.rbn", "--coverability", "nowhere"]) == EXIT_USAGE

    def test_witness(self, capsys, tmp_path):
        witness = tmp_path / "w.json"
        dot = tmp_path / "w.dot"
        code, payload = run(
            capsys, "check", "fig1.rbn", "--nodes", "3", "--witness", str(witness), "--dot", str(dot)
        )
        assert code == EXIT_HOLDS
        assert payload["nodes"] == 3
        assert payload["communications"] == 4
        assert dot.read_text().startswith("graph run {")
        e, ref = load_trace(str(witness))
        assert ref.endswith("fig1.rbn")
        assert e.initial.size == 3
        code, report = run(capsys, "validate", str(witness))
        assert code == EXIT_HOLDS
        assert report["synchronizes"] is True

    def test_exhaust(self, capsys):
        code, payload = run(capsys, "check", "fig1.rbn", "--nodes", "3", "--exhaust")
        assert code == EXIT_HOLDS
        assert [r["verdict"] for r in payload["results"]] == ["exhausted", "exhausted", "found"]

    def test_no_witness(self, capsys):
        code, payload = run(capsys, "check", "fig1.rbn", "--nodes", "3", "--policy", "k=1")
        assert code == EXIT_FAILS
        assert payload["holds"] is False

    def test_budget(self, capsys):
        code, payload = run(capsys, "check", "fig1.rbn", "--nodes", "3", "--max-depth", "2")
        assert code == EXIT_BUDGET
        assert payload["holds"] is None

    def test_unbounded_enumeration(self, capsys, write_protocol):
        path = write_protocol(RELAY)
        assert main(["check", path, "--nodes", "7", "--policy", "balanced=1"]) == EXIT_USAGE

    def test_missing_file(self, capsys, tmp_path):
        assert main(["check", str(tmp_path / "nope.rbn")]) == EXIT_USAGE

    def test_parse_error(self, capsys, write_protocol):
        assert main(["check", write_protocol("init p\np m q\n")]) == EXIT_USAGE


class TestValidate:
    def test_passes(self, capsys):
        code, payload = run(capsys, "validate", "fig2.trace.json", "--policy", "k=2")
        assert code == EXIT_HOLDS
        assert payload["passed"] is True
        assert payload["initial"] is True
        assert payload["synchronizes"] is True

    def test_first_violation(self, capsys):
        code, payload = run(capsys, "validate", "fig2.trace.json", "--policy", "k=1")
        assert code == EXIT_FAILS
        assert payload["first_violation"]["index"] == 1

    def test_topology(self, capsys):
        code, payload = run(capsys, "validate", "fig2.trace.json", "--degree", "1")
        assert code == EXIT_FAILS
        assert payload["first_violation"]["name"] == "degree<=1"

    def test_potential(self, capsys):
        code, payload = run(capsys, "validate", "fig2.trace.json", "--potential", "2")
        assert payload["potential"]["values"] == [0, 2, 0, 2, 1, 3, 1, 3]
        assert payload["potential"]["kappa"] == 2

    def test_disabled_step(self, capsys, tmp_path):
        trace = json.loads(open(asset_path("fig2.trace.json")).read())
        trace["steps"][2]["comm"]["msg"] = "d"
        trace["protocol_ref"] = asset_path("fig1.rbn")
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(trace))
        code, payload = run(capsys, "validate", str(path))
        assert code == EXIT_FAILS
        assert payload["index"] == 2


class TestTransform:
    @pytest.mark.parametrize(
        "args, policy, nodes",
        [
            (["--kind", "id"], "f=identity", 3),
            (["--kind", "f", "--f", "sqrt"], "f=floor_sqrt", 9),
            (["--kind", "1loc"], "local=1", 6),
            (["--kind", "strong", "--k", "2"], "strong=2", 12),
        ],
    )
    def test_threeway_run(self, capsys, tmp_path, args, policy: str, nodes: int):
        out = tmp_path / "out.json"
        code, payload = run(capsys, "transform", "fig2.trace.json", *args, "-o", str(out))
        assert code == EXIT_HOLDS
        assert payload["policy"] == policy
        assert payload["nodes"] == nodes
        code, report = run(capsys, "validate", str(out), "--policy", policy.replace("identity", "id"))
        assert code == EXIT_HOLDS

    def test_inline_trace(self, capsys):
        code, payload = run(capsys, "transform", "fig2.trace.json", "--kind", "id")
        assert code == EXIT_HOLDS
        assert payload["trace"]["initial"]["labels"] == ["q0"] * 3

    def test_not_balanced(self, capsys):
        assert main(["transform", "fig2.trace.json", "--kind", "balanced"]) == EXIT_USAGE

    def test_missing_k(self, capsys):
        assert main(["transform", "fig2.trace.json", "--kind", "lift-k"]) == EXIT_USAGE

    def test_lift_k_rejects_wide_changes(self, capsys):
        assert main(["transform", "fig2.trace.json", "--kind", "lift-k", "--k", "1"]) == EXIT_USAGE


class TestCompile:
    def test_minsky(self, capsys, tmp_path):
        out = tmp_path / "inc.rbn"
        code, payload = run(
            capsys, "compile", "inc.mm", "--target", "protocol-from-minsky", "-o", str(out)
        )
        assert code == EXIT_HOLDS
        assert payload["states"] == 50
        assert payload["machine"]["halted"] is True
        assert len(parse_protocol(out.read_text()).states) == 50

    def test_petri(self, capsys, tmp_path, write_protocol):
        out = tmp_path / "relay.net"
        code, payload = run(
            capsys,
            "compile",
            write_protocol(RELAY),
            "--target",
            "petri",
            "--format",
            "net",
            "--verify-cap",
            "1",
            "-o",
            str(out),
        )
        assert code == EXIT_HOLDS
        assert payload["verify"]["kind"] == "reached"
        assert len(read_net(out.read_text(), "net").places) == payload["places"]

    def test_petri_not_reached(self, capsys, write_protocol):
        code, payload = run(
            capsys, "compile", write_protocol(LONELY), "--target", "petri", "--verify-cap", "1"
        )
        assert code == EXIT_FAILS
        assert payload["net"].startswith("<?xml")

    def test_petri_budget(self, capsys, write_protocol):
        code, _ = run(
            capsys,
            "compile",
            write_protocol(RELAY),
            "--target",
            "petri",
            "--verify-cap",
            "2",
            "--max-states",
            "5",
        )
        assert code == EXIT_BUDGET
