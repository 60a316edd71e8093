import json

import pytest
from pydantic import ValidationError

from rbnet.corpus import protocol_corpus
from rbnet.execution import Execution, with_outcomes
from rbnet.trace import dump_trace, dumps_trace, load_trace
from rbnet.xutils import asset_path, print_json


class TestTrace:
    def test_dump_uses_wire_names(self, threeway_run: Execution):
        data = dump_trace(threeway_run, "fig1.rbn")
        assert data["protocol_ref"] == "fig1.rbn"
        assert data["initial"] == {"nodes": [0, 1, 2], "labels": ["q0"] * 3, "edges": [(0, 1), (0, 2)]}
        assert data["steps"][0] == {"comm": {"from": 0, "msg": "a", "to": {0: "q1", 1: "q5", 2: "q7"}}}
        assert data["steps"][1] == {"reconf": {"add": [], "remove": [(0, 1), (0, 2)]}}

    def test_file_reads_back(self, threeway_run: Execution, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(dumps_trace(threeway_run))
        loaded, ref = load_trace(str(path), threeway_run.protocol)
        assert loaded == threeway_run
        assert ref is None

    def test_outcomes_are_optional(self, relay_run: Execution, tmp_path):
        path = tmp_path / "relay.json"
        path.write_text(dumps_trace(relay_run))
        data = json.loads(path.read_text())
        assert "to" not in data["steps"][0]["comm"]
        path.write_text(dumps_trace(with_outcomes(relay_run)))
        loaded, _ = load_trace(str(path), relay_run.protocol)
        assert loaded.steps[0].outcome == ((2, "s"),)

    def test_protocol_ref_is_relative_to_the_trace(self, threeway):
        e, ref = load_trace(asset_path("fig2.trace.json"))
        assert ref == "fig1.rbn"
        assert e.protocol == threeway

    def test_missing_protocol(self, threeway_run: Execution, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(dumps_trace(threeway_run))
        with pytest.raises(ValueError):
            load_trace(str(path))

    @pytest.mark.parametrize(
        "body",
        [
            '{"steps": []}',
            '{"initial": {"nodes": [1], "labels": ["q0"]}}',
            '{"initial": {"nodes": [0], "labels": []}}',
            '{"initial": {"nodes": [0], "labels": ["q0"]}, "steps": [{"hop": {}}]}',
            '{"initial": {"nodes": [0], "labels": ["q0"]}, "steps": [{"comm": {"msg": "a"}}]}',
        ],
    )
    def test_malformed(self, threeway, tmp_path, body: str):
        path = tmp_path / "bad.json"
        path.write_text(body)
        with pytest.raises(ValidationError):
            load_trace(str(path), threeway)


class TestPrintJson:
    def test_plain_when_not_a_terminal(self, capsys):
        print_json({"holds": True})
        assert json.loads(capsys.readouterr().out) == {"holds": True}


class TestCorpus:
    def test_same_seed_same_protocols(self):
        assert list(protocol_corpus(3, 5)) == list(protocol_corpus(3, 5))

    def test_shape(self):
        for proto in protocol_corpus(5, 20, max_states=5, max_messages=2):
            assert "q0" in proto.initial_states
            assert proto.targets
            assert proto.transitions
            assert 2 <= len(proto.states) <= 5
