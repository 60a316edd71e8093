import pytest

from rbnet.consts import PCHECK, PEND, PSIMUL, PSTART
from rbnet.errors import ControlTokenViolation, NetParseError, UnknownFormat
from rbnet.reductions import (
    NetTransition,
    NotReachedWithinCap,
    PetriNet,
    Reached,
    bounded_marking_reachability,
    compile_to_petri,
    dead_places,
    export_net,
    fire_sequence,
    read_net,
)


class TestCompile:
    def test_place_count(self, threeway):
        net = compile_to_petri(threeway, 1)
        assert len(net.places) == 10 + 55 + 1 + 4
        assert {PSTART, PSIMUL, PCHECK, PEND, "preconf_1"} <= set(net.places)
        assert net.initial == {PSTART: 1}
        assert net.final == {PEND: 1}
        assert len(compile_to_petri(threeway, 2).places) == len(net.places) + 1

    def test_transitions(self, relay):
        net = compile_to_petri(relay, 2)
        bcast = net.transition("bcast_0_go_1")
        assert bcast.pre == {PSIMUL: 1, "p_0": 1}
        assert bcast.post == {"preconf_1": 1, "p_1": 1}
        paired = net.transition("pair_0_0_go_1_2")
        assert paired.pre == {PSIMUL: 1, "p_0_0": 1}
        assert paired.post == {"preconf_1": 1, "p_1_2": 1}
        create = net.transition("create_1_0_3")
        assert create.post == {"preconf_2": 1, "p_0_3": 1}
        assert net.transition("break_2_0_0").post == {PSIMUL: 1, "p_0": 2}
        assert net.transition("absorb_3").pre == {PCHECK: 1, "p_3": 1}

    def test_rejects_zero_k(self, relay):
        with pytest.raises(ValueError):
            compile_to_petri(relay, 0)

    def test_dead_places(self, threeway):
        dead = dead_places(threeway, compile_to_petri(threeway, 1))
        assert "p_9" in dead
        assert "p_0_9" in dead and "p_9_9" in dead
        assert len(dead) == 11


class TestMarkingReachability:
    def test_relay_reaches_the_final_marking(self, relay):
        net = compile_to_petri(relay, 1)
        verdict = bounded_marking_reachability(net, 1, dead_places(relay, net))
        assert isinstance(verdict, Reached)
        assert len(verdict.sequence) == 8
        assert verdict.sequence[-2:] in (["absorb_3", "finish"], ["absorb_3_3", "finish"])
        assert fire_sequence(net, verdict.sequence) == {PEND: 1}

    def test_lonely_broadcaster_never_finishes(self, lonely):
        verdict = bounded_marking_reachability(compile_to_petri(lonely, 1), 1)
        assert isinstance(verdict, NotReachedWithinCap)
        assert verdict.complete

    def test_budget(self, relay):
        verdict = bounded_marking_reachability(compile_to_petri(relay, 1), 2, max_markings=5)
        assert verdict.kind == "not_reached"
        assert not verdict.complete

    def test_threads_agree(self, relay):
        net = compile_to_petri(relay, 2)
        assert bounded_marking_reachability(net, 2, threads=3) == bounded_marking_reachability(net, 2)

    def test_cap_below_final_marking(self, relay):
        with pytest.raises(ValueError):
            bounded_marking_reachability(compile_to_petri(relay, 1), 0)

    def test_control_token_invariant(self):
        net = PetriNet(
            places=(PSTART, PSIMUL, PCHECK, PEND),
            transitions=(NetTransition(name="split", pre={PSTART: 1}, post={PSIMUL: 1, PCHECK: 1}),),
            initial={PSTART: 1},
            final={PEND: 1},
        )
        with pytest.raises(ControlTokenViolation):
            bounded_marking_reachability(net)

    def test_fire_sequence_errors(self, relay):
        net = compile_to_petri(relay, 1)
        with pytest.raises(ValueError):
            fire_sequence(net, ["check"])
        with pytest.raises(ValueError):
            fire_sequence(net, ["nope"])


class TestPetriNet:
    def test_unknown_place(self):
        with pytest.raises(ValueError):
            PetriNet(places=("a",), transitions=(NetTransition(name="t", pre={"b": 1}),))

    def test_duplicate_transition(self):
        t = NetTransition(name="t", pre={"a": 1})
        with pytest.raises(ValueError):
            PetriNet(places=("a",), transitions=(t, t))


class TestNetFormats:
    @pytest.mark.parametrize("fmt", ["pnml", "net"])
    def test_read_back(self, relay, fmt: str):
        net = compile_to_petri(relay, 2)
        assert read_net(export_net(net, fmt), fmt) == net

    def test_pnml_shape(self, relay):
        text = export_net(compile_to_petri(relay, 1), "pnml", name="relay")
        assert text.startswith('<?xml version="1.0" encoding="utf-8"?>')
        assert '<net id="relay"' in text
        assert '<place idref="pend">1</place>' in text

    def test_net_shape(self, relay):
        lines = export_net(compile_to_petri(relay, 1), "net").splitlines()
        assert lines[0] == "net {rbn}"
        assert "pl pstart (1)" in lines
        assert "tr bcast_0_go_1 psimul p_0 -> preconf_1 p_1" in lines
        assert "tr break_1_0_0 preconf_1 p_0_0 -> psimul p_0*2" in lines
        assert lines[-1] == "# final pend 1"

    def test_unknown_format(self, relay):
        with pytest.raises(UnknownFormat):
            export_net(compile_to_petri(relay, 1), "dot")
        with pytest.raises(UnknownFormat):
            read_net("", "dot")

    @pytest.mark.parametrize(
        "text, fmt",
        [
            ("<pnml>", "pnml"),
            ("pl a\ntr t a -> b\n", "net"),
            ("pl a (x)\n", "net"),
            ("place a\n", "net"),
            ("tr t a b\n", "net"),
        ],
    )
    def test_malformed(self, text: str, fmt: str):
        with pytest.raises(NetParseError):
            read_net(text, fmt)
