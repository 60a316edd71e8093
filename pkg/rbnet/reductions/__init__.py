from rbnet.reductions.marking import (
    NotReachedWithinCap,
    Reached,
    bounded_marking_reachability,
    fire_sequence,
)
from rbnet.reductions.minsky import (
    Inc,
    MinskyMachine,
    MinskyRun,
    TestDec,
    encode_minsky,
    format_minsky,
    parse_minsky,
    run_minsky,
)
from rbnet.reductions.netio import export_net, read_net
from rbnet.reductions.petri import NetTransition, PetriNet, compile_to_petri, dead_places

__all__ = [
    "Inc",
    "MinskyMachine",
    "MinskyRun",
    "NetTransition",
    "NotReachedWithinCap",
    "PetriNet",
    "Reached",
    "TestDec",
    "bounded_marking_reachability",
    "compile_to_petri",
    "dead_places",
    "encode_minsky",
    "export_net",
    "fire_sequence",
    "format_minsky",
    "parse_minsky",
    "read_net",
    "run_minsky",
]
