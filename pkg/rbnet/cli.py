import argparse
import logging
import os
import sys
from collections import Counter
from typing import Optional

from pydantic import ValidationError

from rbnet import consts
from rbnet.errors import (
    BudgetUnbounded,
    DisabledStep,
    ProtocolError,
    RbnetError,
)
from rbnet.execution import Execution, execution_to_dot, replay, trim_to_communications
from rbnet.policy import (
    ConstraintPolicy,
    FConstrained,
    KConstrained,
    KLocallyConstrained,
    StronglyKConstrained,
    Unconstrained,
    parse_bounding_function,
    parse_policy,
)
from rbnet.protocol import BroadcastProtocol, format_protocol, parse_protocol
from rbnet.reductions import (
    bounded_marking_reachability,
    compile_to_petri,
    dead_places,
    encode_minsky,
    export_net,
    parse_minsky,
    run_minsky,
)
from rbnet.saturation import decide_coverability_unconstrained, decide_synchronization_unconstrained
from rbnet.search import SearchBudget, search_synchronizing_execution
from rbnet.trace import dump_trace, dumps_trace, load_trace
from rbnet.transforms import (
    balanced_to_constrained_k1,
    lift_one_to_k,
    to_f_constrained,
    to_id_constrained,
    to_one_locally_constrained,
    weak_to_strong,
)
from rbnet.validate import potential_sequence, validate_execution
from rbnet.xutils import asset_path, print_json, read_file, write_file

logger = logging.getLogger("rbnet.cli")

TRANSFORM_KINDS = ("id", "f", "1loc", "lift-k", "strong", "balanced")


class CheckFailed(RbnetError):
    """An artifact was produced but rejected by the toolkit's own checks."""


def say(message: str):
    print(message, file=sys.stderr)


def resolve(path: str) -> str:
    """A path on disk, or the bundled asset of that name."""
    if os.path.exists(path):
        return path
    bundled = asset_path(os.path.basename(path))
    if os.path.exists(bundled):
        return bundled
    return path


def load_protocol(path: str) -> BroadcastProtocol:
    return parse_protocol(read_file(resolve(path)))


def relative_ref(target: str, output: Optional[str]) -> str:
    base = os.path.dirname(os.path.abspath(output)) if output else os.getcwd()
    return os.path.relpath(os.path.abspath(target), base)


def _policy(args) -> ConstraintPolicy:
    return parse_policy(args.policy, args.degree, args.path)


def _saturation_applies(policy: ConstraintPolicy) -> bool:
    if policy.has_topology:
        return False
    regime = policy.regime
    if isinstance(regime, Unconstrained):
        return True
    if isinstance(regime, KLocallyConstrained):
        return True
    return isinstance(regime, FConstrained) and regime.f.diverging


def cmd_check(args) -> int:
    path = resolve(args.protocol)
    proto = load_protocol(path)
    if args.coverability:
        if args.coverability not in proto.states:
            raise ProtocolError(f"unknown state {args.coverability!r}")
        holds = decide_coverability_unconstrained(proto, args.coverability)
        print_json({"property": "coverability", "state": args.coverability, "holds": holds, "method": "saturation"})
        say(f"{args.coverability} is {'coverable' if holds else 'not coverable'}")
        return consts.EXIT_HOLDS if holds else consts.EXIT_FAILS
    if not proto.targets:
        raise ProtocolError("protocol declares no target set")
    policy = _policy(args)

    if args.nodes is None:
        if not _saturation_applies(policy):
            raise ValueError(f"--nodes is required for policy {policy}")
        verdict = decide_synchronization_unconstrained(proto)
        payload = {
            "property": "synchronization",
            "policy": str(policy),
            "method": "saturation",
            "holds": verdict.holds,
            "certificate": verdict.certificate.model_dump(),
        }
        if not isinstance(policy.regime, Unconstrained):
            payload["note"] = "same answer as unconstrained reconfiguration"
        print_json(payload)
        say(f"synchronization under {policy}: {'YES' if verdict.holds else 'NO'}")
        return consts.EXIT_HOLDS if verdict.holds else consts.EXIT_FAILS

    budget = SearchBudget(max_states=args.max_states, max_depth=args.max_depth)
    sizes = range(1, args.nodes + 1) if args.exhaust else [args.nodes]
    results = []
    found = None
    for n in sizes:
        try:
            r = search_synchronizing_execution(
                proto, n, policy, budget=budget, initial_edges=args.initial_edges, threads=args.threads
            )
        except BudgetUnbounded as e:
            raise ValueError(str(e)) from e
        results.append(r)
        say(f"n={n}: {r.verdict} ({r.stats.states} states, depth {r.stats.depth})")
        if r.found:
            found = r
            break

    payload = {
        "property": "synchronization",
        "policy": str(policy),
        "method": results[-1].method,
        "holds": None,
        "results": [{"nodes": r.nodes, "method": r.method, **r.summary()} for r in results],
    }
    if found is not None:
        witness = found.witness
        report = validate_execution(witness, policy)
        if not report.passed or not proto.is_target(replay(witness)[-1].labels):
            raise CheckFailed(f"witness rejected: {report.first_violation}")
        payload["holds"] = True
        payload["nodes"] = found.nodes
        payload["communications"] = witness.communications
        ref = relative_ref(path, args.witness)
        if args.witness:
            write_file(args.witness, dumps_trace(witness, ref))
            payload["witness"] = args.witness
        else:
            payload["witness"] = dump_trace(witness, ref)
        if args.dot:
            write_file(args.dot, execution_to_dot(witness))
        print_json(payload)
        return consts.EXIT_HOLDS
    if any(r.verdict == "budget_exceeded" for r in results):
        print_json(payload)
        return consts.EXIT_BUDGET
    payload["holds"] = False
    print_json(payload)
    return consts.EXIT_FAILS


def _load(args) -> tuple[Execution, str]:
    """Trace and the absolute path of its protocol."""
    trace_path = resolve(args.trace)
    protocol = None
    protocol_path = None
    if args.protocol:
        protocol_path = resolve(args.protocol)
        protocol = load_protocol(protocol_path)
    e, ref = load_trace(trace_path, protocol)
    if protocol_path is None:
        protocol_path = ref if os.path.isabs(ref) else os.path.join(os.path.dirname(os.path.abspath(trace_path)), ref)
    return e, protocol_path


def cmd_validate(args) -> int:
    e, _ = _load(args)
    policy = _policy(args)
    try:
        configurations = replay(e)
    except DisabledStep as err:
        print_json({"passed": False, "index": err.index, "error": str(err)})
        say(f"replay failed at step {err.index}")
        return consts.EXIT_FAILS
    report = validate_execution(e, policy)
    payload = report.model_dump()
    violation = report.first_violation
    payload.update(
        passed=report.passed,
        first_violation=violation.model_dump() if violation else None,
        initial=e.is_initial(),
        synchronizes=e.protocol.is_target(configurations[-1].labels),
    )
    if args.potential is not None:
        trimmed = trim_to_communications(e)
        if trimmed.comm_bounded:
            p = potential_sequence(trimmed, args.potential)
            payload["potential"] = {"values": p.values, "kappa": p.kappa}
    print_json(payload)
    if violation:
        say(f"{violation.name} violated at index {violation.index}: {violation.detail}")
    return consts.EXIT_HOLDS if report.passed else consts.EXIT_FAILS


def _transform(e: Execution, args) -> tuple[Execution, ConstraintPolicy]:
    kind = args.kind
    if kind == "id":
        return to_id_constrained(e), ConstraintPolicy(regime=FConstrained(f=parse_bounding_function("identity")))
    if kind == "f":
        f = parse_bounding_function(args.f)
        return to_f_constrained(e, f), ConstraintPolicy(regime=FConstrained(f=f))
    if kind == "1loc":
        return to_one_locally_constrained(e), ConstraintPolicy(regime=KLocallyConstrained(k=1))
    if kind == "lift-k":
        return lift_one_to_k(e, args.k), ConstraintPolicy(regime=StronglyKConstrained(k=args.k))
    if kind == "strong":
        return weak_to_strong(e, args.k), ConstraintPolicy(regime=StronglyKConstrained(k=args.k))
    return balanced_to_constrained_k1(e, args.copies), ConstraintPolicy(regime=KConstrained(k=1))


def self_check(source: Execution, output: Execution, policy: ConstraintPolicy):
    """
    Rejects a transformed execution that breaks its regime, loses
    synchronization or does not end in a multiple of the source's final
    label counts.
    """
    report = validate_execution(output, policy)
    if not report.passed:
        raise CheckFailed(f"output is not {policy}: {report.first_violation.detail}")
    before, after = replay(source)[-1], replay(output)[-1]
    if source.protocol.is_target(before.labels) and not output.protocol.is_target(after.labels):
        raise CheckFailed("output no longer synchronizes")
    if before.size:
        factor = after.size // before.size
        expected = Counter({s: c * factor for s, c in before.label_counts().items()})
        if after.size != factor * before.size or after.label_counts() != expected:
            raise CheckFailed("final label counts are not a multiple of the source's")


def cmd_transform(args) -> int:
    e, protocol_path = _load(args)
    source = trim_to_communications(e)
    if args.kind in ("lift-k", "strong") and args.k is None:
        raise ValueError(f"--k is required for --kind {args.kind}")
    if args.kind == "f" and args.f is None:
        raise ValueError("--f is required for --kind f")
    output, policy = _transform(source, args)
    self_check(source, output, policy)
    payload = {
        "kind": args.kind,
        "policy": str(policy),
        "nodes": output.initial.size,
        "steps": len(output.steps),
        "communications": output.communications,
        "passed": True,
    }
    ref = relative_ref(protocol_path, args.output)
    if args.output:
        write_file(args.output, dumps_trace(output, ref))
        payload["output"] = args.output
    else:
        payload["trace"] = dump_trace(output, ref)
    print_json(payload)
    say(f"{args.kind}: {e.initial.size} -> {output.initial.size} nodes, {len(output.steps)} steps")
    return consts.EXIT_HOLDS


def cmd_compile(args) -> int:
    source = resolve(args.input)
    if args.target == "protocol-from-minsky":
        machine = parse_minsky(read_file(source))
        proto = encode_minsky(machine)
        text = format_protocol(proto)
        if parse_protocol(text) != proto:
            raise CheckFailed("printed protocol does not parse back")
        payload = {
            "target": args.target,
            "states": len(proto.states),
            "messages": len(proto.messages),
            "transitions": len(proto.transitions),
            "machine": run_minsky(machine, args.fuel).model_dump(),
        }
        if args.output:
            write_file(args.output, text)
            payload["output"] = args.output
        else:
            payload["protocol"] = text
        print_json(payload)
        return consts.EXIT_HOLDS

    proto = load_protocol(source)
    net = compile_to_petri(proto, args.k)
    text = export_net(net, args.format)
    payload = {
        "target": args.target,
        "format": args.format,
        "places": len(net.places),
        "transitions": len(net.transitions),
    }
    if args.output:
        write_file(args.output, text)
        payload["output"] = args.output
    else:
        payload["net"] = text
    code = consts.EXIT_HOLDS
    if args.verify_cap is not None:
        verdict = bounded_marking_reachability(
            net, args.verify_cap, dead_places(proto, net), threads=args.threads, max_markings=args.max_states
        )
        payload["verify"] = verdict.model_dump()
        if verdict.kind == "not_reached":
            code = consts.EXIT_FAILS if verdict.complete else consts.EXIT_BUDGET
        say(f"final marking {'reached' if verdict.kind == 'reached' else 'not reached'} with cap {args.verify_cap}")
    print_json(payload)
    return code


def _add_policy(p: argparse.ArgumentParser, default: str):
    p.add_argument("--policy", default=default, help="unconstrained, k=N, strong=N, balanced=N, local=N or f=FUNC")
    p.add_argument("--degree", type=int, help="bound on node degrees")
    p.add_argument("--path", type=int, help="bound on simple path lengths")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbnet", description="Reconfigurable broadcast network toolkit")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="decide or search for synchronization")
    check.add_argument("protocol")
    _add_policy(check, "unconstrained")
    check.add_argument("--nodes", type=int)
    check.add_argument("--exhaust", action="store_true", help="try every node count up to --nodes")
    check.add_argument("--coverability", metavar="STATE")
    check.add_argument("--initial-edges", choices=("all", "empty"), default="all")
    check.add_argument("--max-states", type=int, default=consts.DEFAULT_BUDGET_STATES)
    check.add_argument("--max-depth", type=int, default=consts.DEFAULT_BUDGET_DEPTH)
    check.add_argument("--threads", type=int, default=consts.DEFAULT_THREADS)
    check.add_argument("--witness", metavar="OUT.json")
    check.add_argument("--dot", metavar="OUT.dot")
    check.set_defaults(handler=cmd_check)

    validate = sub.add_parser("validate", help="replay a trace and check a policy")
    validate.add_argument("trace")
    validate.add_argument("--protocol")
    _add_policy(validate, "unconstrained")
    validate.add_argument("--potential", type=int, metavar="K")
    validate.set_defaults(handler=cmd_validate)

    transform = sub.add_parser("transform", help="rewrite a trace into another regime")
    transform.add_argument("trace")
    transform.add_argument("--protocol")
    transform.add_argument("--kind", choices=TRANSFORM_KINDS, required=True)
    transform.add_argument("--f", help="bounding function for --kind f")
    transform.add_argument("--k", type=int)
    transform.add_argument("--copies", type=int)
    transform.add_argument("-o", "--output")
    transform.set_defaults(handler=cmd_transform)

    compile_ = sub.add_parser("compile", help="compile a protocol to a net or a machine to a protocol")
    compile_.add_argument("input")
    compile_.add_argument("--target", choices=("petri", "protocol-from-minsky"), required=True)
    compile_.add_argument("--k", type=int, default=1)
    compile_.add_argument("--format", choices=consts.NET_FORMATS, default="pnml")
    compile_.add_argument("--verify-cap", type=int)
    compile_.add_argument("--max-states", type=int, default=consts.DEFAULT_BUDGET_STATES)
    compile_.add_argument("--threads", type=int, default=consts.DEFAULT_THREADS)
    compile_.add_argument("--fuel", type=int, default=10_000)
    compile_.add_argument("-o", "--output")
    compile_.set_defaults(handler=cmd_compile)
    return parser


def configure_logging(verbose: int):
    if consts.DEBUG or verbose > 1:
        level = logging.DEBUG
    elif verbose:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(name)s: %(message)s")


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except CheckFailed as e:
        logger.error("self-check failed: %s", e)
        return consts.EXIT_FAILS
    except (RbnetError, ValidationError, ValueError, OSError) as e:
        logger.error("%s", e)
        return consts.EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
