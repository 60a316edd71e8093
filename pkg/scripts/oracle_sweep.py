# /// script
# requires-python = ">=3.10"
# dependencies = [
#     "btrees",
#     "networkx",
#     "pydantic",
#     "pygments",
# ]
# ///
"""
Compares the saturation decider with bounded searches over a seeded corpus
of random protocols.

A witness found by search on any node count must agree with a positive
saturation verdict. A positive verdict without a witness up to ``--nodes``
is only reported, since the synchronizing network may be larger.
"""

import argparse
import logging
import os
import sys

root_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, root_dir)

from rbnet.corpus import protocol_corpus
from rbnet.policy import ConstraintPolicy, parse_policy
from rbnet.protocol import format_protocol
from rbnet.saturation import decide_synchronization_unconstrained
from rbnet.search import SearchBudget, search_synchronizing_execution
from rbnet.xutils import print_json

logger = logging.getLogger("rbnet.oracle")


def sweep(seed: int, size: int, nodes: int, policy: ConstraintPolicy, budget: SearchBudget) -> dict:
    tally = {"protocols": 0, "agree": 0, "unconfirmed": 0, "budget_exceeded": 0, "disagree": 0}
    for proto in protocol_corpus(seed, size, max_states=6, max_messages=3):
        tally["protocols"] += 1
        holds = decide_synchronization_unconstrained(proto).holds
        found = exceeded = False
        for n in range(1, nodes + 1):
            r = search_synchronizing_execution(proto, n, policy, budget=budget)
            if r.found:
                found = True
                break
            exceeded = exceeded or r.verdict == "budget_exceeded"
        if found and not holds:
            tally["disagree"] += 1
            logger.warning("witness found but saturation says no:\n%s", format_protocol(proto))
        elif found == holds:
            tally["agree"] += 1
        elif exceeded:
            tally["budget_exceeded"] += 1
        else:
            tally["unconfirmed"] += 1
            logger.info("no witness up to %d nodes for a synchronizing protocol", nodes)
    return tally


def main():
    parser = argparse.ArgumentParser(description="saturation vs search oracle sweep")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--size", type=int, default=500)
    parser.add_argument("--nodes", type=int, default=5)
    parser.add_argument("--policy", default="unconstrained")
    parser.add_argument("--max-states", type=int, default=200_000)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)

    tally = sweep(args.seed, args.size, args.nodes, parse_policy(args.policy), SearchBudget(max_states=args.max_states))
    print_json(tally)
    sys.exit(1 if tally["disagree"] else 0)


if __name__ == "__main__":
    main()
