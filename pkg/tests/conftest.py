import sys
import os

# Ensure the project root is in sys.path for test imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import pytest

from rbnet.configuration import Configuration
from rbnet.execution import Communication, Execution, Reconfiguration
from rbnet.protocol import parse_protocol
from rbnet.reductions import parse_minsky
from rbnet.trace import load_trace
from rbnet.xutils import asset_path, read_file

RELAY = """
init i
target done
i !go s
i ?go r
s !ok done
r ?ok done
done ?ok done
"""

# whoever broadcasts last is left waiting in x
LONELY = """
init i
target done
i !a x
x ?a done
"""


@pytest.fixture
def threeway():
    return parse_protocol(read_file(asset_path("fig1.rbn")))


@pytest.fixture
def threeway_run(threeway):
    e, _ = load_trace(asset_path("fig2.trace.json"), threeway)
    return e


@pytest.fixture
def relay():
    return parse_protocol(RELAY)


@pytest.fixture
def lonely():
    return parse_protocol(LONELY)


@pytest.fixture
def relay_run(relay):
    """1-constrained synchronizing run on three nodes, one link change per step."""
    return Execution(
        protocol=relay,
        initial=Configuration.of(["i", "i", "i"], [(0, 1)]),
        steps=(
            Communication(broadcaster=2, message="go"),
            Reconfiguration(added=[(1, 2)]),
            Communication(broadcaster=0, message="go"),
            Reconfiguration(removed=[(0, 1)]),
            Communication(broadcaster=2, message="ok"),
            Reconfiguration(added=[(0, 1)]),
            Communication(broadcaster=0, message="ok"),
        ),
    )


@pytest.fixture
def balanced_run(threeway):
    """1-balanced run on threeway: two isolated broadcasts pay for two new links."""
    return Execution(
        protocol=threeway,
        initial=Configuration.of(["q0", "q0", "q0"]),
        steps=(
            Communication(broadcaster=0, message="a"),
            Reconfiguration(),
            Communication(broadcaster=1, message="a"),
            Reconfiguration(added=[(0, 2), (1, 2)]),
            Communication(broadcaster=2, message="a"),
        ),
    )


@pytest.fixture
def write_protocol(tmp_path):
    def write(text: str, name: str = "proto.rbn") -> str:
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


@pytest.fixture
def inc_machine():
    return parse_minsky(read_file(asset_path("inc.mm")))


@pytest.fixture
def countdown_machine():
    return parse_minsky(read_file(asset_path("countdown.mm")))
