import json
import os
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from rbnet.configuration import Configuration
from rbnet.execution import Communication, Execution, Reconfiguration
from rbnet.protocol import BroadcastProtocol, parse_protocol
from rbnet.xutils import read_file


class InitialModel(BaseModel):
    nodes: list[int]
    labels: list[str]
    edges: list[tuple[int, int]] = []

    @model_validator(mode="after")
    def _dense(self):
        if self.nodes != list(range(len(self.nodes))):
            raise ValueError("nodes must be 0..n-1 in order")
        if len(self.labels) != len(self.nodes):
            raise ValueError("one label per node expected")
        return self


class ReconfBody(BaseModel):
    add: list[tuple[int, int]] = []
    remove: list[tuple[int, int]] = []


class CommBody(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    sender: int = Field(alias="from")
    msg: str
    to: Optional[dict[int, str]] = None


class ReconfEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")
    reconf: ReconfBody


class CommEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")
    comm: CommBody


class TraceModel(BaseModel):
    """
    On-disk form of an execution.

    .. code-block:: json

        {"protocol_ref": "fig1.rbn",
         "initial": {"nodes": [0, 1], "labels": ["q0", "q0"], "edges": [[0, 1]]},
         "steps": [{"comm": {"from": 0, "msg": "a", "to": {"0": "q1", "1": "q5"}}},
                   {"reconf": {"add": [], "remove": [[0, 1]]}}]}
    """

    protocol_ref: Optional[str] = None
    initial: InitialModel
    steps: list[Union[ReconfEntry, CommEntry]] = []


def execution_from_model(model: TraceModel, protocol: BroadcastProtocol) -> Execution:
    steps = []
    for entry in model.steps:
        if isinstance(entry, ReconfEntry):
            steps.append(Reconfiguration(added=entry.reconf.add, removed=entry.reconf.remove))
        else:
            body = entry.comm
            outcome = tuple(sorted(body.to.items())) if body.to is not None else None
            steps.append(Communication(broadcaster=body.sender, message=body.msg, outcome=outcome))
    initial = Configuration.of(model.initial.labels, model.initial.edges)
    return Execution(protocol=protocol, initial=initial, steps=tuple(steps))


def execution_to_model(e: Execution, protocol_ref: Optional[str] = None) -> TraceModel:
    steps = []
    for step in e.steps:
        if isinstance(step, Reconfiguration):
            steps.append(
                ReconfEntry(reconf=ReconfBody(add=sorted(step.added), remove=sorted(step.removed)))
            )
        else:
            to = dict(step.outcome) if step.outcome is not None else None
            steps.append(CommEntry(comm=CommBody(sender=step.broadcaster, msg=step.message, to=to)))
    initial = InitialModel(
        nodes=list(e.initial.nodes), labels=list(e.initial.labels), edges=sorted(e.initial.edges)
    )
    return TraceModel(protocol_ref=protocol_ref, initial=initial, steps=steps)


def dump_trace(e: Execution, protocol_ref: Optional[str] = None) -> dict:
    return execution_to_model(e, protocol_ref).model_dump(by_alias=True, exclude_none=True)


def dumps_trace(e: Execution, protocol_ref: Optional[str] = None) -> str:
    return json.dumps(dump_trace(e, protocol_ref), indent=2) + "\n"


def load_trace(path: str, protocol: Optional[BroadcastProtocol] = None) -> tuple[Execution, Optional[str]]:
    """
    Reads a trace file. Without an explicit ``protocol`` the ``protocol_ref``
    of the file is loaded, relative to the trace's directory.

    :raises pydantic.ValidationError: on a malformed trace
    :raises ValueError: when no protocol is available
    """
    model = TraceModel.model_validate_json(read_file(path))
    if protocol is None:
        if model.protocol_ref is None:
            raise ValueError(f"{path}: no protocol_ref and no protocol given")
        ref = model.protocol_ref
        if not os.path.isabs(ref):
            ref = os.path.join(os.path.dirname(os.path.abspath(path)), ref)
        protocol = parse_protocol(read_file(ref))
    return execution_from_model(model, protocol), model.protocol_ref
