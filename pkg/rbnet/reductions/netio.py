import re
from xml.etree.ElementTree import Element, ParseError, SubElement, fromstring, indent, tostring

from rbnet.consts import NET_FORMATS
from rbnet.errors import NetParseError, UnknownFormat
from rbnet.reductions.petri import NetTransition, PetriNet

PNML_NS = "http://www.pnml.org/version-2009/grammar/pnml"
PTNET_TYPE = "http://www.pnml.org/version-2009/grammar/ptnet"
TOOL = "rbnet"

_WEIGHTED = re.compile(r"^(?P<place>[^*\s]+)(?:\*(?P<weight>\d+))?$")


def _named(parent: Element, tag: str, ident: str) -> Element:
    node = SubElement(parent, tag, id=ident)
    SubElement(SubElement(node, "name"), "text").text = ident
    return node


def _to_pnml(net: PetriNet, name: str) -> str:
    root = Element("pnml", xmlns=PNML_NS)
    net_node = SubElement(root, "net", id=name, type=PTNET_TYPE)
    page = SubElement(net_node, "page", id="page0")
    for place in net.places:
        node = _named(page, "place", place)
        tokens = net.initial.get(place, 0)
        if tokens:
            SubElement(SubElement(node, "initialMarking"), "text").text = str(tokens)
    arcs = 0
    for t in net.transitions:
        _named(page, "transition", t.name)
        for place, weight in t.pre.items():
            arcs += 1
            arc = SubElement(page, "arc", id=f"a{arcs}", source=place, target=t.name)
            if weight != 1:
                SubElement(SubElement(arc, "inscription"), "text").text = str(weight)
        for place, weight in t.post.items():
            arcs += 1
            arc = SubElement(page, "arc", id=f"a{arcs}", source=t.name, target=place)
            if weight != 1:
                SubElement(SubElement(arc, "inscription"), "text").text = str(weight)
    tool = SubElement(net_node, "toolspecific", tool=TOOL, version="1")
    final = SubElement(tool, "finalMarking")
    for place, tokens in net.final.items():
        SubElement(final, "place", idref=place).text = str(tokens)
    indent(root)
    return '<?xml version="1.0" encoding="utf-8"?>\n' + tostring(root, encoding="unicode") + "\n"


def _weighted(items: dict[str, int]) -> str:
    return " ".join(place if w == 1 else f"{place}*{w}" for place, w in items.items())


def _to_net(net: PetriNet, name: str) -> str:
    lines = [f"net {{{name}}}"]
    for place in net.places:
        tokens = net.initial.get(place, 0)
        lines.append(f"pl {place} ({tokens})" if tokens else f"pl {place}")
    for t in net.transitions:
        lines.append(f"tr {t.name} {_weighted(t.pre)} -> {_weighted(t.post)}".replace("  ", " "))
    for place, tokens in net.final.items():
        lines.append(f"# final {place} {tokens}")
    return "\n".join(lines) + "\n"


def export_net(net: PetriNet, fmt: str, name: str = "rbn") -> str:
    """
    Writes a net as PNML or in the line-based ``.net`` format.

    The final marking has no standard slot in either format: PNML keeps it in
    a ``toolspecific`` element, ``.net`` in ``# final <place> <tokens>``
    comment lines.

    :param net: Net to export
    :type net: PetriNet
    :param fmt: ``pnml`` or ``net``
    :type fmt: str
    :raises UnknownFormat: for any other format
    """
    if fmt == "pnml":
        return _to_pnml(net, name)
    if fmt == "net":
        return _to_net(net, name)
    raise UnknownFormat(f"unknown net format {fmt!r}, expected one of {NET_FORMATS}")


def _strip(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _text(node: Element, default: str = "") -> str:
    for child in node.iter():
        if _strip(child.tag) == "text" and child.text is not None:
            return child.text.strip()
    return default


def _build(places, transitions, initial, final) -> PetriNet:
    try:
        return PetriNet(
            places=tuple(places), transitions=tuple(transitions), initial=initial, final=final
        )
    except ValueError as e:
        raise NetParseError(str(e)) from e


def _from_pnml(text: str) -> PetriNet:
    try:
        root = fromstring(text)
    except ParseError as e:
        raise NetParseError(f"malformed PNML: {e}") from e
    places: list[str] = []
    initial: dict[str, int] = {}
    transitions: dict[str, tuple[dict, dict]] = {}
    final: dict[str, int] = {}
    arcs = []
    for node in root.iter():
        tag = _strip(node.tag)
        if tag == "place" and "id" in node.attrib:
            places.append(node.attrib["id"])
            for child in node:
                if _strip(child.tag) == "initialMarking":
                    initial[node.attrib["id"]] = int(_text(child, "0"))
        elif tag == "transition":
            transitions[node.attrib["id"]] = ({}, {})
        elif tag == "arc":
            weight = 1
            for child in node:
                if _strip(child.tag) == "inscription":
                    weight = int(_text(child, "1"))
            arcs.append((node.attrib["source"], node.attrib["target"], weight))
        elif tag == "finalMarking":
            for child in node:
                final[child.attrib["idref"]] = int(child.text or 0)
    for source, target, weight in arcs:
        if target in transitions:
            transitions[target][0][source] = weight
        elif source in transitions:
            transitions[source][1][target] = weight
        else:
            raise NetParseError(f"arc {source} -> {target} does not touch a transition")
    return _build(
        places,
        [NetTransition(name=name, pre=pre, post=post) for name, (pre, post) in transitions.items()],
        {p: c for p, c in initial.items() if c},
        final,
    )


def _parse_weighted(items: list[str], lineno: int) -> dict[str, int]:
    out: dict[str, int] = {}
    for item in items:
        match = _WEIGHTED.match(item)
        if match is None:
            raise NetParseError(f"line {lineno}: bad arc {item!r}")
        out[match["place"]] = out.get(match["place"], 0) + int(match["weight"] or 1)
    return out


def _from_net(text: str) -> PetriNet:
    places: list[str] = []
    initial: dict[str, int] = {}
    transitions: list[NetTransition] = []
    final: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        words = raw.split()
        if not words or words[0] == "net":
            continue
        if words[0] == "#":
            if len(words) == 4 and words[1] == "final":
                final[words[2]] = int(words[3])
            continue
        if words[0] == "pl":
            if len(words) not in (2, 3):
                raise NetParseError(f"line {lineno}: expected 'pl <name> [(<tokens>)]'")
            places.append(words[1])
            if len(words) == 3:
                tokens = words[2].strip("()")
                if not tokens.isdigit():
                    raise NetParseError(f"line {lineno}: bad marking {words[2]!r}")
                if int(tokens):
                    initial[words[1]] = int(tokens)
        elif words[0] == "tr":
            if len(words) < 3 or "->" not in words:
                raise NetParseError(f"line {lineno}: expected 'tr <name> <pre> -> <post>'")
            arrow = words.index("->")
            pre = _parse_weighted(words[2:arrow], lineno)
            post = _parse_weighted(words[arrow + 1 :], lineno)
            transitions.append(NetTransition(name=words[1], pre=pre, post=post))
        else:
            raise NetParseError(f"line {lineno}: unknown keyword {words[0]!r}")
    return _build(places, transitions, initial, final)


def read_net(text: str, fmt: str) -> PetriNet:
    """
    Reads back a net written by :func:`export_net`.

    :raises UnknownFormat: for formats other than ``pnml`` and ``net``
    :raises NetParseError: on malformed input
    """
    if fmt == "pnml":
        return _from_pnml(text)
    if fmt == "net":
        return _from_net(text)
    raise UnknownFormat(f"unknown net format {fmt!r}, expected one of {NET_FORMATS}")
