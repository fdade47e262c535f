"""Lumped-element netlist format for tunable-coupler circuits.

The format is line based. ``#`` starts a comment, tokens are separated by
whitespace and every value carries its unit::

    node Q1 junction ejb=9.015GHz ejs=9.015GHz [cj=1.5fF]
    node P1 passive
    gcap Q1 72.5fF
    cap Q1 P1 11.5fF

Node lines fix the node order. Capacitance lines may appear anywhere and in
any order; references are resolved once all node declarations are known.
"""

import logging
import math
import re
from collections import deque
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from .errors import NetlistError

logger = logging.getLogger(__name__)

NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
NUMBER_RE = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)(.*)$")
TOKEN_RE = re.compile(r"\S+")

FluxAssignment = Dict[str, float]


class NodeKind(str, Enum):
    """Kind of circuit node."""
    JUNCTION = "junction"
    PASSIVE = "passive"


class NodeSpec(BaseModel):
    """A circuit node; junction nodes carry SQUID parameters in GHz."""
    model_config = ConfigDict(frozen=True)

    name: str
    kind: NodeKind
    ejb: Optional[float] = None
    ejs: Optional[float] = None
    cj: Optional[float] = None

    @model_validator(mode="after")
    def _check_junction(self) -> "NodeSpec":
        if not NAME_RE.match(self.name):
            raise ValueError(f"invalid node name '{self.name}'")
        if self.kind is NodeKind.JUNCTION:
            if self.ejb is None or self.ejs is None:
                raise ValueError(f"junction node '{self.name}' needs ejb and ejs")
            if not (self.ejb >= self.ejs >= 0):
                raise ValueError(f"junction node '{self.name}' must satisfy ejb >= ejs >= 0")
            if self.cj is not None and self.cj < 0:
                raise ValueError(f"junction node '{self.name}' has negative cj")
        elif self.ejb is not None or self.ejs is not None or self.cj is not None:
            raise ValueError(f"passive node '{self.name}' cannot carry junction parameters")
        return self

    @property
    def is_junction(self) -> bool:
        return self.kind is NodeKind.JUNCTION

    @property
    def shunt(self) -> float:
        """Junction shunt capacitance in fF (0 when unset)."""
        return self.cj or 0.0


def _pair(a: str, b: str) -> Tuple[str, str]:
    return (a, b) if a <= b else (b, a)


class CircuitNetwork(BaseModel):
    """Validated capacitance network.

    ``mutual_caps`` keys are stored as sorted name pairs so the same physical
    capacitor always maps to one key.
    """
    model_config = ConfigDict(frozen=True)

    nodes: List[NodeSpec]
    ground_caps: Dict[str, float] = {}
    mutual_caps: Dict[Tuple[str, str], float] = {}

    @field_validator("mutual_caps", mode="before")
    @classmethod
    def _normalize_pairs(cls, value):
        normalized = {}
        for key, cap in dict(value).items():
            a, b = tuple(key)
            if a == b:
                raise ValueError(f"self-pair capacitance on node '{a}'")
            pair = _pair(a, b)
            if pair in normalized:
                raise ValueError(f"duplicate capacitance between '{a}' and '{b}'")
            normalized[pair] = cap
        return normalized

    @model_validator(mode="after")
    def _check_network(self) -> "CircuitNetwork":
        for problem in network_problems(self.nodes, self.ground_caps, self.mutual_caps):
            raise ValueError(problem)
        return self

    @property
    def names(self) -> List[str]:
        return [node.name for node in self.nodes]

    @property
    def junction_names(self) -> List[str]:
        return [node.name for node in self.nodes if node.is_junction]

    @property
    def passive_names(self) -> List[str]:
        return [node.name for node in self.nodes if not node.is_junction]

    def node(self, name: str) -> NodeSpec:
        for node in self.nodes:
            if node.name == name:
                return node
        raise KeyError(name)

    def index(self, name: str) -> int:
        return self.names.index(name)


def network_problems(nodes: List[NodeSpec], ground_caps: Dict[str, float],
                     mutual_caps: Dict[Tuple[str, str], float]) -> Iterator[str]:
    """Yield network-level invariant violations, first problem first."""
    names = [node.name for node in nodes]
    seen = set()
    for name in names:
        if name in seen:
            yield f"duplicate node '{name}'"
        seen.add(name)

    for name, cap in ground_caps.items():
        if name not in seen:
            yield f"ground capacitance references undeclared node '{name}'"
        if not cap >= 0 or not math.isfinite(cap):
            yield f"negative or non-finite ground capacitance on '{name}'"
    for (a, b), cap in mutual_caps.items():
        for name in (a, b):
            if name not in seen:
                yield f"capacitance references undeclared node '{name}'"
        if not cap >= 0 or not math.isfinite(cap):
            yield f"negative or non-finite capacitance between '{a}' and '{b}'"

    junctions = [node.name for node in nodes if node.is_junction]
    if not junctions:
        yield "network has no junction node"
        return

    neighbours: Dict[str, List[str]] = {name: [] for name in names}
    for a, b in mutual_caps:
        if a in neighbours and b in neighbours:
            neighbours[a].append(b)
            neighbours[b].append(a)
    reached = set(junctions)
    queue = deque(junctions)
    while queue:
        for other in neighbours[queue.popleft()]:
            if other not in reached:
                reached.add(other)
                queue.append(other)
    for name in names:
        if name not in reached:
            yield f"node '{name}' is not connected to any junction node"


def _parse_quantity(token: str, unit: str, line: int, column: int, what: str) -> float:
    match = NUMBER_RE.match(token)
    if not match:
        raise NetlistError(f"malformed value '{token}' for {what}", line, column)
    number, suffix = match.groups()
    if suffix == "":
        raise NetlistError(f"missing unit suffix on {what} (expected {unit})", line, column)
    if suffix != unit:
        raise NetlistError(f"wrong unit '{suffix}' on {what} (expected {unit})", line, column)
    value = float(number)
    if value < 0:
        raise NetlistError(f"negative value for {what}", line, column)
    return value


def _tokens(text: str) -> List[Tuple[str, int]]:
    return [(m.group(0), m.start() + 1) for m in TOKEN_RE.finditer(text)]


def _check_name(token: str, line: int, column: int) -> str:
    if not NAME_RE.match(token):
        raise NetlistError(f"invalid node name '{token}'", line, column)
    return token


def _parse_node(tokens: List[Tuple[str, int]], line: int) -> NodeSpec:
    if len(tokens) < 3:
        raise NetlistError("node line needs a name and a kind", line, tokens[0][1])
    name = _check_name(tokens[1][0], line, tokens[1][1])
    kind, kind_col = tokens[2]
    if kind == NodeKind.PASSIVE.value:
        if len(tokens) > 3:
            raise NetlistError("passive node takes no parameters", line, tokens[3][1])
        return NodeSpec(name=name, kind=NodeKind.PASSIVE)
    if kind != NodeKind.JUNCTION.value:
        raise NetlistError(f"unknown node kind '{kind}'", line, kind_col)

    units = {"ejb": "GHz", "ejs": "GHz", "cj": "fF"}
    params: Dict[str, float] = {}
    for token, column in tokens[3:]:
        key, sep, raw = token.partition("=")
        if not sep or key not in units:
            raise NetlistError(f"unexpected junction parameter '{token}'", line, column)
        if key in params:
            raise NetlistError(f"duplicate parameter '{key}'", line, column)
        params[key] = _parse_quantity(raw, units[key], line, column + len(key) + 1, key)
    for key in ("ejb", "ejs"):
        if key not in params:
            raise NetlistError(f"junction node '{name}' missing {key}", line, tokens[1][1])
    if params["ejs"] > params["ejb"]:
        raise NetlistError(f"junction node '{name}' needs ejb >= ejs", line, tokens[1][1])
    return NodeSpec(name=name, kind=NodeKind.JUNCTION, **params)


def parse_netlist(text: str) -> CircuitNetwork:
    """Parse netlist text into a validated network.

    Args:
        text: Netlist contents (LF or CRLF line endings)

    Returns:
        Validated CircuitNetwork

    Raises:
        NetlistError: On the first malformed line or invariant violation
    """
    nodes: List[NodeSpec] = []
    node_lines: Dict[str, int] = {}
    gcap_lines: List[Tuple[List[Tuple[str, int]], int]] = []
    cap_lines: List[Tuple[List[Tuple[str, int]], int]] = []

    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        tokens = _tokens(content)
        if not tokens:
            continue
        keyword, column = tokens[0]
        if keyword == "node":
            node = _parse_node(tokens, number)
            if node.name in node_lines:
                raise NetlistError(
                    f"duplicate node '{node.name}' (first declared on line {node_lines[node.name]})",
                    number, tokens[1][1])
            node_lines[node.name] = number
            nodes.append(node)
        elif keyword == "gcap":
            if len(tokens) != 3:
                raise NetlistError("gcap line needs a node and a capacitance", number, column)
            gcap_lines.append((tokens, number))
        elif keyword == "cap":
            if len(tokens) != 4:
                raise NetlistError("cap line needs two nodes and a capacitance", number, column)
            cap_lines.append((tokens, number))
        else:
            raise NetlistError(f"unknown statement '{keyword}'", number, column)

    def resolve(token: str, column: int, line: int) -> str:
        _check_name(token, line, column)
        if token not in node_lines:
            raise NetlistError(f"undeclared node '{token}'", line, column)
        return token

    ground_caps: Dict[str, float] = {}
    for tokens, number in gcap_lines:
        name = resolve(tokens[1][0], tokens[1][1], number)
        if name in ground_caps:
            raise NetlistError(f"duplicate gcap for node '{name}'", number, tokens[1][1])
        ground_caps[name] = _parse_quantity(tokens[2][0], "fF", number, tokens[2][1], "capacitance")

    mutual_caps: Dict[Tuple[str, str], float] = {}
    for tokens, number in cap_lines:
        a = resolve(tokens[1][0], tokens[1][1], number)
        b = resolve(tokens[2][0], tokens[2][1], number)
        if a == b:
            raise NetlistError(f"self-pair capacitance on node '{a}'", number, tokens[2][1])
        pair = _pair(a, b)
        if pair in mutual_caps:
            raise NetlistError(f"duplicate capacitance between '{a}' and '{b}'", number, tokens[1][1])
        mutual_caps[pair] = _parse_quantity(tokens[3][0], "fF", number, tokens[3][1], "capacitance")

    for problem in network_problems(nodes, ground_caps, mutual_caps):
        raise NetlistError(problem)
    try:
        network = CircuitNetwork(nodes=nodes, ground_caps=ground_caps, mutual_caps=mutual_caps)
    except ValidationError as e:
        raise NetlistError(e.errors()[0]["msg"]) from e

    logger.debug("parsed netlist: %d nodes, %d junctions, %d mutual caps",
                 len(network.nodes), len(network.junction_names), len(network.mutual_caps))
    return network


def load_netlist(path) -> CircuitNetwork:
    """Read and parse a UTF-8 netlist file."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        return parse_netlist(f.read())


def _fmt(value: float) -> str:
    return repr(float(value))


def serialize_netlist(network: CircuitNetwork) -> str:
    """Render a network in the netlist format.

    Node lines come first in network order, then ground capacitances in node
    order, then mutual capacitances in stored order.
    """
    lines = []
    for node in network.nodes:
        if node.is_junction:
            line = f"node {node.name} junction ejb={_fmt(node.ejb)}GHz ejs={_fmt(node.ejs)}GHz"
            if node.cj is not None:
                line += f" cj={_fmt(node.cj)}fF"
        else:
            line = f"node {node.name} passive"
        lines.append(line)
    for name in network.names:
        if name in network.ground_caps:
            lines.append(f"gcap {name} {_fmt(network.ground_caps[name])}fF")
    for (a, b), cap in network.mutual_caps.items():
        lines.append(f"cap {a} {b} {_fmt(cap)}fF")
    return "\n".join(lines) + "\n"


def validate_flux(network: CircuitNetwork, flux: FluxAssignment) -> FluxAssignment:
    """Check a flux assignment against a network.

    Returns:
        Assignment completed with 0.0 for junctions not mentioned

    Raises:
        ValueError: For unknown or passive node names and non-finite values
    """
    junctions = network.junction_names
    for name, value in flux.items():
        if name not in junctions:
            raise ValueError(f"flux assigned to '{name}', which is not a junction node")
        if not math.isfinite(value):
            raise ValueError(f"flux for '{name}' is not finite")
    return {name: float(flux.get(name, 0.0)) for name in junctions}
