"""
Netlist file format.

A netlist is a YAML document:

    name: lc-notch
    z0_ohm: 50
    elements:
      - topology: shunt        # series | shunt
        kind: RLC_S            # R | L | C | RLC_S | RLC_P
        r_ohm: 1.0e-3
        l_h: 1.0e-9
        c_f: "?3e-12:1e-13:1e-10"

Any value written as `?init:lower:upper` is a free parameter for circuit
fitting; the netlist itself is built with the init value.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import MetasenseError, NetlistError
from .network import Element, Netlist

FIELD_KEYS = {"r": "r_ohm", "l": "l_h", "c": "c_f"}

Value = Optional[Union[float, str]]


class ElementSpec(BaseModel):
    """One element entry of the YAML document."""
    model_config = ConfigDict(extra="forbid")

    topology: Literal["series", "shunt"]
    kind: Literal["R", "L", "C", "RLC_S", "RLC_P"]
    r_ohm: Value = None
    l_h: Value = None
    c_f: Value = None


class NetlistSpec(BaseModel):
    """Top-level YAML document."""
    model_config = ConfigDict(extra="forbid")

    name: str = ""
    description: str = ""
    z0_ohm: float = Field(default=50.0, gt=0)
    elements: list[ElementSpec] = Field(min_length=1)


@dataclass(frozen=True)
class FreeParameter:
    """A netlist value left for the fitter, with positive bounds."""
    element: int
    field: str  # "r", "l" or "c"
    init: float
    lower: float
    upper: float

    def __post_init__(self):
        if not 0 < self.lower < self.upper:
            raise NetlistError(
                f"{self.name}: bounds must satisfy 0 < lower < upper, "
                f"got {self.lower}, {self.upper}"
            )
        if not self.lower <= self.init <= self.upper:
            raise NetlistError(
                f"{self.name}: initial value {self.init} outside [{self.lower}, {self.upper}]"
            )

    @property
    def name(self) -> str:
        return f"e{self.element}.{FIELD_KEYS[self.field]}"


def _parse_value(raw, element: int, field: str) -> tuple[Optional[float], Optional[FreeParameter]]:
    if raw is None:
        return None, None
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return float(raw), None

    text = str(raw).strip()
    label = f"e{element}.{FIELD_KEYS[field]}"
    if not text.startswith("?"):
        try:
            return float(text), None
        except ValueError:
            raise NetlistError(f"{label}: not a number: {text!r}") from None

    parts = text[1:].split(":")
    if len(parts) != 3:
        raise NetlistError(
            f"{label}: free parameter must be written ?init:lower:upper, got {text!r}"
        )
    try:
        init, lower, upper = (float(p) for p in parts)
    except ValueError:
        raise NetlistError(f"{label}: non-numeric free parameter {text!r}") from None
    param = FreeParameter(element=element, field=field, init=init, lower=lower, upper=upper)
    return init, param


def parse_netlist(text: str) -> tuple[Netlist, list[FreeParameter]]:
    """
    Parse a YAML netlist.

    Returns:
        The netlist (free values at their init) and its free parameters
        in document order.

    Raises:
        NetlistError: on YAML or schema problems.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise NetlistError(f"invalid YAML: {e}") from None
    if not isinstance(data, dict):
        raise NetlistError("netlist document must be a mapping")

    try:
        spec = NetlistSpec.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise NetlistError(f"netlist schema error: {problems}") from None

    elements = []
    free = []
    for index, entry in enumerate(spec.elements):
        values = {}
        for field, key in FIELD_KEYS.items():
            value, param = _parse_value(getattr(entry, key), index, field)
            values[field] = value
            if param is not None:
                free.append(param)
        try:
            elements.append(Element(topology=entry.topology, kind=entry.kind, **values))
        except MetasenseError as e:
            raise NetlistError(f"element {index}: {e}") from None

    netlist = Netlist(
        elements=tuple(elements),
        z0=spec.z0_ohm,
        name=spec.name,
        description=spec.description,
    )
    return netlist, free


def load_netlist(path: Union[str, Path]) -> tuple[Netlist, list[FreeParameter]]:
    """Read and parse a netlist file."""
    return parse_netlist(Path(path).read_text())


def netlist_to_dict(netlist: Netlist) -> dict:
    """Plain mapping in the file schema (absent values omitted)."""
    elements = []
    for e in netlist.elements:
        entry = {"topology": e.topology.value, "kind": e.kind.value}
        for field, key in FIELD_KEYS.items():
            value = getattr(e, field)
            if value is not None:
                entry[key] = float(value)
        elements.append(entry)

    doc = {}
    if netlist.name:
        doc["name"] = netlist.name
    if netlist.description:
        doc["description"] = netlist.description
    doc["z0_ohm"] = float(netlist.z0)
    doc["elements"] = elements
    return doc


def render_netlist(netlist: Netlist) -> str:
    """Serialize a netlist to YAML."""
    return yaml.safe_dump(netlist_to_dict(netlist), sort_keys=False)
