"""RF data handling: Touchstone I/O, ladder networks and netlist files."""

from .touchstone import (
    FrequencyResponse,
    OptionLine,
    magnitude_db,
    parse_touchstone,
    write_touchstone,
    parse_csv_response,
    write_csv_response,
    read_response,
)
from .network import (
    Topology,
    Kind,
    Element,
    Netlist,
    AbcdMatrix,
    element_impedance,
    element_abcd,
    cascade,
    abcd_to_s,
    linear_sweep,
    simulate,
)
from .netlist import FreeParameter, parse_netlist, load_netlist, render_netlist

__all__ = [
    "FrequencyResponse",
    "OptionLine",
    "magnitude_db",
    "parse_touchstone",
    "write_touchstone",
    "parse_csv_response",
    "write_csv_response",
    "read_response",
    "Topology",
    "Kind",
    "Element",
    "Netlist",
    "AbcdMatrix",
    "element_impedance",
    "element_abcd",
    "cascade",
    "abcd_to_s",
    "linear_sweep",
    "simulate",
    "FreeParameter",
    "parse_netlist",
    "load_netlist",
    "render_netlist",
]
