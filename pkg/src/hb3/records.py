"""Line-delimited, tab-separated records with one schema header per type.

    #schema match l gamma u class
    match	5+0i	[[1+0i,0+0i],[0+0i,1+0i]]	0	c_zero

Floats are written with 12 significant digits so output is diffable.
"""

from __future__ import annotations

import enum
import math
from typing import IO, Iterator

from .h3geom import H3Point

__all__ = ["RecordWriter", "fmt", "read_records"]


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, enum.Enum):
        return str(v.value)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".12g")
    if isinstance(v, H3Point):
        return ",".join(format(c, ".12g") for c in (v.zre, v.zim, v.r))
    if isinstance(v, complex):
        return f"{v.real:.12g}{v.imag:+.12g}j"
    if isinstance(v, (list, tuple)):
        return ";".join(fmt(x) for x in v)
    s = str(v)
    if "\t" in s or "\n" in s:
        raise ValueError(f"field value {s!r} contains a tab or newline")
    return s


class RecordWriter:
    def __init__(self, stream: IO[str]):
        self.stream = stream
        self._schemas: dict[str, tuple[str, ...]] = {}

    def write(self, rtype: str, **fields) -> None:
        names = tuple(fields)
        known = self._schemas.get(rtype)
        if known is None:
            self._schemas[rtype] = names
            self.stream.write("#schema " + " ".join((rtype, *names)) + "\n")
        elif known != names:
            raise ValueError(f"record {rtype!r} fields {names} differ from schema {known}")
        self.stream.write("\t".join((rtype, *(fmt(v) for v in fields.values()))) + "\n")


def read_records(lines) -> Iterator[tuple[str, dict[str, str]]]:
    """Parse writer output back into (type, {field: text}) pairs."""
    schemas: dict[str, list[str]] = {}
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("#schema "):
            parts = line.split()[1:]
            schemas[parts[0]] = parts[1:]
            continue
        rtype, *vals = line.split("\t")
        if rtype not in schemas:
            raise ValueError(f"record of type {rtype!r} before its schema")
        yield rtype, dict(zip(schemas[rtype], vals))

