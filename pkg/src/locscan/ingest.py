"""Temporal edge-list reading and writing.

File format (UTF-8, LF line endings)::

    # n=<N> T=<len>
    # labels=<label_0>,<label_1>,...
    t,u,v
    ...

The ``labels`` roster line is optional on input; when present it fixes the
vertex ids (``label_i`` gets id ``i``) and lists vertices that never carry an
edge. Other ``#`` lines are comments. ``write_series`` always emits the roster
and sorts edges by ``(t, smaller id, larger id)``, so its output is a
canonical form: reading then writing any file with a roster, in any line
order, yields the same bytes.
"""
from __future__ import annotations

import io
import math
import os
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from locscan.errors import InputError
from locscan.graph_core import GraphSeries, GraphSnapshot

__all__ = [
    "TemporalEdgeRecord",
    "VertexMap",
    "IngestReport",
    "Bucketing",
    "parse_series",
    "write_series",
    "read_series",
    "read_vertex_map",
    "series_to_text",
]

_HEADER = re.compile(r"^#\s*n=(\d+)(?:\s+T=(\d+))?\s*$")
_ROSTER = "labels="


@dataclass(frozen=True)
class TemporalEdgeRecord:
    t: int
    u: str
    v: str


class VertexMap:
    """Dense bijection between vertex labels and ids ``0..n-1``."""

    def __init__(self, labels: Iterable = ()):
        self._labels: list[str] = []
        self._ids: dict[str, int] = {}
        for label in labels:
            self.add(label)

    @classmethod
    def identity(cls, n: int) -> VertexMap:
        return cls(str(i) for i in range(n))

    def add(self, label) -> int:
        label = str(label)
        if label in self._ids:
            raise InputError(f"duplicate vertex label {label!r}")
        self._ids[label] = len(self._labels)
        self._labels.append(label)
        return self._ids[label]

    def get_or_add(self, label) -> int:
        label = str(label)
        hit = self._ids.get(label)
        return self.add(label) if hit is None else hit

    def id_of(self, label) -> int:
        try:
            return self._ids[str(label)]
        except KeyError:
            raise InputError(f"unknown vertex label {label!r}") from None

    def label_of(self, v: int) -> str:
        if not 0 <= v < len(self._labels):
            raise InputError(f"vertex id {v} out of range for n={self.n}")
        return self._labels[v]

    def __contains__(self, label) -> bool:
        return str(label) in self._ids

    @property
    def n(self) -> int:
        return len(self._labels)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._labels)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other):
        if not isinstance(other, VertexMap):
            return NotImplemented
        return self._labels == other._labels

    __hash__ = None

    def __repr__(self) -> str:
        return f"VertexMap(n={self.n})"


@dataclass
class IngestReport:
    lines: int = 0
    records: int = 0
    edges: int = 0
    duplicates: int = 0
    self_loops: int = 0
    comments: int = 0
    declared_n: int | None = None
    declared_T: int | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lines": self.lines,
            "records": self.records,
            "edges": self.edges,
            "duplicates": self.duplicates,
            "self_loops": self.self_loops,
            "comments": self.comments,
        }


@dataclass(frozen=True)
class Bucketing:
    """Map a raw timestamp column to window ``floor((ts - origin) / width)``."""

    origin: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise InputError("bucket width must be positive")

    def window(self, raw: str) -> int:
        ts = float(raw)
        if not math.isfinite(ts) or ts < self.origin:
            raise ValueError(f"timestamp {raw} precedes the origin {self.origin}")
        return int((ts - self.origin) // self.width)


def _check_label(label: str, delimiter: str) -> None:
    if (
        not label
        or label != label.strip()
        or delimiter in label
        or "\n" in label
        or "\r" in label
        or label.startswith("#")
    ):
        raise InputError(f"vertex label {label!r} cannot be written with delimiter {delimiter!r}")


def _natural_key(label: str):
    return (0, int(label), "") if re.fullmatch(r"-?\d+", label) else (1, 0, label)


def _records(
    lines: Iterable[str], delimiter: str, bucketing: Bucketing | None, report: IngestReport, roster: list
) -> Iterator[tuple[int, TemporalEdgeRecord]]:
    for lineno, raw in enumerate(lines, start=1):
        report.lines += 1
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.lstrip().startswith("#"):
            report.comments += 1
            body = line.lstrip()[1:].strip()
            m = _HEADER.match(line.strip())
            if m:
                report.declared_n = int(m.group(1))
                if m.group(2) is not None:
                    report.declared_T = int(m.group(2))
            elif body.startswith(_ROSTER):
                if roster:
                    raise InputError(f"line {lineno}: second labels line")
                rest = body[len(_ROSTER):]
                if rest:
                    roster.extend(x.strip() for x in rest.split(delimiter))
            continue
        parts = [x.strip() for x in line.split(delimiter)]
        if len(parts) != 3 or not all(parts):
            raise InputError(f"line {lineno}: expected 't{delimiter}u{delimiter}v', got {line!r}")
        try:
            t = bucketing.window(parts[0]) if bucketing else int(parts[0])
        except ValueError as exc:
            raise InputError(f"line {lineno}: bad time field {parts[0]!r} ({exc})") from None
        if t < 0:
            raise InputError(f"line {lineno}: negative window index {t}")
        report.records += 1
        yield lineno, TemporalEdgeRecord(t, parts[1], parts[2])


def parse_series(
    stream: IO[str] | Iterable[str] | str,
    delimiter: str = ",",
    n: int | None = None,
    vertex_map: VertexMap | Sequence[str] | None = None,
    sort_labels: bool = False,
    bucketing: Bucketing | None = None,
) -> tuple[GraphSeries, VertexMap, IngestReport]:
    """Read a temporal edge list into a series.

    Vertex ids come from, in order of precedence: ``vertex_map``, the file's
    roster line, sorted labels (``sort_labels``, numeric labels in numeric
    order) or first appearance. Without a roster, any declared ``n`` beyond
    the labels seen is filled with vertices labeled by their id.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    if not delimiter or delimiter in "#\n\r":
        raise InputError(f"unusable delimiter {delimiter!r}")
    report = IngestReport()
    roster: list[str] = []
    records = list(_records(stream, delimiter, bucketing, report, roster))

    if vertex_map is not None:
        vmap = vertex_map if isinstance(vertex_map, VertexMap) else VertexMap(vertex_map)
        fixed = True
    elif roster:
        vmap = VertexMap(roster)
        fixed = True
    else:
        vmap = VertexMap()
        fixed = False
        seen = (lab for _, r in records for lab in (r.u, r.v))
        if sort_labels:
            for lab in sorted(set(seen), key=_natural_key):
                vmap.add(lab)
        else:
            for lab in seen:
                vmap.get_or_add(lab)

    for declared in (n, report.declared_n):
        if declared is None:
            continue
        if declared < vmap.n:
            raise InputError(f"declared n={declared} but {vmap.n} distinct vertices found")
        if fixed and declared != vmap.n:
            raise InputError(f"declared n={declared} disagrees with the {vmap.n}-vertex roster")
        while vmap.n < declared:
            label = str(vmap.n)
            if label in vmap:
                raise InputError(f"cannot pad to n={declared}: label {label!r} already used; supply a roster")
            vmap.add(label)

    T = max((r.t for _, r in records), default=-1) + 1
    if report.declared_T is not None:
        if report.declared_T < T:
            raise InputError(f"declared T={report.declared_T} but data reach window {T - 1}")
        T = report.declared_T

    nv = vmap.n
    adj = np.zeros((T, nv, nv), dtype=bool)
    for lineno, r in records:
        try:
            u, v = vmap.id_of(r.u), vmap.id_of(r.v)
        except InputError as exc:
            raise InputError(f"line {lineno}: {exc}") from None
        if u == v:
            report.self_loops += 1
            continue
        if adj[r.t, u, v]:
            report.duplicates += 1
            continue
        adj[r.t, u, v] = adj[r.t, v, u] = True
        report.edges += 1
    series = GraphSeries((GraphSnapshot(a) for a in adj), n=nv)
    return series, vmap, report


def read_series(path: str | os.PathLike, **options) -> tuple[GraphSeries, VertexMap, IngestReport]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_series(fh, **options)


def read_vertex_map(path: str | os.PathLike) -> VertexMap:
    """One label per line; line ``i`` (blank lines and ``#`` comments skipped) gets id ``i``."""
    with open(path, encoding="utf-8") as fh:
        labels = [s.strip() for s in fh if s.strip() and not s.lstrip().startswith("#")]
    return VertexMap(labels)


def _canonical_lines(
    series: GraphSeries, vmap: VertexMap, delimiter: str, comments: Sequence[str]
) -> Iterator[str]:
    yield f"# n={series.n} T={len(series)}\n"
    for c in comments:
        if "\n" in c or "\r" in c:
            raise InputError("comment lines must not contain line breaks")
        if _HEADER.match(f"# {c}") or c.startswith(_ROSTER):
            raise InputError(f"comment {c!r} would be read back as a header")
        yield f"# {c}\n"
    yield f"# {_ROSTER}{delimiter.join(vmap.labels)}\n"
    for t, g in enumerate(series):
        for u, v in g.edges():
            yield f"{t}{delimiter}{vmap.label_of(u)}{delimiter}{vmap.label_of(v)}\n"


def write_series(
    series: GraphSeries,
    vmap: VertexMap | None,
    out: IO[str] | str | os.PathLike,
    delimiter: str = ",",
    comments: Sequence[str] = (),
) -> None:
    """Write ``series`` in canonical order; ``vmap=None`` labels vertices by id."""
    vmap = VertexMap.identity(series.n) if vmap is None else vmap
    if vmap.n != series.n:
        raise InputError(f"vertex map has {vmap.n} labels for n={series.n}")
    if not delimiter or delimiter in "#\n\r":
        raise InputError(f"unusable delimiter {delimiter!r}")
    for label in vmap.labels:
        _check_label(label, delimiter)
    lines = _canonical_lines(series, vmap, delimiter, comments)
    if isinstance(out, (str, os.PathLike)):
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(lines)
    else:
        out.writelines(lines)


def series_to_text(series: GraphSeries, vmap: VertexMap | None = None, **options) -> str:
    buf = io.StringIO()
    write_series(series, vmap, buf, **options)
    return buf.getvalue()
