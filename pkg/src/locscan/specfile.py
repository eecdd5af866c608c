"""Key-value model files for the command line.

One ``key = value`` per line, ``#`` starts a comment. ``kind`` selects the
model::

    kind = sbm
    block_sizes = 870, 65, 65
    p = 0.43
    h = 0.95          # one value, or one per middle block
    q = 0.98          # or: delta = 0.55
    t_star = 30
    series_len = 31

An SBM may instead give full matrices, rows separated by ``;``::

    P0 = 0.1 0.2; 0.2 0.3
    PA = 0.1 0.2; 0.2 0.5

An RDPG gives one simplex location per block and a shared concentration::

    kind = rdpg
    block_sizes = 50, 50
    alphas = 0.6 0.1; 0.1 0.6
    alphas_alt = 0.6 0.1; 0.1 0.8
    r = 1000
"""
from __future__ import annotations

import math
import os

import numpy as np

from locscan.errors import InputError
from locscan.generators import RdpgSpec, SbmSpec

__all__ = ["parse_spec_text", "read_spec", "spec_summary"]

_SBM_KEYS = {"kind", "block_sizes", "p", "h", "q", "delta", "P0", "PA", "t_star", "series_len"}
_RDPG_KEYS = {"kind", "block_sizes", "alphas", "alphas_alt", "r", "t_star", "series_len"}


def _numbers(text: str, key: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise InputError(f"{key}: expected numbers, got {text!r}") from None


def _matrix(text: str, key: str) -> np.ndarray:
    rows = [_numbers(r, key) for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise InputError(f"{key}: rows must be nonempty and of equal length")
    return np.array(rows)


def _int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise InputError(f"{key}: expected an integer, got {text!r}") from None


def _change(fields: dict) -> dict:
    out = {}
    if "t_star" in fields:
        raw = fields["t_star"].strip().lower()
        out["t_star"] = math.inf if raw in ("inf", "infinity", "∞") else _int(raw, "t_star")
    if "series_len" in fields:
        out["series_len"] = _int(fields["series_len"], "series_len")
    return out


def parse_spec_text(text: str) -> SbmSpec | RdpgSpec:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"spec line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in fields:
            raise InputError(f"spec line {lineno}: repeated key {key!r}")
        fields[key] = value
    kind = fields.get("kind", "").lower()
    if kind not in ("sbm", "rdpg"):
        raise InputError("spec needs 'kind = sbm' or 'kind = rdpg'")
    allowed = _SBM_KEYS if kind == "sbm" else _RDPG_KEYS
    unknown = sorted(set(fields) - allowed)
    if unknown:
        raise InputError(f"unknown {kind} spec keys: {', '.join(unknown)}")
    if "block_sizes" not in fields:
        raise InputError("spec needs block_sizes")
    sizes = [_int(s, "block_sizes") for s in fields["block_sizes"].replace(",", " ").split()]
    change = _change(fields)

    if kind == "rdpg":
        for key in ("alphas", "r"):
            if key not in fields:
                raise InputError(f"rdpg spec needs {key}")
        alt = _matrix(fields["alphas_alt"], "alphas_alt") if "alphas_alt" in fields else None
        r = _numbers(fields["r"], "r")
        if len(r) != 1:
            raise InputError("r must be a single number")
        return RdpgSpec.from_blocks(sizes, _matrix(fields["alphas"], "alphas"), r[0], alphas_alt=alt, **change)

    if "P0" in fields:
        if any(key in fields for key in ("p", "h", "q", "delta")):
            raise InputError("give either P0/PA or p/h/q/delta, not both")
        P0 = _matrix(fields["P0"], "P0")
        PA = _matrix(fields["PA"], "PA") if "PA" in fields else P0
        return SbmSpec(tuple(sizes), P0, PA, **change)
    if "p" not in fields:
        raise InputError("sbm spec needs p (or P0)")
    p = _numbers(fields["p"], "p")[0]
    h = _numbers(fields.get("h", ""), "h")
    if len(h) == 1:
        h = h[0]
    q = _numbers(fields["q"], "q")[0] if "q" in fields else None
    delta = _numbers(fields["delta"], "delta")[0] if "delta" in fields else None
    if q is None and delta is None:
        delta = 0.0
    return SbmSpec.chatter(sizes, p, h, q=q, delta=delta, **change)


def read_spec(path: str | os.PathLike) -> SbmSpec | RdpgSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec_text(fh.read())


def _fmt_matrix(m: np.ndarray) -> str:
    return "; ".join(" ".join(repr(float(x)) for x in row) for row in m)


def spec_summary(spec: SbmSpec | RdpgSpec) -> list[str]:
    """The model as ``key=value`` strings (suitable for header comments)."""
    t_star = "inf" if spec.t_star == math.inf else str(spec.t_star)
    if isinstance(spec, SbmSpec):
        return [
            "kind=sbm",
            "block_sizes=" + ",".join(map(str, spec.block_sizes)),
            "P0=" + _fmt_matrix(spec.P0),
            "PA=" + _fmt_matrix(spec.PA),
            f"t_star={t_star}",
            f"series_len={spec.series_len}",
        ]
    out = ["kind=rdpg"]
    r = spec.concentrations
    if spec.block_sizes is not None and np.all(r == r[0]):
        starts = np.cumsum((0,) + tuple(spec.block_sizes))[:-1]
        out += ["block_sizes=" + ",".join(map(str, spec.block_sizes)), "alphas=" + _fmt_matrix(spec.locations[starts])]
        if spec.locations_alt is not None:
            out.append("alphas_alt=" + _fmt_matrix(spec.locations_alt[starts]))
        out.append(f"r={float(r[0])!r}")
    else:
        # per-vertex locations do not fit the block file format; record the shape only
        out += [f"vertices={spec.n}", f"dim={spec.K}"]
    return out + [f"t_star={t_star}", f"series_len={spec.series_len}"]
