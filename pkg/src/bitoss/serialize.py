"""JSON and CSV encodings of the value types.

Points serialize as integer arrays (a bare integer point becomes a
one-element array); entry lists follow the deterministic sorted point
order, and :func:`dumps` fixes all formatting options, so re-serializing
the same value is byte-identical.

Schemas:

* multiset  ``{"entries": [{"point": [..], "mult": n}, ..]}``
* dist      ``{"mode": "rational"|"float", "entries": [{"point": [..],
  "num": a, "den": b} | {"point": [..], "p": x}, ..]}``
* grid      dist fields plus ``{"K": k, "N": n}``
* channel   ``{"domain": [[..], ..], "kernel": [{"point": [..],
  "dist": {..}}, ..]}``
* EM state  ``{"K": k, "mixture": {..}, "coins": [{..}, ..]}``
* EM trace  ``{"records": [{"iteration": i, "kl": x, "state": {..}}, ..]}``
"""

from __future__ import annotations

import json
from fractions import Fraction

from .binomials import GridDist
from .channels import Channel
from .em import EMRecord, EMState, EMTrace
from .kernel import Dist, FLOAT, Multiset, OutOfRange, RATIONAL


class FormatError(ValueError):
    """Raised when a JSON document does not match the documented schema."""


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def point_to_json(point) -> list[int]:
    if isinstance(point, bool):
        raise OutOfRange(f"cannot serialize point {point!r}")
    if isinstance(point, int):
        return [point]
    if isinstance(point, tuple) and all(
        isinstance(c, int) and not isinstance(c, bool) for c in point
    ):
        return list(point)
    raise OutOfRange(f"only integer points serialize, got {point!r}")


def point_from_json(obj):
    if not isinstance(obj, list) or not obj or not all(isinstance(c, int) for c in obj):
        raise FormatError(f"a point must be a non-empty integer array, got {obj!r}")
    return obj[0] if len(obj) == 1 else tuple(obj)


def multiset_to_json(phi: Multiset) -> dict:
    return {
        "entries": [{"point": point_to_json(p), "mult": m} for p, m in phi.items()]
    }


def multiset_from_json(obj) -> Multiset:
    try:
        return Multiset(
            (point_from_json(e["point"]), e["mult"]) for e in obj["entries"]
        )
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"bad multiset document: {exc}") from exc


def dist_to_json(omega: Dist) -> dict:
    entries = []
    for p, v in omega.items():
        if omega.mode == RATIONAL:
            entries.append(
                {"point": point_to_json(p), "num": v.numerator, "den": v.denominator}
            )
        else:
            entries.append({"point": point_to_json(p), "p": v})
    return {"mode": omega.mode, "entries": entries}


def dist_from_json(obj) -> Dist:
    try:
        mode = obj["mode"]
        if mode not in (RATIONAL, FLOAT):
            raise FormatError(f"unknown mode {mode!r}")
        pairs = []
        for e in obj["entries"]:
            point = point_from_json(e["point"])
            if mode == RATIONAL:
                pairs.append((point, Fraction(e["num"], e["den"])))
            else:
                pairs.append((point, float(e["p"])))
        return Dist(pairs, mode=mode)
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"bad distribution document: {exc}") from exc


def grid_to_json(grid: GridDist) -> dict:
    doc = dist_to_json(grid.dist)
    doc["K"] = grid.tosses
    doc["N"] = grid.n_dim
    return doc


def grid_from_json(obj) -> GridDist:
    try:
        return GridDist(obj["K"], obj["N"], dist_from_json(obj))
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"bad grid document: {exc}") from exc


def channel_to_json(chan: Channel) -> dict:
    return {
        "domain": [point_to_json(x) for x in chan.domain],
        "kernel": [
            {"point": point_to_json(x), "dist": dist_to_json(chan(x))}
            for x in chan.domain
        ],
    }


def channel_from_json(obj) -> Channel:
    try:
        kernel = {
            point_from_json(e["point"]): dist_from_json(e["dist"])
            for e in obj["kernel"]
        }
        return Channel(tuple(point_from_json(x) for x in obj["domain"]), kernel)
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"bad channel document: {exc}") from exc


def emstate_to_json(state: EMState) -> dict:
    return {
        "K": state.tosses,
        "mixture": dist_to_json(state.mixture),
        "coins": [dist_to_json(c) for c in state.coins],
    }


def emstate_from_json(obj) -> EMState:
    try:
        return EMState(
            mixture=dist_from_json(obj["mixture"]),
            coins=tuple(dist_from_json(c) for c in obj["coins"]),
            tosses=obj["K"],
        )
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"bad EM state document: {exc}") from exc


def trace_to_json(trace: EMTrace) -> dict:
    return {
        "records": [
            {
                "iteration": r.iteration,
                "kl": r.divergence,
                "state": emstate_to_json(r.state),
            }
            for r in trace.records
        ]
    }


def trace_from_json(obj) -> EMTrace:
    try:
        return EMTrace(
            tuple(
                EMRecord(r["iteration"], float(r["kl"]), emstate_from_json(r["state"]))
                for r in obj["records"]
            )
        )
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"bad EM trace document: {exc}") from exc


def grid_to_csv(grid: GridDist) -> str:
    """Probability matrix: row ``n1`` ascending, column ``n2`` ascending."""
    if grid.n_dim != 2:
        raise OutOfRange(f"CSV surfaces need a two-dimensional grid, got N={grid.n_dim}")
    lines = []
    for n1 in range(grid.tosses + 1):
        row = [repr(float(grid.dist((n1, n2)))) for n2 in range(grid.tosses + 1)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def trace_to_csv(trace: EMTrace) -> str:
    lines = ["iteration,kl"]
    for r in trace.records:
        lines.append(f"{r.iteration},{r.divergence!r}")
    return "\n".join(lines) + "\n"
