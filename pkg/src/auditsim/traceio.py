"""JSON Lines trace files.

One event per line with keys in the order ``seq, kind, proc, op, args, obj,
result``, then (when present) one trailing ``{"annotations": ..., "meta": ...}`` line.

Plain values map to JSON directly (tuples become arrays and read back as
tuples).  Structured values use single-key tagged objects so they survive a
round trip:

* ``{"$": "bottom"}`` / ``{"$": "top"}``  the consensus sentinels
* ``{"w": [writer, value, [help...]]}``  a w-tuple
* ``{"max": [widx, [ridx...], auditset]}``  a max-register triple
* ``{"set": [...]}``  a set, elements sorted by their JSON text
"""

from __future__ import annotations

import io
import json
from typing import IO, Any

from .base import MaxTriple, Sentinel, WTuple
from .sim import Event, Trace

_DUMP = {"separators": (",", ":"), "ensure_ascii": False}


def encode(value: Any) -> Any:
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, Sentinel):
        return {"$": value.name.lower()}
    if isinstance(value, WTuple):
        return {"w": [value.writer, encode(value.value), sorted(value.help)]}
    if isinstance(value, MaxTriple):
        return {"max": [value.widx, list(value.ridx), encode(value.auditset)]}
    if isinstance(value, (set, frozenset)):
        items = [encode(v) for v in value]
        items.sort(key=lambda v: json.dumps(v, sort_keys=True, **_DUMP))
        return {"set": items}
    if isinstance(value, (tuple, list)):
        return [encode(v) for v in value]
    if isinstance(value, dict):
        return {"map": sorted(([encode(k), encode(v)] for k, v in value.items()),
                              key=lambda kv: json.dumps(kv, sort_keys=True, **_DUMP))}
    raise TypeError(f"cannot encode {type(value).__name__} in a trace: {value!r}")


def decode(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(decode(v) for v in value)
    if isinstance(value, dict):
        if len(value) != 1:
            raise ValueError(f"malformed tagged value {value!r}")
        (tag, body), = value.items()
        if tag == "$":
            return Sentinel(body.upper())
        if tag == "w":
            writer, val, help_ = body
            return WTuple(writer, decode(val), frozenset(help_))
        if tag == "max":
            widx, ridx, auditset = body
            return MaxTriple(widx, tuple(ridx), decode(auditset))
        if tag == "set":
            return frozenset(decode(v) for v in body)
        if tag == "map":
            return {decode(k): decode(v) for k, v in body}
        raise ValueError(f"unknown value tag {tag!r}")
    return value


def event_line(ev: Event) -> str:
    return json.dumps({
        "seq": ev.seq,
        "kind": ev.kind,
        "proc": ev.proc,
        "op": ev.op,
        "args": encode(ev.args),
        "obj": ev.obj,
        "result": encode(ev.result),
    }, **_DUMP)


def emit_trace(trace: Trace, sink: IO[str]) -> None:
    """Write ``trace``; an empty trace produces no output at all.

    The trailing annotations/meta line is written only when there is something
    to put in it, so a bare trace of k events is exactly k lines.
    """
    if not trace.events:
        return
    for ev in trace.events:
        sink.write(event_line(ev) + "\n")
    if not trace.annotations and not trace.meta:
        return
    tail = {
        "annotations": {str(k): {key: encode(v) for key, v in sorted(ann.items())}
                        for k, ann in sorted(trace.annotations.items())},
        "meta": _meta_encode(trace.meta),
    }
    sink.write(json.dumps(tail, **_DUMP) + "\n")


def dumps(trace: Trace) -> str:
    buf = io.StringIO()
    emit_trace(trace, buf)
    return buf.getvalue()


def parse_trace(source: IO[str] | str) -> Trace:
    """Inverse of :func:`emit_trace`.  Raises ``ValueError`` on malformed input."""
    text = source if isinstance(source, str) else source.read()
    trace = Trace()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        if not isinstance(obj, dict):
            raise ValueError(f"line {lineno}: expected a JSON object")
        if "annotations" in obj:
            trace.annotations = {int(k): {key: decode(v) for key, v in ann.items()}
                                 for k, ann in obj["annotations"].items()}
            trace.meta = _meta_decode(obj.get("meta", {}))
            continue
        try:
            ev = Event(obj["seq"], obj["kind"], obj["proc"], obj["op"], decode(obj["args"]),
                       obj["obj"], decode(obj["result"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"line {lineno}: bad event: {exc}") from exc
        if ev.kind not in ("invoke", "respond", "prim"):
            raise ValueError(f"line {lineno}: unknown event kind {ev.kind!r}")
        if trace.events and ev.seq <= trace.events[-1].seq:
            raise ValueError(f"line {lineno}: seq {ev.seq} is not increasing")
        trace.events.append(ev)
    return trace


_TAGS = ("$", "w", "max", "set", "map")


def _meta_encode(v: Any) -> Any:
    # meta is configuration: keep dicts and lists as plain JSON, tag the rest
    if isinstance(v, dict):
        return {str(k): _meta_encode(x) for k, x in sorted(v.items())}
    if isinstance(v, list):
        return [_meta_encode(x) for x in v]
    return encode(v)


def _meta_decode(v: Any) -> Any:
    if isinstance(v, dict) and len(v) == 1 and next(iter(v)) in _TAGS:
        return decode(v)
    if isinstance(v, dict):
        return {k: _meta_decode(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_meta_decode(x) for x in v]
    return v
