"""JSON wire format for OIRs. Times travel as RFC 3339 UTC strings."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from .airspace import CreateOirRequest, GeoPoint, InvalidField, OirState, OperationalIntentReference, Volume4D

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_ONE_MS = timedelta(milliseconds=1)


def ms_to_rfc3339(ms: int) -> str:
    return (EPOCH + timedelta(milliseconds=ms)).isoformat(timespec="milliseconds").replace("+00:00", "Z")


def rfc3339_to_ms(s: str, field: str = "time") -> int:
    if not isinstance(s, str):
        raise InvalidField(field, "expected an RFC 3339 string")
    text = s[:-1] + "+00:00" if s.endswith(("Z", "z")) else s
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise InvalidField(field, f"not an RFC 3339 timestamp: {s!r}") from None
    if dt.tzinfo is None:
        raise InvalidField(field, "timestamp needs a UTC offset")
    delta = dt - EPOCH
    if delta % _ONE_MS:
        raise InvalidField(field, "sub-millisecond precision is not supported")
    return delta // _ONE_MS


def request_to_wire(req: CreateOirRequest) -> dict:
    v = req.volume
    return {
        "manager": req.manager,
        "center": {"lat": v.center.lat, "lng": v.center.lon},
        "radius_m": v.radius_m,
        "altitude_lower_m": v.alt_lo_m,
        "altitude_upper_m": v.alt_hi_m,
        "time_start": ms_to_rfc3339(v.time_start),
        "time_end": ms_to_rfc3339(v.time_end),
        "priority": req.priority,
        "state": OirState(req.state).value,
    }


def _number(body: dict, key: str, field: str) -> float:
    x = body.get(key)
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InvalidField(field, f"{key} must be a number")
    return x


def request_from_wire(oir_id: str, body) -> CreateOirRequest:
    """Parse a PUT body; raises InvalidField naming the offending field."""
    if not isinstance(body, dict):
        raise InvalidField("body", "expected a JSON object")
    center = body.get("center")
    if not isinstance(center, dict):
        raise InvalidField("center", "expected an object with lat and lng")
    point = GeoPoint(_number(center, "lat", "center"), _number(center, "lng", "center"))
    try:
        state = OirState(body.get("state", OirState.ACCEPTED.value))
    except ValueError:
        raise InvalidField("state", f"unknown state {body.get('state')!r}") from None
    volume = Volume4D(
        point,
        _number(body, "radius_m", "radius"),
        _number(body, "altitude_lower_m", "altitude"),
        _number(body, "altitude_upper_m", "altitude"),
        rfc3339_to_ms(body.get("time_start"), "time"),
        rfc3339_to_ms(body.get("time_end"), "time"),
    )
    return CreateOirRequest(oir_id, body.get("manager"), volume, body.get("priority"), state)


def oir_to_wire(oir: OperationalIntentReference) -> dict:
    d = request_to_wire(CreateOirRequest(oir.id, oir.manager, oir.volume, oir.priority, oir.state))
    d.update(id=oir.id, version=oir.version, ovn=oir.ovn)
    return d
