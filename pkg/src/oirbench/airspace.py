"""OIR domain model and spatio-temporal conflict math.

Everything here is a pure function over frozen values. Volume times are
integer milliseconds on the testbed clock (Unix epoch when rendered on the
wire).
"""

from __future__ import annotations

import bisect
import hashlib
import math
import uuid
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable

EARTH_RADIUS_M = 6_371_000.0
MAX_MANAGER_LEN = 64


class InvalidField(ValueError):
    """A request field violates its invariant."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class OirState(str, Enum):
    ACCEPTED = "Accepted"
    ACTIVATED = "Activated"


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        lat, lon = float(self.lat), float(self.lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise InvalidField("center", "coordinates must be finite")
        if not -90.0 <= lat <= 90.0:
            raise InvalidField("center", f"lat {lat} outside [-90, 90]")
        if not -180.0 <= lon < 180.0:
            raise InvalidField("center", f"lon {lon} outside [-180, 180)")
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)


@dataclass(frozen=True)
class Volume4D:
    """Circle footprint, altitude band and half-open time window.

    Not validated on construction so that malformed requests can still be
    represented and rejected by :func:`validate_request`.
    """

    center: GeoPoint
    radius_m: float
    alt_lo_m: float
    alt_hi_m: float
    time_start: int
    time_end: int

    def shifted(self, dt_ms: int) -> "Volume4D":
        return replace(self, time_start=self.time_start + dt_ms, time_end=self.time_end + dt_ms)


@dataclass(frozen=True)
class CreateOirRequest:
    id: str
    manager: str
    volume: Volume4D
    priority: int
    state: OirState = OirState.ACCEPTED


@dataclass(frozen=True)
class OperationalIntentReference:
    id: str
    manager: str
    volume: Volume4D
    priority: int
    state: OirState
    version: int
    ovn: str

    @classmethod
    def from_request(cls, req: CreateOirRequest, version: int = 1) -> "OperationalIntentReference":
        ovn = compute_ovn(req.id, version, req.volume, req.priority, req.state)
        return cls(req.id, req.manager, req.volume, req.priority, OirState(req.state), version, ovn)

    def bumped(self, **changes) -> "OperationalIntentReference":
        """Copy with `changes` applied, version + 1 and a fresh ovn."""
        nxt = replace(self, **changes, version=self.version + 1)
        return replace(nxt, ovn=compute_ovn(nxt.id, nxt.version, nxt.volume, nxt.priority, nxt.state))


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on a sphere of radius 6,371 km."""
    if a == b:
        return 0.0
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def volumes_conflict(v1: Volume4D, v2: Volume4D) -> bool:
    """True iff footprints, altitude bands and time windows all overlap.

    Every test is strict, so volumes that merely touch do not conflict.
    """
    if max(v1.time_start, v2.time_start) >= min(v1.time_end, v2.time_end):
        return False
    if max(v1.alt_lo_m, v2.alt_lo_m) >= min(v1.alt_hi_m, v2.alt_hi_m):
        return False
    return haversine_distance(v1.center, v2.center) < v1.radius_m + v2.radius_m


def check_conflicts(candidate: Volume4D, existing: Iterable[OperationalIntentReference]) -> list[str]:
    return sorted(o.id for o in existing if volumes_conflict(candidate, o.volume))


def _fmt_float(x: float) -> str:
    return repr(float(x))


def canonical_serialization(
    id: str, version: int, volume: Volume4D, priority: int, state: OirState | str
) -> str:
    c = volume.center
    parts = [
        id,
        str(int(version)),
        _fmt_float(c.lat),
        _fmt_float(c.lon),
        _fmt_float(volume.radius_m),
        _fmt_float(volume.alt_lo_m),
        _fmt_float(volume.alt_hi_m),
        str(int(volume.time_start)),
        str(int(volume.time_end)),
        str(int(priority)),
        OirState(state).value,
    ]
    return "|".join(parts)


def compute_ovn(
    id: str, version: int, volume: Volume4D, priority: int, state: OirState | str
) -> str:
    payload = canonical_serialization(id, version, volume, priority, state)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _is_canonical_uuid(s) -> bool:
    if not isinstance(s, str):
        return False
    try:
        return str(uuid.UUID(s)) == s
    except ValueError:
        return False


def validate_volume(v: Volume4D) -> Volume4D:
    if not isinstance(v.center, GeoPoint):
        raise InvalidField("center", "missing")
    r = v.radius_m
    if not (isinstance(r, (int, float)) and math.isfinite(r) and r > 0):
        raise InvalidField("radius", f"radius_m must be > 0, got {r!r}")
    lo, hi = v.alt_lo_m, v.alt_hi_m
    if not all(isinstance(x, (int, float)) and math.isfinite(x) for x in (lo, hi)) or not lo < hi:
        raise InvalidField("altitude", f"need alt_lo_m < alt_hi_m, got [{lo!r}, {hi!r}]")
    s, e = v.time_start, v.time_end
    if not all(isinstance(x, int) and not isinstance(x, bool) for x in (s, e)) or not s < e:
        raise InvalidField("time", f"need integer time_start < time_end, got [{s!r}, {e!r}]")
    return v


def validate_request(req: CreateOirRequest) -> CreateOirRequest:
    """Return `req` unchanged or raise InvalidField for the first bad field.

    Field order: id, manager, center, radius, altitude, time, priority.
    """
    if not _is_canonical_uuid(req.id):
        raise InvalidField("id", f"not a canonical UUID: {req.id!r}")
    if not isinstance(req.manager, str) or not 0 < len(req.manager) <= MAX_MANAGER_LEN:
        raise InvalidField("manager", f"must be 1..{MAX_MANAGER_LEN} chars")
    validate_volume(req.volume)
    p = req.priority
    if not isinstance(p, int) or isinstance(p, bool) or not 0 <= p <= 100:
        raise InvalidField("priority", f"must be an integer in [0, 100], got {p!r}")
    try:
        OirState(req.state)
    except ValueError:
        raise InvalidField("state", f"unknown state {req.state!r}") from None
    return req


class OirIndex:
    """Live OIRs ordered by window start, for fast conflict scans.

    Only entries whose start lies in ``(cand.start - longest_window,
    cand.end)`` can overlap a candidate in time; those are then checked
    with :func:`volumes_conflict`. Not thread-safe.
    """

    def __init__(self, oirs: Iterable[OperationalIntentReference] = ()):
        self._by_id: dict[str, OperationalIntentReference] = {}
        self._starts: list[tuple[int, str]] = []
        self._longest = 0
        for o in oirs:
            self.insert(o)

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, oir_id: str) -> bool:
        return oir_id in self._by_id

    def __iter__(self):
        return iter(self._by_id.values())

    def get(self, oir_id: str) -> OperationalIntentReference | None:
        return self._by_id.get(oir_id)

    def ids(self) -> list[str]:
        return sorted(self._by_id)

    def insert(self, oir: OperationalIntentReference) -> None:
        if oir.id in self._by_id:
            self.remove(oir.id)
        self._by_id[oir.id] = oir
        v = oir.volume
        bisect.insort(self._starts, (v.time_start, oir.id))
        self._longest = max(self._longest, v.time_end - v.time_start)

    def remove(self, oir_id: str) -> OperationalIntentReference:
        oir = self._by_id.pop(oir_id)
        key = (oir.volume.time_start, oir_id)
        i = bisect.bisect_left(self._starts, key)
        del self._starts[i]
        return oir

    def candidates(self, volume: Volume4D) -> list[OperationalIntentReference]:
        # integer ms: any overlap needs start > cand.start - longest
        lo = bisect.bisect_left(self._starts, (volume.time_start - self._longest + 1,))
        hi = bisect.bisect_left(self._starts, (volume.time_end,))
        return [self._by_id[oid] for _, oid in self._starts[lo:hi]]

    def conflicts(self, volume: Volume4D) -> list[str]:
        return check_conflicts(volume, self.candidates(volume))
