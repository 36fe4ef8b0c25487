import math
import random
import uuid

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_request, make_volume
from oirbench.airspace import (
    CreateOirRequest,
    GeoPoint,
    InvalidField,
    OirIndex,
    OirState,
    OperationalIntentReference,
    Volume4D,
    canonical_serialization,
    check_conflicts,
    compute_ovn,
    haversine_distance,
    validate_request,
    volumes_conflict,
)
from oracles import atan2_distance, chord_distance, conflict_oracle

lats = st.floats(-89.9, 89.9)
lons = st.floats(-179.9, 179.9)


def offset_point(origin: GeoPoint, meters: float) -> GeoPoint:
    """Point `meters` due north along the meridian (exact on a sphere)."""
    return GeoPoint(origin.lat + math.degrees(meters / 6_371_000.0), origin.lon)


class TestHaversine:
    def test_identical_points(self):
        assert haversine_distance(GeoPoint(0, 0), GeoPoint(0, 0)) == 0.0

    def test_one_degree_of_longitude_on_equator(self):
        d = haversine_distance(GeoPoint(0, 0), GeoPoint(0, 1))
        assert d == pytest.approx(111_194.9, abs=0.1)
        assert d == pytest.approx(6_371_000 * math.pi / 180, abs=1e-6)

    def test_symmetry_on_random_pairs(self):
        rng = random.Random(7)
        for _ in range(1000):
            a = GeoPoint(rng.uniform(-90, 90), rng.uniform(-180, 179.999))
            b = GeoPoint(rng.uniform(-90, 90), rng.uniform(-180, 179.999))
            assert haversine_distance(a, b) == haversine_distance(b, a)

    @given(lats, lons, lats, lons)
    def test_matches_chord_oracle(self, la1, lo1, la2, lo2):
        d = haversine_distance(GeoPoint(la1, lo1), GeoPoint(la2, lo2))
        assert d == pytest.approx(chord_distance(la1, lo1, la2, lo2), rel=1e-9, abs=1e-3)
        assert d == pytest.approx(atan2_distance(la1, lo1, la2, lo2), rel=1e-9, abs=1e-3)

    @pytest.mark.parametrize("lat,lon", [(float("nan"), 0), (91, 0), (0, 180), (0, -180.5)])
    def test_invalid_center(self, lat, lon):
        with pytest.raises(InvalidField) as e:
            GeoPoint(lat, lon)
        assert e.value.field == "center"


class TestVolumesConflict:
    def test_identical(self):
        v = make_volume()
        assert volumes_conflict(v, v)

    def test_touching_time_windows_do_not_conflict(self):
        assert not volumes_conflict(make_volume(0, 60_000), make_volume(60_000, 120_000))

    def test_touching_altitude_bands_do_not_conflict(self):
        assert not volumes_conflict(make_volume(lo=0, hi=50), make_volume(lo=50, hi=120))

    def test_1000_m_apart(self):
        a = GeoPoint(-23.0, -45.0)
        b = offset_point(a, 1000.0)
        assert chord_distance(a.lat, a.lon, b.lat, b.lon) == pytest.approx(1000.0, abs=1e-6)
        assert not volumes_conflict(make_volume(center=a, radius=400), make_volume(center=b, radius=400))
        assert volumes_conflict(make_volume(center=a, radius=600), make_volume(center=b, radius=600))

    @given(st.data())
    def test_symmetric_and_matches_oracle(self, data):
        def vol():
            t0 = data.draw(st.integers(0, 1000))
            lo = data.draw(st.floats(0, 100))
            c = GeoPoint(data.draw(st.floats(-1, 1)), data.draw(st.floats(-1, 1)))
            return Volume4D(c, data.draw(st.floats(1, 80_000)), lo, lo + data.draw(st.floats(0.5, 100)),
                            t0, t0 + data.draw(st.integers(1, 500)))

        v1, v2 = vol(), vol()
        assert volumes_conflict(v1, v2) == volumes_conflict(v2, v1) == conflict_oracle(v1, v2)


class TestCheckConflicts:
    def _oir(self, req):
        return OperationalIntentReference.from_request(req)

    def test_empty_registry(self):
        assert check_conflicts(make_volume(), []) == []

    def test_overlapping_and_disjoint(self):
        a = self._oir(make_request(0, 60_000))
        b = self._oir(make_request(120_000, 180_000))
        assert check_conflicts(make_volume(30_000, 90_000), [a, b]) == [a.id]

    def test_staggered_sequential_inserts(self):
        live = []
        for i in range(100):
            r = make_request(i * 61_000, i * 61_000 + 60_000)
            assert check_conflicts(r.volume, live) == []
            live.append(self._oir(r))


class TestOvn:
    def test_deterministic(self):
        v = make_volume()
        oid = str(uuid.UUID(int=5))
        assert compute_ovn(oid, 1, v, 0, OirState.ACCEPTED) == compute_ovn(oid, 1, v, 0, "Accepted")

    def test_version_changes_ovn(self):
        v = make_volume()
        assert compute_ovn("x", 1, v, 0, "Accepted") != compute_ovn("x", 2, v, 0, "Accepted")

    def test_round_trip_through_serialization(self):
        r = make_request(5, 99)
        oir = OperationalIntentReference.from_request(r)
        text = canonical_serialization(oir.id, oir.version, oir.volume, oir.priority, oir.state)
        f = text.split("|")
        assert len(f) == 11
        rebuilt = Volume4D(GeoPoint(float(f[2]), float(f[3])), float(f[4]), float(f[5]), float(f[6]), int(f[7]), int(f[8]))
        assert compute_ovn(f[0], int(f[1]), rebuilt, int(f[9]), f[10]) == oir.ovn

    def test_bumped(self):
        oir = OperationalIntentReference.from_request(make_request())
        nxt = oir.bumped(priority=5)
        assert nxt.version == 2 and nxt.ovn != oir.ovn
        assert nxt.ovn == compute_ovn(nxt.id, 2, nxt.volume, 5, nxt.state)


class TestValidateRequest:
    def test_well_formed(self):
        r = make_request()
        assert validate_request(r) is r

    @pytest.mark.parametrize(
        "change,field",
        [
            (dict(radius_m=0.0), "radius"),
            (dict(radius_m=float("inf")), "radius"),
            (dict(alt_lo_m=120.0), "altitude"),
            (dict(time_end=0), "time"),
            (dict(time_start=1.5), "time"),
        ],
    )
    def test_bad_volume(self, change, field):
        from dataclasses import replace

        r = make_request()
        bad = replace(r, volume=replace(r.volume, **change))
        with pytest.raises(InvalidField) as e:
            validate_request(bad)
        assert e.value.field == field

    def test_time_start_equals_end(self):
        with pytest.raises(InvalidField) as e:
            validate_request(make_request(10, 10))
        assert e.value.field == "time"

    @pytest.mark.parametrize(
        "kw,field",
        [
            (dict(id="not-a-uuid"), "id"),
            (dict(id="ABCDEF01-2345-4678-9ABC-DEF012345678"), "id"),
            (dict(manager=""), "manager"),
            (dict(manager="m" * 65), "manager"),
            (dict(priority=101), "priority"),
            (dict(priority=True), "priority"),
            (dict(state="Ended"), "state"),
        ],
    )
    def test_bad_fields(self, kw, field):
        base = dict(id=str(uuid.uuid4()), manager="m", volume=make_volume(), priority=0)
        base.update(kw)
        with pytest.raises(InvalidField) as e:
            validate_request(CreateOirRequest(**base))
        assert e.value.field == field

    def test_first_bad_field_wins(self):
        r = CreateOirRequest("bad", "", make_volume(radius=0), 500)
        with pytest.raises(InvalidField) as e:
            validate_request(r)
        assert e.value.field == "id"


class TestOirIndex:
    @given(st.lists(st.tuples(st.integers(0, 2000), st.integers(1, 400), st.floats(-0.05, 0.05)), max_size=40),
           st.tuples(st.integers(0, 2000), st.integers(1, 400), st.floats(-0.05, 0.05)),
           st.lists(st.integers(0, 39), max_size=10))
    def test_matches_brute_force(self, entries, probe, removals):
        idx = OirIndex()
        live = {}
        for t0, dur, dlat in entries:
            oir = OperationalIntentReference.from_request(make_request(t0, t0 + dur, center=GeoPoint(dlat, 0.0)))
            idx.insert(oir)
            live[oir.id] = oir
        ids = sorted(live)
        for k in removals:
            if k < len(ids) and ids[k] in live:
                idx.remove(ids[k])
                del live[ids[k]]
        t0, dur, dlat = probe
        v = make_volume(t0, t0 + dur, center=GeoPoint(dlat, 0.0))
        assert idx.conflicts(v) == check_conflicts(v, live.values())
        assert idx.ids() == sorted(live)
        assert len(idx) == len(live)

    def test_reinsert_replaces(self):
        idx = OirIndex()
        oir = OperationalIntentReference.from_request(make_request(0, 10))
        idx.insert(oir)
        moved = oir.bumped(volume=make_volume(100, 110))
        idx.insert(moved)
        assert len(idx) == 1
        assert idx.conflicts(make_volume(0, 10)) == []
        assert idx.conflicts(make_volume(105, 106)) == [oir.id]
