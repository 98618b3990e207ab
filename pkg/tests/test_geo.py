"""Geometry: WKT parsing, containment vs a convex half-plane oracle, and
region-file ingestion."""

from __future__ import annotations

import json
import math
import random

import pytest

from dsapolicy.geo import (
    RegionError,
    RegionStore,
    infer_within,
    load_regions,
    load_regions_data,
    parse_wkt_point,
    point_in_region,
)
from dsapolicy.model import GeoPoint, Region


def square(region_id: str, west: float, south: float, east: float, north: float) -> Region:
    ring = (
        GeoPoint(west, south),
        GeoPoint(east, south),
        GeoPoint(east, north),
        GeoPoint(west, north),
        GeoPoint(west, south),
    )
    return Region(id=region_id, name=region_id, polygons=(ring,))


def convex_polygon(rng: random.Random, sides: int) -> list[GeoPoint]:
    """Random convex polygon: points on an ellipse, CCW closed ring."""
    cx, cy = rng.uniform(-150, 150), rng.uniform(-60, 60)
    rx, ry = rng.uniform(1, 12), rng.uniform(1, 12)
    angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(sides))
    ring = [
        GeoPoint(
            max(-180.0, min(180.0, cx + rx * math.cos(a))),
            max(-90.0, min(90.0, cy + ry * math.sin(a))),
        )
        for a in angles
    ]
    ring.append(ring[0])
    return ring


def half_plane_contains(ring: list[GeoPoint], p: GeoPoint) -> bool:
    """Convex-polygon oracle: inside (or on boundary) iff the point is on a
    consistent side of every edge."""
    signs = []
    for a, b in zip(ring, ring[1:]):
        cross = (b.longitude - a.longitude) * (p.latitude - a.latitude) - (
            b.latitude - a.latitude
        ) * (p.longitude - a.longitude)
        signs.append(cross)
    return all(s >= 0 for s in signs) or all(s <= 0 for s in signs)


class TestParseWktPoint:
    def test_sample_point(self):
        p = parse_wkt_point("POINT(-114.23 33.20)")
        assert (p.longitude, p.latitude) == (-114.23, 33.20)

    def test_origin(self):
        p = parse_wkt_point("POINT(0 0)")
        assert (p.longitude, p.latitude) == (0.0, 0.0)

    def test_tolerant_whitespace_and_case(self):
        p = parse_wkt_point("  point( 10.5  -20.25 )  ")
        assert (p.longitude, p.latitude) == (10.5, -20.25)

    def test_rejects_non_point_geometry(self):
        with pytest.raises(ValueError, match="not a WKT point"):
            parse_wkt_point("POLYGON((0 0, 1 0, 1 1, 0 0))")

    def test_rejects_malformed(self):
        for bad in ("POINT(1)", "POINT(a b)", "POINT 1 2", ""):
            with pytest.raises(ValueError):
                parse_wkt_point(bad)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            parse_wkt_point("POINT(-200 10)")


class TestPointInRegion:
    def test_sample_point_in_fixture_square(self):
        # Hand check: (-114.23, 33.20) is left of the east edge, right of the
        # west edge, above south, below north of the square.
        region = square("box", -115, 33, -113, 34)
        assert point_in_region(GeoPoint(-114.23, 33.20), region)

    def test_vertex_counts_as_inside(self):
        region = square("box", -115, 33, -113, 34)
        assert point_in_region(GeoPoint(-115.0, 33.0), region)

    def test_edge_midpoint_counts_as_inside(self):
        region = square("box", -115, 33, -113, 34)
        assert point_in_region(GeoPoint(-114.0, 33.0), region)

    def test_outside(self):
        region = square("box", -115, 33, -113, 34)
        assert not point_in_region(GeoPoint(-112.9, 33.5), region)

    def test_matches_convex_oracle_on_random_pairs(self):
        rng = random.Random(2024)
        mismatches = 0
        for _ in range(2000):
            ring = convex_polygon(rng, rng.randint(3, 9))
            region = Region(id="poly", name="poly", polygons=(tuple(ring),))
            for _ in range(5):
                p = GeoPoint(rng.uniform(-170, 170), rng.uniform(-80, 80))
                if point_in_region(p, region) != half_plane_contains(ring, p):
                    mismatches += 1
        assert mismatches == 0

    def test_multi_polygon_union(self):
        ring_a = square("a", 0, 0, 1, 1).polygons[0]
        ring_b = square("b", 5, 5, 6, 6).polygons[0]
        region = Region(id="u", name="u", polygons=(ring_a, ring_b))
        assert point_in_region(GeoPoint(0.5, 0.5), region)
        assert point_in_region(GeoPoint(5.5, 5.5), region)
        assert not point_in_region(GeoPoint(3.0, 3.0), region)

    def test_translation_invariance(self):
        rng = random.Random(99)
        for _ in range(300):
            ring = convex_polygon(rng, 6)
            p = GeoPoint(rng.uniform(-20, 20), rng.uniform(-20, 20))
            dlon, dlat = rng.uniform(-5, 5), rng.uniform(-5, 5)
            moved_ring = tuple(
                GeoPoint(v.longitude + dlon, v.latitude + dlat) for v in ring
            )
            if any(
                not (-180 <= v.longitude <= 180 and -90 <= v.latitude <= 90)
                for v in moved_ring
            ):
                continue
            moved_p = GeoPoint(p.longitude + dlon, p.latitude + dlat)
            before = point_in_region(p, Region("r", "r", (tuple(ring),)))
            after = point_in_region(moved_p, Region("r", "r", (moved_ring,)))
            assert before == after


class TestInferWithin:
    def test_sample_point_hits_only_yuma(self, regions):
        assert infer_within(GeoPoint(-114.23, 33.20), regions) == {
            "Yuma_Proving_Ground"
        }

    def test_empty_store(self):
        assert infer_within(GeoPoint(0, 0), RegionStore.empty()) == frozenset()

    def test_overlapping_regions_both_reported(self):
        a = square("A", 0, 0, 2, 2)
        b = square("B", 1, 1, 3, 3)
        store = RegionStore.build([a, b])
        assert infer_within(GeoPoint(1.5, 1.5), store) == {"A", "B"}

    def test_definitional_equality_with_point_in_region(self, regions):
        rng = random.Random(5)
        for _ in range(500):
            p = GeoPoint(rng.uniform(-120, -75), rng.uniform(30, 37))
            expected = {
                rid for rid, r in regions.regions.items() if point_in_region(p, r)
            }
            assert infer_within(p, regions) == expected


class TestLoadRegions:
    def test_fixture_file(self, regions):
        assert len(regions) == 6
        assert regions.resolve("Yuma Proving Ground") == "Yuma_Proving_Ground"
        assert regions.resolve("Yuma_Proving_Ground") == "Yuma_Proving_Ground"

    def test_empty_feature_list(self):
        assert len(load_regions_data({"features": []})) == 0

    def test_self_intersecting_ring_rejected(self):
        bowtie = {
            "features": [
                {
                    "properties": {"id": "bowtie", "name": "bowtie"},
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [[[0, 0], [2, 2], [2, 0], [0, 2], [0, 0]]],
                    },
                }
            ]
        }
        with pytest.raises(RegionError, match="bowtie"):
            load_regions_data(bowtie)

    def test_duplicate_id_rejected(self):
        data = {
            "features": [
                {
                    "properties": {"id": "dup", "name": "one"},
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 0]]],
                    },
                },
                {
                    "properties": {"id": "dup", "name": "two"},
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [[[5, 5], [6, 5], [6, 6], [5, 5]]],
                    },
                },
            ]
        }
        with pytest.raises(RegionError, match="duplicate region id"):
            load_regions_data(data)

    def test_short_ring_rejected(self):
        data = {
            "features": [
                {
                    "properties": {"id": "tiny", "name": "tiny"},
                    "geometry": {"type": "Polygon", "coordinates": [[[0, 0], [1, 1], [0, 0]]]},
                }
            ]
        }
        with pytest.raises(RegionError, match="at least 4"):
            load_regions_data(data)

    def test_antimeridian_crossing_rejected(self):
        data = {
            "features": [
                {
                    "properties": {"id": "wrap", "name": "wrap"},
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [
                            [[179, 0], [-179, 0], [-179, 1], [179, 1], [179, 0]]
                        ],
                    },
                }
            ]
        }
        with pytest.raises(RegionError, match="antimeridian"):
            load_regions_data(data)

    def test_circle_becomes_64_gon(self):
        data = {
            "features": [
                {
                    "properties": {"id": "pad", "name": "pad"},
                    "circle": {"center": [-100.0, 33.0], "radius_m": 10_000},
                }
            ]
        }
        store = load_regions_data(data)
        ring = store.regions["pad"].polygons[0]
        assert len(ring) == 65  # 64 vertices plus the closing repeat
        assert point_in_region(GeoPoint(-100.0, 33.0), store.regions["pad"])
        assert not point_in_region(GeoPoint(-99.0, 33.0), store.regions["pad"])

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(RegionError):
            load_regions(tmp_path / "missing.json")

    def test_holes_rejected(self):
        data = {
            "features": [
                {
                    "properties": {"id": "donut", "name": "donut"},
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [
                            [[0, 0], [10, 0], [10, 10], [0, 10], [0, 0]],
                            [[4, 4], [6, 4], [6, 6], [4, 6], [4, 4]],
                        ],
                    },
                }
            ]
        }
        with pytest.raises(RegionError, match="holes"):
            load_regions_data(data)

    def test_multipolygon(self, tmp_path):
        data = {
            "features": [
                {
                    "properties": {"id": "pair", "name": "pair"},
                    "geometry": {
                        "type": "MultiPolygon",
                        "coordinates": [
                            [[[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]],
                            [[[5, 5], [6, 5], [6, 6], [5, 6], [5, 5]]],
                        ],
                    },
                }
            ]
        }
        path = tmp_path / "regions.json"
        path.write_text(json.dumps(data))
        store = load_regions(path)
        assert point_in_region(GeoPoint(0.5, 0.5), store.regions["pair"])
        assert point_in_region(GeoPoint(5.5, 5.5), store.regions["pair"])
