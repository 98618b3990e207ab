"""Point and region geometry: WKT point parsing, region-file ingestion, and
the geographical reasoning step (which named regions contain a request
point).

Geometry is planar over raw lon/lat degrees with the even-odd rule and
inclusive boundaries. Regions crossing the antimeridian are rejected at
load time; the training ranges this engine targets are nowhere near it.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .model import GeoPoint, Region

CIRCLE_SEGMENTS = 64
_METERS_PER_DEGREE_LAT = 111_320.0


class RegionError(ValueError):
    """Region file ingestion or validation failure."""


_WKT_POINT_RE = re.compile(
    r"^\s*point\s*\(\s*(-?\d+(?:\.\d+)?)\s+(-?\d+(?:\.\d+)?)\s*\)\s*$",
    re.IGNORECASE,
)


def parse_wkt_point(text: str) -> GeoPoint:
    """Parse a WKT ``POINT(lon lat)`` string.

    The keyword is case-insensitive and surrounding whitespace is ignored.
    Raises ValueError for malformed syntax, non-point geometry, or
    out-of-range coordinates.
    """
    if not isinstance(text, str):
        raise ValueError("WKT point must be a string")
    match = _WKT_POINT_RE.match(text)
    if match is None:
        stripped = text.strip().lower()
        if stripped and not stripped.startswith("point"):
            raise ValueError(f"not a WKT point geometry: {text!r}")
        raise ValueError(f"malformed WKT point: {text!r}")
    return GeoPoint(longitude=float(match.group(1)), latitude=float(match.group(2)))


def format_wkt_point(point: GeoPoint) -> str:
    return f"POINT({point.longitude:g} {point.latitude:g})"


# ---------------------------------------------------------------------------
# Containment
# ---------------------------------------------------------------------------


def _on_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> bool:
    cross = (b.longitude - a.longitude) * (p.latitude - a.latitude) - (
        b.latitude - a.latitude
    ) * (p.longitude - a.longitude)
    if cross != 0.0:
        return False
    if not min(a.longitude, b.longitude) <= p.longitude <= max(a.longitude, b.longitude):
        return False
    return min(a.latitude, b.latitude) <= p.latitude <= max(a.latitude, b.latitude)


def _point_in_ring(p: GeoPoint, ring: Sequence[GeoPoint]) -> bool:
    # Boundary first: edges and vertices count as inside.
    for a, b in zip(ring, ring[1:]):
        if _on_segment(p, a, b):
            return True
    inside = False
    for a, b in zip(ring, ring[1:]):
        if (a.latitude > p.latitude) != (b.latitude > p.latitude):
            x_cross = a.longitude + (p.latitude - a.latitude) * (
                b.longitude - a.longitude
            ) / (b.latitude - a.latitude)
            if p.longitude < x_cross:
                inside = not inside
    return inside


def point_in_region(p: GeoPoint, r: Region) -> bool:
    """True iff the point lies inside any of the region's polygons or
    exactly on a boundary edge or vertex (even-odd rule per ring)."""
    return any(_point_in_ring(p, ring) for ring in r.polygons)


@dataclass(frozen=True)
class RegionStore:
    """Immutable collection of validated regions, indexed by id and name."""

    regions: Mapping[str, Region]
    name_index: Mapping[str, str]

    @staticmethod
    def build(regions: Iterable[Region]) -> "RegionStore":
        by_id: dict[str, Region] = {}
        by_name: dict[str, str] = {}
        for region in regions:
            if region.id in by_id:
                raise RegionError(f"duplicate region id {region.id!r}")
            if region.name in by_name:
                raise RegionError(f"duplicate region name {region.name!r}")
            by_id[region.id] = region
            by_name[region.name] = region.id
        return RegionStore(regions=by_id, name_index=by_name)

    @staticmethod
    def empty() -> "RegionStore":
        return RegionStore.build(())

    def resolve(self, name_or_id: str) -> str | None:
        """Map a region name or id to a region id, or None."""
        if name_or_id in self.regions:
            return name_or_id
        return self.name_index.get(name_or_id)

    def __len__(self) -> int:
        return len(self.regions)


def infer_within(p: GeoPoint, store: RegionStore) -> frozenset[str]:
    """Ids of exactly the regions containing the point. The result feeds
    the evaluation context of the reasoning pipeline."""
    return frozenset(
        region_id
        for region_id, region in store.regions.items()
        if point_in_region(p, region)
    )


# ---------------------------------------------------------------------------
# Region file ingestion
# ---------------------------------------------------------------------------


def _segments_intersect(
    a: GeoPoint, b: GeoPoint, c: GeoPoint, d: GeoPoint
) -> bool:
    """Proper or touching intersection of segments ab and cd."""

    def orient(p: GeoPoint, q: GeoPoint, r: GeoPoint) -> float:
        return (q.longitude - p.longitude) * (r.latitude - p.latitude) - (
            q.latitude - p.latitude
        ) * (r.longitude - p.longitude)

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if ((o1 > 0) != (o2 > 0) and o1 != 0 and o2 != 0) and (
        (o3 > 0) != (o4 > 0) and o3 != 0 and o4 != 0
    ):
        return True
    for p, (q, r) in ((a, (c, d)), (b, (c, d)), (c, (a, b)), (d, (a, b))):
        if _on_segment(p, q, r):
            return True
    return False


def _validate_ring(region_id: str, ring: Sequence[GeoPoint]) -> None:
    if len(ring) < 4:
        raise RegionError(
            f"region {region_id!r}: ring needs at least 4 vertices "
            f"(got {len(ring)})"
        )
    if ring[0] != ring[-1]:
        raise RegionError(f"region {region_id!r}: ring is not closed")
    edges = list(zip(ring, ring[1:]))
    for i, (a, b) in enumerate(edges):
        if a == b:
            raise RegionError(f"region {region_id!r}: zero-length edge at vertex {i}")
        if abs(a.longitude - b.longitude) > 180.0:
            raise RegionError(
                f"region {region_id!r}: edge {i} crosses the antimeridian"
            )
        for j in range(i + 2, len(edges)):
            # Skip adjacent edges (shared endpoint), incl. the closing wrap.
            if i == 0 and j == len(edges) - 1:
                continue
            c, d = edges[j]
            if _segments_intersect(a, b, c, d):
                raise RegionError(
                    f"region {region_id!r}: ring self-intersects "
                    f"(edges {i} and {j})"
                )


def _ring_from_coords(region_id: str, coords: Sequence[Sequence[float]]) -> tuple:
    ring = []
    for entry in coords:
        if len(entry) != 2:
            raise RegionError(f"region {region_id!r}: coordinate must be [lon, lat]")
        try:
            ring.append(GeoPoint(longitude=float(entry[0]), latitude=float(entry[1])))
        except ValueError as exc:
            raise RegionError(f"region {region_id!r}: {exc}") from exc
    return tuple(ring)


def circle_to_ring(center: GeoPoint, radius_m: float) -> tuple:
    """Approximate a circle as a closed 64-gon in lon/lat degrees."""
    if radius_m <= 0:
        raise RegionError("circle radius must be positive")
    dlat = radius_m / _METERS_PER_DEGREE_LAT
    meters_per_degree_lon = _METERS_PER_DEGREE_LAT * math.cos(
        math.radians(center.latitude)
    )
    if meters_per_degree_lon <= 0:
        raise RegionError("circle centers at the poles are not supported")
    dlon = radius_m / meters_per_degree_lon
    points = []
    for i in range(CIRCLE_SEGMENTS):
        theta = 2.0 * math.pi * i / CIRCLE_SEGMENTS
        points.append(
            GeoPoint(
                longitude=center.longitude + dlon * math.cos(theta),
                latitude=center.latitude + dlat * math.sin(theta),
            )
        )
    points.append(points[0])
    return tuple(points)


def _region_from_feature(feature: Mapping[str, Any]) -> Region:
    props = feature.get("properties") or {}
    region_id = props.get("id")
    name = props.get("name") or region_id
    if not region_id:
        raise RegionError("feature is missing properties.id")

    rings: list[tuple] = []
    circle = feature.get("circle") or props.get("circle")
    geometry = feature.get("geometry")
    if circle is not None:
        center = circle.get("center")
        if not isinstance(center, (list, tuple)) or len(center) != 2:
            raise RegionError(f"region {region_id!r}: circle.center must be [lon, lat]")
        rings.append(
            circle_to_ring(
                GeoPoint(longitude=float(center[0]), latitude=float(center[1])),
                float(circle.get("radius_m", 0)),
            )
        )
    elif geometry is not None:
        gtype = geometry.get("type")
        coords = geometry.get("coordinates", [])
        if gtype == "Polygon":
            polygons = [coords]
        elif gtype == "MultiPolygon":
            polygons = coords
        else:
            raise RegionError(f"region {region_id!r}: unsupported geometry {gtype!r}")
        for polygon in polygons:
            if len(polygon) != 1:
                raise RegionError(
                    f"region {region_id!r}: interior rings (holes) are not supported"
                )
            rings.append(_ring_from_coords(region_id, polygon[0]))
    else:
        raise RegionError(f"region {region_id!r}: no geometry or circle")

    for ring in rings:
        _validate_ring(region_id, ring)
    return Region(id=region_id, name=name, polygons=tuple(rings))


def load_regions_data(data: Mapping[str, Any]) -> RegionStore:
    """Build a RegionStore from an already-parsed feature collection."""
    features = data.get("features")
    if features is None:
        raise RegionError("region file has no 'features' list")
    return RegionStore.build(_region_from_feature(f) for f in features)


def load_regions(path: str | Path) -> RegionStore:
    """Load and validate a region file (JSON feature collection).

    Each feature carries ``properties: {id, name}`` and either
    polygon/multipolygon geometry in lon-lat order or
    ``circle: {center: [lon, lat], radius_m}``.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise RegionError(f"cannot read region file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise RegionError(f"region file {path} is not valid JSON: {exc}") from exc
    return load_regions_data(data)
