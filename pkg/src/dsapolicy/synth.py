"""Synthetic fixtures: a discretized request universe and seeded random
policy hierarchies, used by the benchmark commands and the oracle test
suites.

Generated hierarchies keep two constraints that make them well-behaved
under both brute-force realization and satisfier-set comparison on the
grid: every bound lies on a lattice value, and a node never repeats a
restriction kind already present on its ancestor chain.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from typing import Iterator

from .geo import RegionStore
from .model import (
    ActiveDuring,
    Affiliation,
    AffiliationIs,
    Effect,
    EffectKind,
    FrequencyRange,
    FrequencyWithin,
    GeoPoint,
    LocationWithinAny,
    Policy,
    Region,
    RequesterIsA,
    Restriction,
    SpectrumRequest,
    Taxonomy,
    TimeWindow,
    frequency_hz,
)

UTC = timezone.utc


@dataclass(frozen=True)
class GridUniverse:
    """A small closed world of requesters, frequencies, places, and times."""

    taxonomy: Taxonomy
    regions: RegionStore
    region_points: dict[str, GeoPoint]
    outside_point: GeoPoint
    freq_lattice: tuple[Fraction, ...]
    time_lattice: tuple[datetime, ...]
    request_classes: tuple[str, ...]
    policy_classes: tuple[str, ...]


def _unit_square(region_id: str, west: float, south: float) -> Region:
    ring = (
        GeoPoint(west, south),
        GeoPoint(west + 1.0, south),
        GeoPoint(west + 1.0, south + 1.0),
        GeoPoint(west, south + 1.0),
        GeoPoint(west, south),
    )
    return Region(id=region_id, name=region_id.replace("_", " "), polygons=(ring,))


def make_grid_universe(
    num_regions: int = 5, num_freqs: int = 20, num_times: int = 5
) -> GridUniverse:
    """Deterministic universe: a five-class device tree, disjoint unit
    squares, a frequency lattice, and a time lattice."""
    taxonomy = Taxonomy(
        {"Device", "Radio", "TacticalRadio", "CommercialRadio", "Sensor"},
        {
            "Radio": ("Device",),
            "TacticalRadio": ("Radio",),
            "CommercialRadio": ("Radio",),
            "Sensor": ("Device",),
        },
    )
    regions = []
    region_points: dict[str, GeoPoint] = {}
    for k in range(num_regions):
        region_id = f"Range_{k}"
        regions.append(_unit_square(region_id, west=-120.0 + 10.0 * k, south=30.0))
        region_points[region_id] = GeoPoint(-120.0 + 10.0 * k + 0.5, 30.5)
    store = RegionStore.build(regions)

    freq_lattice = tuple(
        frequency_hz(1000 + 50 * i, "MHz") for i in range(num_freqs)
    )
    base = datetime(2020, 1, 1, tzinfo=UTC)
    time_lattice = tuple(base + timedelta(hours=6 * i) for i in range(num_times))
    return GridUniverse(
        taxonomy=taxonomy,
        regions=store,
        region_points=region_points,
        outside_point=GeoPoint(-40.0, -40.0),
        freq_lattice=freq_lattice,
        time_lattice=time_lattice,
        request_classes=("Device", "Radio", "TacticalRadio", "CommercialRadio", "Sensor"),
        policy_classes=("Radio", "TacticalRadio", "CommercialRadio", "Sensor"),
    )


def iter_grid_requests(universe: GridUniverse) -> Iterator[SpectrumRequest]:
    """Every request on the grid: classes x affiliations x frequency points
    x (region interiors + one outside point) x time points."""
    points = list(universe.region_points.values()) + [universe.outside_point]
    counter = 0
    for requester in universe.request_classes:
        for affiliation in (Affiliation.FEDERAL, Affiliation.NONFEDERAL):
            for freq in universe.freq_lattice:
                for point in points:
                    for instant in universe.time_lattice:
                        yield SpectrumRequest(
                            id=f"g{counter}",
                            requester_class=requester,
                            location=point,
                            frequency=FrequencyRange(freq, freq),
                            time=TimeWindow(instant, instant),
                            affiliation=affiliation,
                        )
                        counter += 1


def _lattice_spans(rng: random.Random, size: int) -> tuple[int, int]:
    """A random lattice subrange that never covers the whole lattice."""
    while True:
        i, j = sorted(rng.randrange(size) for _ in range(2))
        if not (i == 0 and j == size - 1):
            return i, j


def _random_restriction(
    rng: random.Random, universe: GridUniverse, kind: type
) -> Restriction:
    if kind is FrequencyWithin:
        i, j = _lattice_spans(rng, len(universe.freq_lattice))
        return FrequencyWithin(
            FrequencyRange(universe.freq_lattice[i], universe.freq_lattice[j])
        )
    if kind is RequesterIsA:
        return RequesterIsA(rng.choice(universe.policy_classes))
    if kind is AffiliationIs:
        return AffiliationIs(rng.choice([Affiliation.FEDERAL, Affiliation.NONFEDERAL]))
    if kind is LocationWithinAny:
        region_ids = list(universe.region_points)
        count = rng.randint(1, len(region_ids))
        return LocationWithinAny(frozenset(rng.sample(region_ids, count)))
    if kind is ActiveDuring:
        i, j = _lattice_spans(rng, len(universe.time_lattice))
        return ActiveDuring(
            TimeWindow(universe.time_lattice[i], universe.time_lattice[j])
        )
    raise TypeError(kind)


_ALL_KINDS: tuple[type, ...] = (
    FrequencyWithin,
    RequesterIsA,
    AffiliationIs,
    LocationWithinAny,
    ActiveDuring,
)


def _random_effect(rng: random.Random) -> Effect | None:
    roll = rng.random()
    if roll < 0.45:
        return None
    if roll < 0.7:
        return Effect(EffectKind.PERMIT)
    if roll < 0.9:
        return Effect(EffectKind.DENY)
    return Effect(
        EffectKind.PERMIT_WITH_OBLIGATIONS,
        tuple(f"ob-{rng.randint(0, 4)}" for _ in range(rng.randint(1, 2))),
    )


def random_hierarchy(
    rng: random.Random,
    universe: GridUniverse,
    size: int = 10,
    max_depth: int = 4,
    prefix: str = "H",
) -> dict[str, Policy]:
    """A random policy forest of the given size over the grid universe."""
    policies: dict[str, Policy] = {}
    depths: dict[str, int] = {}
    used_kinds: dict[str, frozenset[type]] = {}
    for n in range(size):
        pid = f"{prefix}{n}"
        candidates = [
            p for p, d in depths.items() if d < max_depth - 1
        ]
        parent = rng.choice(candidates) if candidates and rng.random() < 0.7 else None
        inherited = used_kinds[parent] if parent else frozenset()
        available = [k for k in _ALL_KINDS if k not in inherited]
        count = rng.randint(0 if parent else 1, min(2, len(available)))
        kinds = rng.sample(available, count) if count else []
        restrictions = tuple(_random_restriction(rng, universe, k) for k in kinds)
        policies[pid] = Policy(
            id=pid,
            parent=parent,
            restrictions=restrictions,
            effect=_random_effect(rng),
            precedence=rng.choice([0, 0, 0, 1, 2]),
        )
        depths[pid] = depths[parent] + 1 if parent else 0
        used_kinds[pid] = inherited | frozenset(kinds)
    return policies


def random_grid_request(
    rng: random.Random, universe: GridUniverse, request_id: str
) -> SpectrumRequest:
    points = list(universe.region_points.values()) + [universe.outside_point]
    freq = rng.choice(universe.freq_lattice)
    instant = rng.choice(universe.time_lattice)
    return SpectrumRequest(
        id=request_id,
        requester_class=rng.choice(universe.request_classes),
        location=rng.choice(points),
        frequency=FrequencyRange(freq, freq),
        time=TimeWindow(instant, instant),
        affiliation=rng.choice([Affiliation.FEDERAL, Affiliation.NONFEDERAL]),
    )


@dataclass(frozen=True)
class BenchCorpus:
    universe: GridUniverse
    policies: dict[str, Policy]
    requests: tuple[SpectrumRequest, ...]


def make_bench_corpus(
    policy_count: int = 165, request_count: int = 100, seed: int = 2020
) -> BenchCorpus:
    """A reproducible corpus at the deployment's reported scale."""
    rng = random.Random(seed)
    universe = make_grid_universe()
    policies: dict[str, Policy] = {}
    family = 0
    while len(policies) < policy_count:
        remaining = policy_count - len(policies)
        size = min(rng.randint(2, 6), remaining)
        policies.update(
            random_hierarchy(rng, universe, size=size, prefix=f"B{family}x")
        )
        family += 1
    requests = tuple(
        random_grid_request(rng, universe, f"req-{i}") for i in range(request_count)
    )
    return BenchCorpus(universe=universe, policies=policies, requests=requests)
