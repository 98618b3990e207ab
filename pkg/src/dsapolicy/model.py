"""Core domain types for spectrum access requests, policies, and results.

Frequencies are normalized to exact rational Hz to avoid float-equality
hazards at policy boundaries. All bound comparisons (frequency, time) are
inclusive. Every type here is an immutable value after construction and is
safe to share across concurrent evaluators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction
from typing import Iterator, Mapping, Union


class PolicyError(Exception):
    """Base class for policy engine errors."""


class UnknownPolicyError(PolicyError):
    """A referenced policy id does not resolve."""


class PolicyCycleError(PolicyError):
    """Parent links form a cycle (store corruption)."""


# ---------------------------------------------------------------------------
# Frequencies
# ---------------------------------------------------------------------------

HZ_PER_UNIT: Mapping[str, Fraction] = {
    "Hz": Fraction(1),
    "kHz": Fraction(10**3),
    "MHz": Fraction(10**6),
    "GHz": Fraction(10**9),
}


def frequency_hz(value: Union[int, float, str, Fraction], unit: str = "Hz") -> Fraction:
    """Convert a numeric value in the given unit to exact Hz.

    Strings and floats are interpreted as decimal literals, so ``"1756.25"``
    MHz becomes exactly 1 756 250 000 Hz.
    """
    if unit not in HZ_PER_UNIT:
        raise ValueError(f"unknown frequency unit {unit!r}")
    if isinstance(value, float):
        value = str(value)  # shortest decimal repr, kept exact below
    try:
        magnitude = Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad frequency value {value!r}") from exc
    return magnitude * HZ_PER_UNIT[unit]


def _fraction_to_decimal(value: Fraction) -> str:
    """Render a fraction whose denominator is of the form 2^a*5^b as an
    exact decimal string."""
    num, den = value.numerator, value.denominator
    if den == 1:
        return str(num)
    twos = fives = 0
    d = den
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        raise ValueError(f"{value} has no finite decimal representation")
    digits = max(twos, fives)
    scaled = num * 10**digits // den
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    whole, frac = text[:-digits], text[-digits:]
    frac = frac.rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def hz_to_unit_str(hz: Fraction, unit: str = "MHz") -> str:
    """Render an exact Hz quantity as a decimal string in the given unit."""
    return _fraction_to_decimal(hz / HZ_PER_UNIT[unit])


@dataclass(frozen=True)
class FrequencyRange:
    """An inclusive frequency interval in Hz; a single frequency is the
    degenerate range min == max."""

    min_hz: Fraction
    max_hz: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "min_hz", Fraction(self.min_hz))
        object.__setattr__(self, "max_hz", Fraction(self.max_hz))
        if self.min_hz <= 0 or self.max_hz <= 0:
            raise ValueError("frequencies must be strictly positive")
        if self.min_hz > self.max_hz:
            raise ValueError("min_hz must not exceed max_hz")

    def contains(self, other: FrequencyRange) -> bool:
        return self.min_hz <= other.min_hz and self.max_hz >= other.max_hz

    def overlaps(self, other: FrequencyRange) -> bool:
        return self.min_hz <= other.max_hz and other.min_hz <= self.max_hz

    def __str__(self) -> str:
        return f"{hz_to_unit_str(self.min_hz)}..{hz_to_unit_str(self.max_hz)} MHz"


# ---------------------------------------------------------------------------
# Geometry and time
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 lon/lat point in degrees."""

    longitude: float
    latitude: float

    def __post_init__(self) -> None:
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} out of [-180, 180]")
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} out of [-90, 90]")


Ring = tuple  # tuple[GeoPoint, ...], first vertex repeated as the last


@dataclass(frozen=True)
class Region:
    """A named geographic area: the union of one or more simple polygons.

    Each ring is a closed vertex list (first == last, at least 4 entries).
    Self-intersection is rejected by the region loader, not here.
    """

    id: str
    name: str
    polygons: tuple[Ring, ...]

    def __post_init__(self) -> None:
        if not self.polygons:
            raise ValueError(f"region {self.id}: no polygons")
        for ring in self.polygons:
            if len(ring) < 4:
                raise ValueError(f"region {self.id}: ring has fewer than 4 vertices")
            if ring[0] != ring[-1]:
                raise ValueError(f"region {self.id}: ring is not closed")


def parse_instant(text: str) -> datetime:
    """Parse an ISO 8601 instant into a UTC-normalized aware datetime."""
    cleaned = text.strip()
    if cleaned.endswith(("Z", "z")):
        cleaned = cleaned[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(cleaned)
    except ValueError as exc:
        raise ValueError(f"bad ISO 8601 instant {text!r}") from exc
    if parsed.tzinfo is None:
        raise ValueError(f"instant {text!r} has no UTC offset")
    return parsed.astimezone(timezone.utc)


def format_instant(instant: datetime) -> str:
    """Render a UTC instant as ISO 8601 with a Z suffix."""
    utc = instant.astimezone(timezone.utc)
    if utc.microsecond:
        return utc.strftime("%Y-%m-%dT%H:%M:%S.%f") + "Z"
    return utc.strftime("%Y-%m-%dT%H:%M:%S") + "Z"


@dataclass(frozen=True)
class TimeWindow:
    """An inclusive UTC time interval."""

    start: datetime
    end: datetime

    def __post_init__(self) -> None:
        for name in ("start", "end"):
            value = getattr(self, name)
            if value.tzinfo is None:
                raise ValueError(f"{name} must be timezone-aware")
            object.__setattr__(self, name, value.astimezone(timezone.utc))
        if self.start > self.end:
            raise ValueError("window start must not be after end")

    def contains(self, other: TimeWindow) -> bool:
        return self.start <= other.start and self.end >= other.end

    def overlaps(self, other: TimeWindow) -> bool:
        return self.start <= other.end and other.start <= self.end

    def __str__(self) -> str:
        return f"{format_instant(self.start)}..{format_instant(self.end)}"


# ---------------------------------------------------------------------------
# Taxonomy
# ---------------------------------------------------------------------------


class Affiliation(str, Enum):
    FEDERAL = "Federal"
    NONFEDERAL = "NonFederal"


_AFFILIATION_ALIASES = {
    "federal": Affiliation.FEDERAL,
    "nonfederal": Affiliation.NONFEDERAL,
    "non-federal": Affiliation.NONFEDERAL,
}


def parse_affiliation(text: str) -> Affiliation:
    try:
        return _AFFILIATION_ALIASES[text.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown affiliation {text!r}") from None


class Taxonomy:
    """Requester class hierarchy: a DAG of child -> parent edges with an
    optional affiliation per class.

    The reflexive-transitive ancestor closure is computed once at
    construction; instances are immutable afterwards.
    """

    def __init__(
        self,
        classes: set[str] | frozenset[str],
        subclass_edges: Mapping[str, tuple[str, ...]] | Mapping[str, list[str]],
        affiliation_of: Mapping[str, Affiliation] | None = None,
    ):
        self.classes = frozenset(classes)
        self.parents: dict[str, tuple[str, ...]] = {}
        for child, parents in subclass_edges.items():
            if child not in self.classes:
                raise ValueError(f"edge child {child!r} is not a declared class")
            for parent in parents:
                if parent not in self.classes:
                    raise ValueError(f"edge parent {parent!r} is not a declared class")
            self.parents[child] = tuple(parents)
        self.affiliation_of: dict[str, Affiliation] = dict(affiliation_of or {})
        for class_id in self.affiliation_of:
            if class_id not in self.classes:
                raise ValueError(f"affiliation for unknown class {class_id!r}")
        self._ancestors = self._close()

    def _close(self) -> dict[str, frozenset[str]]:
        closure: dict[str, frozenset[str]] = {}

        def walk(class_id: str, trail: tuple[str, ...]) -> frozenset[str]:
            if class_id in closure:
                return closure[class_id]
            if class_id in trail:
                cycle = " -> ".join(trail + (class_id,))
                raise ValueError(f"taxonomy cycle: {cycle}")
            collected = {class_id}
            for parent in self.parents.get(class_id, ()):
                collected |= walk(parent, trail + (class_id,))
            closure[class_id] = frozenset(collected)
            return closure[class_id]

        for class_id in self.classes:
            walk(class_id, ())
        return closure

    def ancestors_of(self, class_id: str) -> frozenset[str]:
        """Reflexive-transitive ancestors; empty for unknown classes."""
        return self._ancestors.get(class_id, frozenset())

    def is_subclass(self, child: str, parent: str) -> bool:
        """Reflexive-transitive reachability child -> parent.

        Classes unknown to the taxonomy (pending curation) match only
        themselves.
        """
        if child == parent:
            return True
        return parent in self._ancestors.get(child, frozenset())

    def descendants_of(self, class_id: str) -> frozenset[str]:
        return frozenset(
            c for c, ancestors in self._ancestors.items() if class_id in ancestors
        )

    def effective_affiliation(self, class_id: str) -> Affiliation | None:
        """Affiliation of the class or its nearest ancestor carrying one."""
        direct = self.affiliation_of.get(class_id)
        if direct is not None:
            return direct
        found: set[Affiliation] = {
            self.affiliation_of[a]
            for a in self.ancestors_of(class_id)
            if a in self.affiliation_of
        }
        if len(found) == 1:
            return next(iter(found))
        return None

    @staticmethod
    def empty() -> "Taxonomy":
        return Taxonomy(frozenset(), {})


# ---------------------------------------------------------------------------
# Restrictions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrequencyWithin:
    """Request frequency range must lie entirely inside the bound."""

    range: FrequencyRange


@dataclass(frozen=True)
class RequesterIsA:
    """Requester class must be the named class or one of its descendants."""

    class_id: str


@dataclass(frozen=True)
class AffiliationIs:
    affiliation: Affiliation


@dataclass(frozen=True)
class LocationWithinAny:
    """Request point must fall within at least one of the named regions."""

    region_ids: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "region_ids", frozenset(self.region_ids))
        if not self.region_ids:
            raise ValueError("location restriction needs at least one region")


@dataclass(frozen=True)
class ActiveDuring:
    """Request time interval must overlap the window."""

    window: TimeWindow


Restriction = Union[
    FrequencyWithin, RequesterIsA, AffiliationIs, LocationWithinAny, ActiveDuring
]

RESTRICTION_KINDS = (
    FrequencyWithin,
    RequesterIsA,
    AffiliationIs,
    LocationWithinAny,
    ActiveDuring,
)


# ---------------------------------------------------------------------------
# Effects and policies
# ---------------------------------------------------------------------------


class EffectKind(str, Enum):
    PERMIT = "Permit"
    DENY = "Deny"
    PERMIT_WITH_OBLIGATIONS = "PermitWithObligations"


@dataclass(frozen=True)
class Effect:
    kind: EffectKind
    obligation_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "obligation_ids", tuple(self.obligation_ids))
        if self.kind is EffectKind.PERMIT_WITH_OBLIGATIONS and not self.obligation_ids:
            raise ValueError("permit-with-obligations needs at least one obligation")
        if self.kind is not EffectKind.PERMIT_WITH_OBLIGATIONS and self.obligation_ids:
            raise ValueError(f"{self.kind.value} effect cannot carry obligations")

    @property
    def permits(self) -> bool:
        return self.kind in (EffectKind.PERMIT, EffectKind.PERMIT_WITH_OBLIGATIONS)


PERMIT = Effect(EffectKind.PERMIT)
DENY = Effect(EffectKind.DENY)


_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._\-]*$")


@dataclass(frozen=True)
class Policy:
    """One node in the policy hierarchy.

    ``restrictions`` are the rules added at this node; the full rule chain
    is obtained with :func:`effective_restrictions`. A missing precedence
    means the lowest precedence (0). ``obligations`` mirrors the effect's
    obligation ids for permit-with-obligations policies and may carry
    source-sheet obligations otherwise.
    """

    id: str
    parent: str | None = None
    restrictions: tuple[Restriction, ...] = ()
    effect: Effect | None = None
    precedence: int = 0
    obligations: tuple[str, ...] = ()
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not _ID_RE.match(self.id):
            raise ValueError(f"bad policy id {self.id!r}")
        object.__setattr__(self, "restrictions", tuple(self.restrictions))
        object.__setattr__(self, "metadata", dict(self.metadata))
        if self.precedence < 0:
            raise ValueError("precedence must be non-negative")
        obligations = tuple(self.obligations)
        if (
            self.effect is not None
            and self.effect.kind is EffectKind.PERMIT_WITH_OBLIGATIONS
            and not obligations
        ):
            obligations = self.effect.obligation_ids
        object.__setattr__(self, "obligations", obligations)
        seen_kinds: set[type] = set()
        for restriction in self.restrictions:
            kind = type(restriction)
            if kind in seen_kinds:
                raise ValueError(
                    f"policy {self.id}: duplicate {kind.__name__} restriction"
                )
            seen_kinds.add(kind)


def effective_restrictions(
    policy_id: str, policies: Mapping[str, Policy]
) -> list[tuple[str, Restriction]]:
    """The full rule chain for a policy: ancestors' restrictions root-first,
    then the policy's own, each tagged with the contributing policy id."""
    chain = ancestor_chain(policy_id, policies)
    out: list[tuple[str, Restriction]] = []
    for node_id in chain:
        for restriction in policies[node_id].restrictions:
            out.append((node_id, restriction))
    return out


def ancestor_chain(policy_id: str, policies: Mapping[str, Policy]) -> list[str]:
    """Policy ids from the root of the hierarchy down to the policy itself."""
    if policy_id not in policies:
        raise UnknownPolicyError(f"unknown policy {policy_id!r}")
    chain: list[str] = []
    seen: set[str] = set()
    cursor: str | None = policy_id
    while cursor is not None:
        if cursor in seen:
            raise PolicyCycleError(f"parent cycle through {cursor!r}")
        if cursor not in policies:
            raise UnknownPolicyError(
                f"policy {policy_id!r} references missing ancestor {cursor!r}"
            )
        seen.add(cursor)
        chain.append(cursor)
        cursor = policies[cursor].parent
    chain.reverse()
    return chain


# ---------------------------------------------------------------------------
# Requests and evaluation results
# ---------------------------------------------------------------------------

TRANSMISSION = "Transmission"


@dataclass(frozen=True)
class SpectrumRequest:
    """One spectrum access request: who wants to transmit where, on what
    frequencies, and when."""

    id: str
    requester_class: str
    location: GeoPoint
    frequency: FrequencyRange
    time: TimeWindow
    affiliation: Affiliation | None = None
    action: str = TRANSMISSION

    def __post_init__(self) -> None:
        if self.action != TRANSMISSION:
            raise ValueError(f"unsupported action {self.action!r}")


@dataclass(frozen=True)
class Reason:
    """One human-readable justification line in an evaluation result.

    ``policy_id``/``restriction`` are None only for the catch-all
    "no applicable permitting policy exists" reason.
    """

    policy_id: str | None
    restriction: Restriction | None
    satisfied: bool
    text: str


@dataclass(frozen=True)
class EvaluationResult:
    request_id: str
    effect: Effect
    default_deny: bool
    triggering_policy: str | None
    applicable_policies: tuple[str, ...]
    obligations: tuple[str, ...]
    reasons: tuple[Reason, ...]
    conflict: bool


# ---------------------------------------------------------------------------
# Restriction satisfaction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalContext:
    """Per-request evaluation context: the taxonomy and the precomputed set
    of regions containing the request's point."""

    taxonomy: Taxonomy
    within_regions: frozenset[str]


def satisfies(
    request: SpectrumRequest, restriction: Restriction, ctx: EvalContext
) -> bool:
    """Whether the request satisfies one atomic restriction.

    Pure function; all bounds are inclusive. A requester class unknown to
    the taxonomy (pending curation) satisfies RequesterIsA only under exact
    class match. A request with no resolvable affiliation fails
    AffiliationIs (fail closed).
    """
    if isinstance(restriction, FrequencyWithin):
        return restriction.range.contains(request.frequency)
    if isinstance(restriction, RequesterIsA):
        return ctx.taxonomy.is_subclass(request.requester_class, restriction.class_id)
    if isinstance(restriction, AffiliationIs):
        affiliation = request.affiliation
        if affiliation is None:
            affiliation = ctx.taxonomy.effective_affiliation(request.requester_class)
        return affiliation == restriction.affiliation
    if isinstance(restriction, LocationWithinAny):
        return bool(ctx.within_regions & restriction.region_ids)
    if isinstance(restriction, ActiveDuring):
        return restriction.window.overlaps(request.time)
    raise TypeError(f"unknown restriction {restriction!r}")


def iter_policies_in_order(policies: Mapping[str, Policy]) -> Iterator[Policy]:
    """Deterministic traversal order: by id."""
    for policy_id in sorted(policies):
        yield policies[policy_id]
