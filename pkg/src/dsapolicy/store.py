"""Versioned policy repository with provenance and facet queries.

Persistence is a single append-only log of applied changes (serialized
policy text or tombstones); replaying the log reproduces the live
snapshot exactly, and the log doubles as the per-policy audit trail.
Readers share immutable snapshots; mutations are serialized through one
writer lock and publish a new snapshot atomically.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from .dsl import PolicyDocument, parse_policy_doc, serialize_policy_doc
from .geo import RegionStore
from .model import (
    Affiliation,
    EffectKind,
    FrequencyRange,
    FrequencyWithin,
    LocationWithinAny,
    Policy,
    PolicyError,
    RequesterIsA,
    Taxonomy,
    UnknownPolicyError,
    ancestor_chain,
    effective_restrictions,
    format_instant,
    parse_affiliation,
    parse_instant,
)


class StoreError(PolicyError):
    """Base class for store failures."""


class DuplicatePolicyError(StoreError):
    pass


class IntegrityError(StoreError):
    """Referential integrity violation; nothing was committed."""


class ChildrenPresentError(StoreError):
    """Delete refused because live children exist and cascade is off."""


class ProvenanceAction(str, Enum):
    CREATED = "Created"
    REVISED = "Revised"
    DELETED = "Deleted"


@dataclass(frozen=True)
class ProvenanceRecord:
    assertion_id: int
    policy_id: str
    action: ProvenanceAction
    actor: str
    timestamp: datetime
    source_note: str = ""


@dataclass(frozen=True, eq=False)
class StoreSnapshot:
    """An immutable, referentially consistent view of the store."""

    version: int
    policies: Mapping[str, Policy]
    taxonomy: Taxonomy
    regions: RegionStore
    pending_terms: frozenset[str]
    chains: Mapping[str, tuple] = field(repr=False, default_factory=dict)

    def effective(self, policy_id: str) -> tuple:
        """Effective restriction chain as (policy_id, restriction) pairs."""
        try:
            return self.chains[policy_id]
        except KeyError:
            raise UnknownPolicyError(f"unknown policy {policy_id!r}") from None

    def children_of(self, policy_id: str) -> list[str]:
        return sorted(
            p.id for p in self.policies.values() if p.parent == policy_id
        )

    def depth_of(self, policy_id: str) -> int:
        return len(ancestor_chain(policy_id, self.policies)) - 1


def validate_policies(
    policies: Mapping[str, Policy], taxonomy: Taxonomy, regions: RegionStore
) -> frozenset[str]:
    """Check referential integrity of a policy map.

    Returns the set of pending-curation class ids (referenced by policies
    but absent from the taxonomy). Location references must resolve;
    unknown requester classes are tolerated per the pending-term workflow.
    """
    problems: list[str] = []
    pending: set[str] = set()
    for policy in policies.values():
        if policy.parent is not None and policy.parent not in policies:
            problems.append(
                f"policy {policy.id!r}: unknown parent {policy.parent!r}"
            )
        for restriction in policy.restrictions:
            if isinstance(restriction, LocationWithinAny):
                for region_id in sorted(restriction.region_ids):
                    if region_id not in regions.regions:
                        problems.append(
                            f"policy {policy.id!r}: unknown region {region_id!r}"
                        )
            elif isinstance(restriction, RequesterIsA):
                if restriction.class_id not in taxonomy.classes:
                    pending.add(restriction.class_id)
    if problems:
        raise IntegrityError("; ".join(problems))
    for policy_id in policies:
        ancestor_chain(policy_id, policies)  # raises on cycles
    return frozenset(pending)


def make_snapshot(
    version: int,
    policies: Mapping[str, Policy],
    taxonomy: Taxonomy,
    regions: RegionStore,
) -> StoreSnapshot:
    """Validate and freeze a snapshot, precomputing effective chains."""
    pending = validate_policies(policies, taxonomy, regions)
    frozen = dict(policies)
    chains = {
        policy_id: tuple(effective_restrictions(policy_id, frozen))
        for policy_id in frozen
    }
    return StoreSnapshot(
        version=version,
        policies=frozen,
        taxonomy=taxonomy,
        regions=regions,
        pending_terms=pending,
        chains=chains,
    )


# ---------------------------------------------------------------------------
# Facet queries
# ---------------------------------------------------------------------------


class FacetFilterError(StoreError):
    """A facet filter references an id that does not resolve."""


@dataclass(frozen=True)
class FacetMatch:
    policy_id: str
    matched_facets: tuple[str, ...]


def facet_query(
    snapshot: StoreSnapshot,
    region_ids: Iterable[str] | None = None,
    requester_class: str | None = None,
    frequency: FrequencyRange | None = None,
    effect: EffectKind | None = None,
) -> list[FacetMatch]:
    """Policies whose effective restriction chain matches every given facet.

    Region filters match on location overlap, class filters match a
    RequesterIsA on the class or any ancestor/descendant, frequency
    filters match on range intersection, and the effect filter matches the
    policy's own effect. With no filters, every policy matches.
    """
    taxonomy = snapshot.taxonomy
    resolved_regions: frozenset[str] | None = None
    if region_ids is not None:
        resolved = []
        for token in region_ids:
            region_id = snapshot.regions.resolve(token)
            if region_id is None:
                raise FacetFilterError(f"unknown region {token!r}")
            resolved.append(region_id)
        resolved_regions = frozenset(resolved)
    if requester_class is not None:
        known = requester_class in taxonomy.classes
        referenced = any(
            isinstance(r, RequesterIsA) and r.class_id == requester_class
            for _, r in (pair for chain in snapshot.chains.values() for pair in chain)
        )
        if not known and not referenced:
            raise FacetFilterError(f"unknown requester class {requester_class!r}")

    matches: list[FacetMatch] = []
    for policy_id in sorted(snapshot.policies):
        chain = snapshot.effective(policy_id)
        matched: list[str] = []
        if resolved_regions is not None:
            hit = any(
                isinstance(r, LocationWithinAny) and (r.region_ids & resolved_regions)
                for _, r in chain
            )
            if not hit:
                continue
            matched.append("region")
        if requester_class is not None:
            hit = any(
                isinstance(r, RequesterIsA)
                and (
                    r.class_id == requester_class
                    or taxonomy.is_subclass(requester_class, r.class_id)
                    or taxonomy.is_subclass(r.class_id, requester_class)
                )
                for _, r in chain
            )
            if not hit:
                continue
            matched.append("class")
        if frequency is not None:
            hit = any(
                isinstance(r, FrequencyWithin) and r.range.overlaps(frequency)
                for _, r in chain
            )
            if not hit:
                continue
            matched.append("frequency")
        if effect is not None:
            policy = snapshot.policies[policy_id]
            if policy.effect is None or policy.effect.kind is not effect:
                continue
            matched.append("effect")
        matches.append(FacetMatch(policy_id, tuple(matched)))
    return matches


# ---------------------------------------------------------------------------
# The store
# ---------------------------------------------------------------------------

Clock = Callable[[], datetime]


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class PolicyStore:
    """Append-log backed policy repository.

    All mutations go through a single writer lock, bump the version, and
    append one log record; concurrent readers pin whatever snapshot they
    grabbed and are never affected by later mutations.
    """

    def __init__(
        self,
        taxonomy: Taxonomy,
        regions: RegionStore,
        path: str | Path | None = None,
        clock: Clock = _utc_now,
    ):
        self._lock = threading.Lock()
        self._clock = clock
        self._path = Path(path) if path is not None else None
        self._provenance: list[ProvenanceRecord] = []
        self._last_timestamp: datetime | None = None
        self._snapshot = make_snapshot(0, {}, taxonomy, regions)
        if self._path is not None and self._path.exists():
            self._replay(self._path)

    @property
    def snapshot(self) -> StoreSnapshot:
        return self._snapshot

    @property
    def version(self) -> int:
        return self._snapshot.version

    # -- mutations ---------------------------------------------------------

    def add_policies(
        self, doc: PolicyDocument, actor: str, note: str = ""
    ) -> int:
        """Add all policies of the document atomically; returns the new
        version (unchanged for an empty document)."""
        with self._lock:
            if not doc.policies:
                return self._snapshot.version
            current = self._snapshot.policies
            duplicates = sorted(doc.policy_ids & set(current))
            if duplicates:
                raise DuplicatePolicyError(
                    f"policy ids already exist: {', '.join(duplicates)}"
                )
            candidate = dict(current)
            candidate.update({p.id: p for p in doc.policies})
            snapshot = make_snapshot(
                self._snapshot.version + 1,
                candidate,
                self._snapshot.taxonomy,
                self._snapshot.regions,
            )
            timestamp = self._stamp()
            self._append_record(
                {
                    "version": snapshot.version,
                    "actor": actor,
                    "timestamp": format_instant(timestamp),
                    "dsl_text": serialize_policy_doc(doc.policies),
                }
            )
            for policy in doc.policies:
                self._record_provenance(
                    policy.id, ProvenanceAction.CREATED, actor, timestamp, note
                )
            self._snapshot = snapshot
            return snapshot.version

    def revise_policy(
        self, policy_id: str, new_body: Policy, actor: str, note: str = ""
    ) -> int:
        with self._lock:
            if policy_id not in self._snapshot.policies:
                raise UnknownPolicyError(f"unknown policy {policy_id!r}")
            if new_body.id != policy_id:
                raise StoreError(
                    f"revision body id {new_body.id!r} does not match {policy_id!r}"
                )
            candidate = dict(self._snapshot.policies)
            candidate[policy_id] = new_body
            snapshot = make_snapshot(
                self._snapshot.version + 1,
                candidate,
                self._snapshot.taxonomy,
                self._snapshot.regions,
            )
            timestamp = self._stamp()
            self._append_record(
                {
                    "version": snapshot.version,
                    "actor": actor,
                    "timestamp": format_instant(timestamp),
                    "dsl_text": serialize_policy_doc([new_body]),
                }
            )
            self._record_provenance(
                policy_id, ProvenanceAction.REVISED, actor, timestamp, note
            )
            self._snapshot = snapshot
            return snapshot.version

    def delete_policy(
        self, policy_id: str, actor: str, cascade: bool = False, note: str = ""
    ) -> int:
        with self._lock:
            if policy_id not in self._snapshot.policies:
                raise UnknownPolicyError(f"unknown policy {policy_id!r}")
            children = self._snapshot.children_of(policy_id)
            if children and not cascade:
                raise ChildrenPresentError(
                    f"policy {policy_id!r} has children: {', '.join(children)}"
                )
            doomed = self._subtree_ids(policy_id) if cascade else [policy_id]
            candidate = {
                pid: p
                for pid, p in self._snapshot.policies.items()
                if pid not in doomed
            }
            snapshot = make_snapshot(
                self._snapshot.version + 1,
                candidate,
                self._snapshot.taxonomy,
                self._snapshot.regions,
            )
            timestamp = self._stamp()
            self._append_record(
                {
                    "version": snapshot.version,
                    "actor": actor,
                    "timestamp": format_instant(timestamp),
                    "tombstone": doomed,
                }
            )
            for pid in doomed:
                self._record_provenance(
                    pid, ProvenanceAction.DELETED, actor, timestamp, note
                )
            self._snapshot = snapshot
            return snapshot.version

    def _subtree_ids(self, policy_id: str) -> list[str]:
        # Children first so replayed tombstones never orphan anyone.
        out: list[str] = []
        for child in self._snapshot.children_of(policy_id):
            out.extend(self._subtree_ids(child))
        out.append(policy_id)
        return out

    # -- queries -----------------------------------------------------------

    def provenance_of(self, policy_id: str) -> list[ProvenanceRecord]:
        return [r for r in self._provenance if r.policy_id == policy_id]

    @property
    def provenance(self) -> Sequence[ProvenanceRecord]:
        return tuple(self._provenance)

    def canonical_text(self) -> str:
        """Deterministic serialization of the live snapshot (id order)."""
        snapshot = self._snapshot
        ordered = [snapshot.policies[pid] for pid in sorted(snapshot.policies)]
        return serialize_policy_doc(ordered)

    # -- internals ----------------------------------------------------------

    def _stamp(self) -> datetime:
        now = self._clock()
        if self._last_timestamp is not None and now <= self._last_timestamp:
            now = self._last_timestamp + timedelta(microseconds=1)
        self._last_timestamp = now
        return now

    def _record_provenance(
        self,
        policy_id: str,
        action: ProvenanceAction,
        actor: str,
        timestamp: datetime,
        note: str,
    ) -> None:
        self._provenance.append(
            ProvenanceRecord(
                assertion_id=len(self._provenance) + 1,
                policy_id=policy_id,
                action=action,
                actor=actor,
                timestamp=timestamp,
                source_note=note,
            )
        )

    def _append_record(self, record: Mapping[str, Any]) -> None:
        if self._path is None:
            return
        with self._path.open("a") as handle:
            handle.write(json.dumps(record) + "\n")

    def _replay(self, path: Path) -> None:
        for line_no, line in enumerate(path.read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StoreError(f"{path}:{line_no}: corrupt record: {exc}") from exc
            version = record["version"]
            actor = record.get("actor", "")
            timestamp = parse_instant(record["timestamp"])
            self._last_timestamp = timestamp
            policies = dict(self._snapshot.policies)
            if "dsl_text" in record:
                doc = parse_policy_doc(record["dsl_text"])
                for policy in doc.policies:
                    action = (
                        ProvenanceAction.REVISED
                        if policy.id in policies
                        else ProvenanceAction.CREATED
                    )
                    policies[policy.id] = policy
                    self._record_provenance(policy.id, action, actor, timestamp, "")
            elif "tombstone" in record:
                for pid in record["tombstone"]:
                    if pid in policies:
                        del policies[pid]
                        self._record_provenance(
                            pid, ProvenanceAction.DELETED, actor, timestamp, ""
                        )
            else:
                raise StoreError(f"{path}:{line_no}: record has no payload")
            self._snapshot = make_snapshot(
                version,
                policies,
                self._snapshot.taxonomy,
                self._snapshot.regions,
            )


# ---------------------------------------------------------------------------
# Taxonomy file ingestion
# ---------------------------------------------------------------------------


def load_taxonomy_data(data: Any) -> Taxonomy:
    """Build a taxonomy from parsed JSON: a list of
    ``{class_id, parent_ids?, affiliation?}`` entries (optionally wrapped
    in ``{"classes": [...]}``)."""
    if isinstance(data, Mapping):
        data = data.get("classes")
    if not isinstance(data, list):
        raise ValueError("taxonomy file must be a list of class entries")
    classes: set[str] = set()
    edges: dict[str, tuple[str, ...]] = {}
    affiliations: dict[str, Affiliation] = {}
    for entry in data:
        class_id = entry.get("class_id")
        if not class_id:
            raise ValueError("taxonomy entry missing class_id")
        if class_id in classes:
            raise ValueError(f"duplicate taxonomy class {class_id!r}")
        classes.add(class_id)
        parents = tuple(entry.get("parent_ids") or ())
        if parents:
            edges[class_id] = parents
        if entry.get("affiliation"):
            affiliations[class_id] = parse_affiliation(entry["affiliation"])
    return Taxonomy(classes, edges, affiliations)


def load_taxonomy(path: str | Path) -> Taxonomy:
    return load_taxonomy_data(json.loads(Path(path).read_text()))
