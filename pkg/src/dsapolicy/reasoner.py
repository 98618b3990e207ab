"""Policy classification, realization, and effect decision.

Classification computes the subsumption relation between policies from
their effective restriction chains; realization computes which policies a
concrete request satisfies; the decision step picks the highest-precedence
applicable effect, defaulting to Deny when no applicable policy carries
one. Everything here is pure against an immutable snapshot.
"""

from __future__ import annotations

import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

from .geo import infer_within
from .model import (
    ActiveDuring,
    AffiliationIs,
    DENY,
    Effect,
    EvalContext,
    EvaluationResult,
    FrequencyWithin,
    LocationWithinAny,
    PolicyError,
    Reason,
    RequesterIsA,
    Restriction,
    SpectrumRequest,
    Taxonomy,
    satisfies,
)
from .store import StoreSnapshot


class UnknownRequesterClassError(PolicyError):
    """The request's class resolves neither in the taxonomy nor among
    pending policy terms."""


def implies(a: Restriction, b: Restriction, taxonomy: Taxonomy) -> bool:
    """Whether satisfying restriction ``a`` always satisfies ``b``.

    Cross-kind comparisons are false; same-kind comparisons reduce to
    containment (frequency, time, location sets) or taxonomy reachability
    (requester classes).
    """
    if type(a) is not type(b):
        return False
    if isinstance(a, FrequencyWithin) and isinstance(b, FrequencyWithin):
        return b.range.contains(a.range)
    if isinstance(a, RequesterIsA) and isinstance(b, RequesterIsA):
        return taxonomy.is_subclass(a.class_id, b.class_id)
    if isinstance(a, AffiliationIs) and isinstance(b, AffiliationIs):
        return a.affiliation == b.affiliation
    if isinstance(a, LocationWithinAny) and isinstance(b, LocationWithinAny):
        return a.region_ids <= b.region_ids
    if isinstance(a, ActiveDuring) and isinstance(b, ActiveDuring):
        return b.window.contains(a.window)
    raise TypeError(f"unknown restriction {a!r}")


@dataclass(frozen=True)
class ClassificationResult:
    """Reflexive-transitive subsumption over policy ids plus, per policy,
    the subsumed descendants whose effect permits."""

    subsumption: frozenset[tuple[str, str]]
    permit_descendants: Mapping[str, frozenset[str]]

    def subsumes(self, specific: str, general: str) -> bool:
        return (specific, general) in self.subsumption

    def subsumees_of(self, policy_id: str) -> frozenset[str]:
        return frozenset(p for p, q in self.subsumption if q == policy_id)


_classification_cache: "weakref.WeakKeyDictionary[StoreSnapshot, ClassificationResult]"
_classification_cache = weakref.WeakKeyDictionary()


def classify(snapshot: StoreSnapshot) -> ClassificationResult:
    """Compute all subsumption relationships between policies.

    P is subsumed by Q when every restriction on Q's effective chain is
    implied by some restriction on P's chain. Declared parent links are
    always included, and the result is closed reflexively and
    transitively. Results are cached per snapshot.
    """
    cached = _classification_cache.get(snapshot)
    if cached is not None:
        return cached

    taxonomy = snapshot.taxonomy
    ids = sorted(snapshot.policies)
    chains = {
        pid: [restriction for _, restriction in snapshot.effective(pid)]
        for pid in ids
    }

    pairs: set[tuple[str, str]] = set()
    for p in ids:
        pairs.add((p, p))
        ancestor = snapshot.policies[p].parent
        while ancestor is not None:
            pairs.add((p, ancestor))
            ancestor = snapshot.policies[ancestor].parent
    for p in ids:
        for q in ids:
            if p == q or (p, q) in pairs:
                continue
            if all(
                any(implies(rp, rq, taxonomy) for rp in chains[p])
                for rq in chains[q]
            ):
                pairs.add((p, q))

    # Transitive closure (the per-kind implication checks are transitive,
    # but declared edges and inferred edges must still be chained).
    above: dict[str, set[str]] = {pid: set() for pid in ids}
    for p, q in pairs:
        above[p].add(q)
    changed = True
    while changed:
        changed = False
        for p in ids:
            extra = set()
            for q in above[p]:
                extra |= above[q] - above[p]
            if extra:
                above[p] |= extra
                changed = True
    closed = frozenset((p, q) for p, qs in above.items() for q in qs)

    permit_descendants: dict[str, frozenset[str]] = {}
    for q in ids:
        permit_descendants[q] = frozenset(
            p
            for p in ids
            if (p, q) in closed
            and snapshot.policies[p].effect is not None
            and snapshot.policies[p].effect.permits
        )

    result = ClassificationResult(
        subsumption=closed, permit_descendants=permit_descendants
    )
    _classification_cache[snapshot] = result
    return result


def realize(
    request: SpectrumRequest,
    snapshot: StoreSnapshot,
    within_regions: frozenset[str],
) -> frozenset[str]:
    """Exactly the policies whose full effective restriction chain the
    request satisfies (policy applicability)."""
    ctx = EvalContext(taxonomy=snapshot.taxonomy, within_regions=within_regions)
    applicable = set()
    for policy_id in snapshot.policies:
        if all(
            satisfies(request, restriction, ctx)
            for _, restriction in snapshot.effective(policy_id)
        ):
            applicable.add(policy_id)
    return frozenset(applicable)


@dataclass(frozen=True)
class Decision:
    effect: Effect
    triggering_policy: str | None
    obligations: tuple[str, ...]
    conflict: bool
    default_deny: bool


def decide(applicable: Iterable[str], snapshot: StoreSnapshot) -> Decision:
    """Pick the winning effect among applicable policies.

    The highest-precedence policy carrying an effect wins; policies with
    no effect are inert. With no effectful applicable policy the decision
    is the default Deny. When Deny and Permit tie at the top precedence,
    Deny wins and the conflict flag is raised; ties within the same camp
    resolve to the lexicographically smallest policy id.
    """
    effectful = [
        snapshot.policies[pid]
        for pid in sorted(applicable)
        if snapshot.policies[pid].effect is not None
    ]
    if not effectful:
        return Decision(
            effect=DENY,
            triggering_policy=None,
            obligations=(),
            conflict=False,
            default_deny=True,
        )
    top = max(p.precedence for p in effectful)
    winners = [p for p in effectful if p.precedence == top]
    denies = [p for p in winners if not p.effect.permits]
    permits = [p for p in winners if p.effect.permits]
    conflict = bool(denies and permits)
    pool = denies if denies else permits
    trigger = min(pool, key=lambda p: p.id)
    obligations = tuple(
        dict.fromkeys(trigger.effect.obligation_ids + trigger.obligations)
    )
    return Decision(
        effect=trigger.effect,
        triggering_policy=trigger.id,
        obligations=obligations,
        conflict=conflict,
        default_deny=False,
    )


@dataclass(frozen=True)
class RequestError:
    """Per-item failure in a batch; the batch itself always completes."""

    request_id: str | None
    code: str
    message: str


BatchItem = Union[EvaluationResult, RequestError]


def _resolvable(request: SpectrumRequest, snapshot: StoreSnapshot) -> bool:
    return (
        request.requester_class in snapshot.taxonomy.classes
        or request.requester_class in snapshot.pending_terms
    )


def evaluate(request: SpectrumRequest, snapshot: StoreSnapshot) -> EvaluationResult:
    """Run the full pipeline for one request: geographic inference,
    realization, precedence decision, and explanation."""
    from .explain import explain_default_deny, explain_explicit

    if not _resolvable(request, snapshot):
        raise UnknownRequesterClassError(
            f"requester class {request.requester_class!r} is neither in the "
            "taxonomy nor a pending policy term"
        )
    within = infer_within(request.location, snapshot.regions)
    ctx = EvalContext(taxonomy=snapshot.taxonomy, within_regions=within)
    applicable = realize(request, snapshot, within)
    decision = decide(applicable, snapshot)
    if decision.default_deny:
        reasons = explain_default_deny(
            request, applicable, classify(snapshot), snapshot, ctx
        )
    else:
        reasons = explain_explicit(
            request, decision.triggering_policy, snapshot, ctx
        )
    return EvaluationResult(
        request_id=request.id,
        effect=decision.effect,
        default_deny=decision.default_deny,
        triggering_policy=decision.triggering_policy,
        applicable_policies=tuple(sorted(applicable)),
        obligations=decision.obligations,
        reasons=tuple(reasons),
        conflict=decision.conflict,
    )


def _evaluate_item(request: SpectrumRequest, snapshot: StoreSnapshot) -> BatchItem:
    try:
        return evaluate(request, snapshot)
    except UnknownRequesterClassError as exc:
        return RequestError(request.id, "unresolvable", str(exc))
    except PolicyError as exc:
        return RequestError(request.id, "evaluation_failed", str(exc))


def evaluate_batch(
    requests: Sequence[SpectrumRequest],
    snapshot: StoreSnapshot,
    workers: int | None = None,
) -> list[BatchItem]:
    """Evaluate a batch against one pinned snapshot.

    Output order matches input order, per-request failures become
    RequestError items, and fanning out across workers is observationally
    identical to sequential evaluation.
    """
    classify(snapshot)  # warm the shared classification before fan-out
    if workers is None or workers <= 1 or len(requests) <= 1:
        return [_evaluate_item(r, snapshot) for r in requests]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: _evaluate_item(r, snapshot), requests))
