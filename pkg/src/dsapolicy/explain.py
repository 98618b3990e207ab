"""Human-readable reasons for evaluation outcomes.

Two heuristics: an explicit trigger is explained by the satisfied rules on
its effective chain; a default deny is explained by walking from the
deepest applicable policies down to their permitting descendants and
reporting every rule the request failed along those paths.
"""

from __future__ import annotations

from typing import Iterable

from .model import (
    ActiveDuring,
    AffiliationIs,
    EvalContext,
    FrequencyWithin,
    LocationWithinAny,
    Reason,
    RequesterIsA,
    Restriction,
    SpectrumRequest,
    hz_to_unit_str,
    satisfies,
)
from .reasoner import ClassificationResult
from .store import StoreSnapshot

NO_PERMIT_PATH_TEXT = "no applicable permitting policy exists"


def _frequency_phrase(restriction: FrequencyWithin) -> str:
    lo = hz_to_unit_str(restriction.range.min_hz, "MHz")
    hi = hz_to_unit_str(restriction.range.max_hz, "MHz")
    if lo == hi:
        return f"{lo} MHz"
    return f"{lo}–{hi} MHz"


def render_reason(policy_id: str, restriction: Restriction, satisfied: bool) -> str:
    """Fixed template per restriction kind and satisfaction polarity."""
    if isinstance(restriction, FrequencyWithin):
        relation = "within" if satisfied else "outside"
        return f"the requested frequency range is {relation} {_frequency_phrase(restriction)}"
    if isinstance(restriction, RequesterIsA):
        verb = "is" if satisfied else "is not"
        return f"the requester {verb} a {restriction.class_id}"
    if isinstance(restriction, AffiliationIs):
        verb = "is" if satisfied else "is not"
        return f"the requester affiliation {verb} {restriction.affiliation.value}"
    if isinstance(restriction, LocationWithinAny):
        if satisfied:
            return "the request is in a permitted location"
        return "the request is not in a permitted location"
    if isinstance(restriction, ActiveDuring):
        if satisfied:
            return "the request is in a prohibited time window"
        return "the request is not in the required time window"
    raise TypeError(f"unknown restriction {restriction!r}")


def _reason(policy_id: str, restriction: Restriction, satisfied: bool) -> Reason:
    return Reason(
        policy_id=policy_id,
        restriction=restriction,
        satisfied=satisfied,
        text=render_reason(policy_id, restriction, satisfied),
    )


def explain_explicit(
    request: SpectrumRequest,
    triggering_policy: str,
    snapshot: StoreSnapshot,
    ctx: EvalContext,
) -> list[Reason]:
    """Reasons for an effect assigned by a specific applicable policy: one
    satisfied rule per entry of its effective chain, in chain order."""
    reasons: list[Reason] = []
    for policy_id, restriction in snapshot.effective(triggering_policy):
        if not satisfies(request, restriction, ctx):
            raise AssertionError(
                f"explain_explicit called for non-applicable policy "
                f"{triggering_policy!r} (failed rule on {policy_id!r})"
            )
        reasons.append(_reason(policy_id, restriction, True))
    return reasons


def _frontier(
    applicable: frozenset[str], classification: ClassificationResult
) -> list[str]:
    """The deepest applicable policies: no other applicable policy lies
    strictly below them in the subsumption order."""
    frontier = []
    for q in sorted(applicable):
        dominated = any(
            p != q
            and classification.subsumes(p, q)
            and not classification.subsumes(q, p)
            for p in applicable
        )
        if not dominated:
            frontier.append(q)
    return frontier


def _failed_own_rules(
    request: SpectrumRequest,
    policy_id: str,
    snapshot: StoreSnapshot,
    ctx: EvalContext,
) -> Iterable[tuple[str, Restriction]]:
    for restriction in snapshot.policies[policy_id].restrictions:
        if not satisfies(request, restriction, ctx):
            yield policy_id, restriction


def explain_default_deny(
    request: SpectrumRequest,
    applicable: frozenset[str],
    classification: ClassificationResult,
    snapshot: StoreSnapshot,
    ctx: EvalContext,
) -> list[Reason]:
    """Reasons for a deny-by-default: the unfulfilled rules on every path
    from the applicable frontier down to a permitting descendant.

    Identical (policy, rule) pairs across branches are deduplicated. When
    no permitting descendant exists anywhere, a single catch-all reason is
    returned.
    """
    failed: dict[tuple[str, int], tuple[str, Restriction]] = {}
    found_permit_path = False

    def collect(policy_id: str) -> None:
        own = snapshot.policies[policy_id].restrictions
        for pid, restriction in _failed_own_rules(request, policy_id, snapshot, ctx):
            failed.setdefault((pid, own.index(restriction)), (pid, restriction))

    for q in _frontier(applicable, classification):
        for d in sorted(classification.permit_descendants.get(q, ())):
            if d == q:
                continue
            found_permit_path = True
            path = [
                r
                for r in snapshot.policies
                if r != q
                and classification.subsumes(d, r)
                and classification.subsumes(r, q)
            ]
            for r in path:
                collect(r)

    if not found_permit_path:
        return [
            Reason(
                policy_id=None,
                restriction=None,
                satisfied=False,
                text=NO_PERMIT_PATH_TEXT,
            )
        ]

    if not failed:
        # The failing rules sit on a declared ancestor outside the
        # subsumption path segment; fall back to the permitting policies'
        # full chains so the deny never goes unexplained.
        for q in _frontier(applicable, classification):
            for d in sorted(classification.permit_descendants.get(q, ())):
                for pid, restriction in snapshot.effective(d):
                    if not satisfies(request, restriction, ctx):
                        own = snapshot.policies[pid].restrictions
                        failed.setdefault(
                            (pid, own.index(restriction)), (pid, restriction)
                        )

    ordered = sorted(
        failed.items(),
        key=lambda item: (snapshot.depth_of(item[0][0]), item[0][0], item[0][1]),
    )
    return [_reason(pid, restriction, False) for _, (pid, restriction) in ordered]
