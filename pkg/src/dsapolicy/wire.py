"""JSON wire formats for requests, results, and structured policies.

One schema everywhere: the HTTP body, the CLI's request files (JSON lines),
and the web client all use these shapes. Frequency values may be JSON
numbers or strings; both are read as decimal literals and converted to
exact Hz.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from .dsl import render_restriction
from .geo import format_wkt_point, parse_wkt_point
from .model import (
    ActiveDuring,
    Affiliation,
    AffiliationIs,
    Effect,
    EffectKind,
    EvaluationResult,
    FrequencyRange,
    FrequencyWithin,
    LocationWithinAny,
    Policy,
    Reason,
    RequesterIsA,
    Restriction,
    SpectrumRequest,
    TimeWindow,
    TRANSMISSION,
    format_instant,
    frequency_hz,
    hz_to_unit_str,
    parse_affiliation,
    parse_instant,
)
from .reasoner import BatchItem, RequestError


class WireError(ValueError):
    """Malformed payload; ``field`` is the offending JSON path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.reason = message


def _require(obj: Mapping[str, Any], field: str, path: str = "") -> Any:
    if field not in obj or obj[field] in (None, ""):
        raise WireError(f"{path}{field}", "field is required")
    return obj[field]


def request_from_json(obj: Any) -> SpectrumRequest:
    """Parse a spectrum request body, raising WireError with a field path."""
    if not isinstance(obj, Mapping):
        raise WireError("", "request must be a JSON object")
    request_id = str(_require(obj, "id"))
    requester = str(_require(obj, "requester_class"))
    action = obj.get("action", TRANSMISSION)
    if action != TRANSMISSION:
        raise WireError("action", f"unsupported action {action!r}")

    try:
        location = parse_wkt_point(str(_require(obj, "location_wkt")))
    except ValueError as exc:
        raise WireError("location_wkt", str(exc)) from exc

    freq = _require(obj, "frequency")
    if not isinstance(freq, Mapping):
        raise WireError("frequency", "must be an object {min, max, unit}")
    unit = freq.get("unit", "MHz")
    try:
        min_hz = frequency_hz(_require(freq, "min", "frequency."), unit)
        max_hz = (
            frequency_hz(freq["max"], unit) if freq.get("max") is not None else min_hz
        )
    except WireError:
        raise
    except ValueError as exc:
        raise WireError("frequency", str(exc)) from exc
    try:
        frequency = FrequencyRange(min_hz, max_hz)
    except ValueError as exc:
        raise WireError("frequency.min", str(exc)) from exc

    time_obj = _require(obj, "time")
    if not isinstance(time_obj, Mapping):
        raise WireError("time", "must be an object {start, end}")
    try:
        start = parse_instant(str(_require(time_obj, "start", "time.")))
        end = parse_instant(str(_require(time_obj, "end", "time.")))
    except WireError:
        raise
    except ValueError as exc:
        raise WireError("time", str(exc)) from exc
    try:
        window = TimeWindow(start, end)
    except ValueError as exc:
        raise WireError("time.start", str(exc)) from exc

    affiliation = None
    if obj.get("affiliation"):
        try:
            affiliation = parse_affiliation(str(obj["affiliation"]))
        except ValueError as exc:
            raise WireError("affiliation", str(exc)) from exc

    return SpectrumRequest(
        id=request_id,
        requester_class=requester,
        location=location,
        frequency=frequency,
        time=window,
        affiliation=affiliation,
    )


def request_to_json(request: SpectrumRequest) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": request.id,
        "requester_class": request.requester_class,
        "action": request.action,
        "location_wkt": format_wkt_point(request.location),
        "frequency": {
            "min": hz_to_unit_str(request.frequency.min_hz, "MHz"),
            "max": hz_to_unit_str(request.frequency.max_hz, "MHz"),
            "unit": "MHz",
        },
        "time": {
            "start": format_instant(request.time.start),
            "end": format_instant(request.time.end),
        },
    }
    if request.affiliation is not None:
        out["affiliation"] = request.affiliation.value
    return out


def reason_to_json(reason: Reason) -> dict[str, Any]:
    return {
        "policy_id": reason.policy_id,
        "restriction": (
            render_restriction(reason.restriction)
            if reason.restriction is not None
            else None
        ),
        "satisfied": reason.satisfied,
        "text": reason.text,
    }


def result_to_json(result: EvaluationResult) -> dict[str, Any]:
    return {
        "request_id": result.request_id,
        "effect": result.effect.kind.value,
        "default_deny": result.default_deny,
        "triggering_policy": result.triggering_policy,
        "applicable_policies": list(result.applicable_policies),
        "obligations": list(result.obligations),
        "conflict": result.conflict,
        "reasons": [reason_to_json(r) for r in result.reasons],
    }


def batch_item_to_json(item: BatchItem) -> dict[str, Any]:
    if isinstance(item, RequestError):
        return {
            "request_id": item.request_id,
            "error": {"code": item.code, "message": item.message},
        }
    return result_to_json(item)


# ---------------------------------------------------------------------------
# Structured policies
# ---------------------------------------------------------------------------


def restriction_from_json(obj: Any, path: str = "restriction") -> Restriction:
    if not isinstance(obj, Mapping):
        raise WireError(path, "must be an object with a 'kind'")
    kind = obj.get("kind")
    try:
        if kind == "frequency-within":
            unit = obj.get("unit", "MHz")
            lo = frequency_hz(_require(obj, "min", path + "."), unit)
            hi = frequency_hz(_require(obj, "max", path + "."), unit)
            return FrequencyWithin(FrequencyRange(lo, hi))
        if kind == "requester-isa":
            return RequesterIsA(str(_require(obj, "class_id", path + ".")))
        if kind == "affiliation-is":
            return AffiliationIs(
                parse_affiliation(str(_require(obj, "affiliation", path + ".")))
            )
        if kind == "location-within-any":
            ids = _require(obj, "region_ids", path + ".")
            if not isinstance(ids, list) or not ids:
                raise WireError(path + ".region_ids", "must be a non-empty list")
            return LocationWithinAny(frozenset(str(i) for i in ids))
        if kind == "active-during":
            return ActiveDuring(
                TimeWindow(
                    parse_instant(str(_require(obj, "start", path + "."))),
                    parse_instant(str(_require(obj, "end", path + "."))),
                )
            )
    except WireError:
        raise
    except ValueError as exc:
        raise WireError(path, str(exc)) from exc
    raise WireError(path + ".kind", f"unknown restriction kind {kind!r}")


def restriction_to_json(restriction: Restriction) -> dict[str, Any]:
    if isinstance(restriction, FrequencyWithin):
        return {
            "kind": "frequency-within",
            "min": hz_to_unit_str(restriction.range.min_hz, "MHz"),
            "max": hz_to_unit_str(restriction.range.max_hz, "MHz"),
            "unit": "MHz",
        }
    if isinstance(restriction, RequesterIsA):
        return {"kind": "requester-isa", "class_id": restriction.class_id}
    if isinstance(restriction, AffiliationIs):
        return {"kind": "affiliation-is", "affiliation": restriction.affiliation.value}
    if isinstance(restriction, LocationWithinAny):
        return {
            "kind": "location-within-any",
            "region_ids": sorted(restriction.region_ids),
        }
    if isinstance(restriction, ActiveDuring):
        return {
            "kind": "active-during",
            "start": format_instant(restriction.window.start),
            "end": format_instant(restriction.window.end),
        }
    raise TypeError(f"unknown restriction {restriction!r}")


_EFFECT_KINDS = {
    "permit": EffectKind.PERMIT,
    "deny": EffectKind.DENY,
    "permit-with-obligations": EffectKind.PERMIT_WITH_OBLIGATIONS,
}


def effect_kind_from_token(token: str) -> EffectKind:
    kind = _EFFECT_KINDS.get(token.strip().lower())
    if kind is None:
        raise WireError("effect", f"unknown effect {token!r}")
    return kind


def policy_from_json(obj: Any) -> Policy:
    if not isinstance(obj, Mapping):
        raise WireError("policy", "must be a JSON object")
    policy_id = str(_require(obj, "id", "policy."))
    restrictions = tuple(
        restriction_from_json(r, f"policy.restrictions[{i}]")
        for i, r in enumerate(obj.get("restrictions") or ())
    )
    effect = None
    effect_obj = obj.get("effect")
    if effect_obj:
        if not isinstance(effect_obj, Mapping):
            raise WireError("policy.effect", "must be an object with a 'kind'")
        kind = effect_kind_from_token(str(_require(effect_obj, "kind", "policy.effect.")))
        obligations = tuple(str(o) for o in effect_obj.get("obligation_ids") or ())
        try:
            effect = (
                Effect(kind, obligations)
                if kind is EffectKind.PERMIT_WITH_OBLIGATIONS
                else Effect(kind)
            )
        except ValueError as exc:
            raise WireError("policy.effect", str(exc)) from exc
    try:
        return Policy(
            id=policy_id,
            parent=obj.get("parent") or None,
            restrictions=restrictions,
            effect=effect,
            precedence=int(obj.get("precedence") or 0),
            obligations=tuple(str(o) for o in obj.get("obligations") or ()),
            metadata={
                str(k): str(v) for k, v in (obj.get("metadata") or {}).items()
            },
        )
    except ValueError as exc:
        raise WireError("policy", str(exc)) from exc


def policy_to_json(policy: Policy) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": policy.id,
        "parent": policy.parent,
        "restrictions": [restriction_to_json(r) for r in policy.restrictions],
        "effect": None,
        "precedence": policy.precedence,
        "obligations": list(policy.obligations),
        "metadata": dict(policy.metadata),
    }
    if policy.effect is not None:
        kind_token = {
            EffectKind.PERMIT: "permit",
            EffectKind.DENY: "deny",
            EffectKind.PERMIT_WITH_OBLIGATIONS: "permit-with-obligations",
        }[policy.effect.kind]
        out["effect"] = {
            "kind": kind_token,
            "obligation_ids": list(policy.effect.obligation_ids),
        }
    return out


def dump_stable(obj: Any) -> str:
    """Deterministic JSON text (fixed separators, no key reordering needed
    since dicts are built in a fixed order)."""
    return json.dumps(obj, separators=(", ", ": "), ensure_ascii=False)
