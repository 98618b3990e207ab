"""HTTP service: policy administration, facet browsing, request evaluation,
and taxonomy/region lookups.

Every non-success response carries exactly one error object
``{"error": {"code", "message", "detail"?}}``. Mutating calls require an
``X-Actor`` header, recorded in provenance. Evaluation pins the snapshot
current at the start of the call; mutations never affect in-flight
evaluations.
"""

from __future__ import annotations

import re
from typing import Any

from fastapi import FastAPI, Header, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .dsl import ParseError, PolicyDocument, parse_policy_doc, render_restriction
from .model import FrequencyRange, frequency_hz
from .reasoner import UnknownRequesterClassError, evaluate, evaluate_batch
from .store import (
    ChildrenPresentError,
    DuplicatePolicyError,
    FacetFilterError,
    IntegrityError,
    PolicyStore,
    StoreSnapshot,
    UnknownPolicyError,
    facet_query,
)
from .wire import (
    WireError,
    batch_item_to_json,
    effect_kind_from_token,
    policy_from_json,
    policy_to_json,
    request_from_json,
    result_to_json,
)

DEFAULT_BATCH_CAP = 1000


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: Any = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail

    def response(self) -> JSONResponse:
        body: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.detail is not None:
            body["detail"] = self.detail
        return JSONResponse(status_code=self.status, content={"error": body})


_FREQ_PARAM_RE = re.compile(
    r"^\s*(?P<lo>\d+(?:\.\d+)?)\s*(?:-\s*(?P<hi>\d+(?:\.\d+)?)\s*)?(?P<unit>MHz|GHz)?\s*$",
    re.IGNORECASE,
)


def parse_frequency_param(text: str) -> FrequencyRange:
    """Parse a facet frequency filter like ``1760MHz`` or ``1755-1780MHz``."""
    match = _FREQ_PARAM_RE.match(text)
    if match is None:
        raise ApiError(400, "bad_request", f"bad frequency filter {text!r}")
    unit = match.group("unit") or "MHz"
    unit = "GHz" if unit.lower() == "ghz" else "MHz"
    lo = frequency_hz(match.group("lo"), unit)
    hi = frequency_hz(match.group("hi"), unit) if match.group("hi") else lo
    try:
        return FrequencyRange(lo, hi)
    except ValueError as exc:
        raise ApiError(400, "bad_request", str(exc)) from exc


def _require_actor(actor: str | None) -> str:
    if not actor or not actor.strip():
        raise ApiError(
            400, "missing_actor", "mutations require an X-Actor header"
        )
    return actor.strip()


def _policy_summary(snapshot: StoreSnapshot, policy_id: str) -> dict[str, Any]:
    policy = snapshot.policies[policy_id]
    return {
        "id": policy.id,
        "parent": policy.parent,
        "effect": policy.effect.kind.value if policy.effect else None,
        "precedence": policy.precedence,
        "restriction_count": len(policy.restrictions),
        "pending_terms": sorted(
            r.class_id
            for r in policy.restrictions
            if hasattr(r, "class_id") and r.class_id in snapshot.pending_terms
        ),
    }


def _doc_from_body(body: Any, snapshot: StoreSnapshot) -> PolicyDocument:
    if not isinstance(body, dict):
        raise ApiError(400, "bad_request", "body must be a JSON object")
    if "dsl" in body:
        try:
            return parse_policy_doc(str(body["dsl"]), snapshot.regions)
        except ParseError as exc:
            raise ApiError(
                400,
                "parse_error",
                exc.message,
                detail={"line": exc.line, "column": exc.column},
            ) from exc
    if "policies" in body:
        doc = PolicyDocument()
        if not isinstance(body["policies"], list):
            raise ApiError(400, "bad_request", "'policies' must be a list")
        try:
            for obj in body["policies"]:
                doc.policies.append(policy_from_json(obj))
        except WireError as exc:
            raise ApiError(
                400, "bad_request", exc.reason, detail={"field": exc.field}
            ) from exc
        return doc
    raise ApiError(400, "bad_request", "body needs 'dsl' or 'policies'")


def create_app(
    store: PolicyStore,
    batch_cap: int = DEFAULT_BATCH_CAP,
    workers: int | None = None,
) -> FastAPI:
    app = FastAPI(title="dsapolicy", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError) -> JSONResponse:
        return exc.response()

    @app.exception_handler(RequestValidationError)
    async def validation_handler(
        _request: Request, exc: RequestValidationError
    ) -> JSONResponse:
        return ApiError(400, "bad_request", "malformed request body").response()

    # -- evaluation ---------------------------------------------------------

    @app.post("/evaluate")
    def evaluate_endpoint(body: dict) -> dict:
        snapshot = store.snapshot
        try:
            request = request_from_json(body)
        except WireError as exc:
            raise ApiError(
                400, "bad_request", exc.reason, detail={"field": exc.field}
            ) from exc
        try:
            result = evaluate(request, snapshot)
        except UnknownRequesterClassError as exc:
            raise ApiError(422, "unresolvable", str(exc)) from exc
        return {"version": snapshot.version, "result": result_to_json(result)}

    @app.post("/evaluate/batch")
    def evaluate_batch_endpoint(body: dict) -> dict:
        snapshot = store.snapshot
        requests_json = body.get("requests")
        if not isinstance(requests_json, list):
            raise ApiError(400, "bad_request", "'requests' must be a list")
        if len(requests_json) > batch_cap:
            raise ApiError(
                400,
                "batch_too_large",
                f"batch of {len(requests_json)} exceeds cap {batch_cap}",
            )
        parsed: list = []
        failures: dict[int, dict] = {}
        for index, item in enumerate(requests_json):
            try:
                parsed.append((index, request_from_json(item)))
            except WireError as exc:
                failures[index] = {
                    "request_id": item.get("id") if isinstance(item, dict) else None,
                    "error": {
                        "code": "bad_request",
                        "message": exc.reason,
                        "detail": {"field": exc.field},
                    },
                }
        outcomes = evaluate_batch([r for _, r in parsed], snapshot, workers=workers)
        items: list[dict | None] = [None] * len(requests_json)
        for (index, _), outcome in zip(parsed, outcomes):
            items[index] = batch_item_to_json(outcome)
        for index, failure in failures.items():
            items[index] = failure
        return {"version": snapshot.version, "results": items}

    # -- policy administration ----------------------------------------------

    @app.get("/policies")
    def list_policies() -> dict:
        snapshot = store.snapshot
        return {
            "version": snapshot.version,
            "policies": [
                _policy_summary(snapshot, pid) for pid in sorted(snapshot.policies)
            ],
        }

    @app.post("/policies", status_code=201)
    def add_policies(body: dict, x_actor: str | None = Header(default=None)) -> dict:
        actor = _require_actor(x_actor)
        doc = _doc_from_body(body, store.snapshot)
        try:
            version = store.add_policies(doc, actor=actor)
        except DuplicatePolicyError as exc:
            raise ApiError(409, "duplicate", str(exc)) from exc
        except IntegrityError as exc:
            raise ApiError(409, "integrity", str(exc)) from exc
        return {"version": version, "added": sorted(doc.policy_ids)}

    @app.get("/policies/facets")
    def facets(
        region: str | None = Query(default=None),
        requester: str | None = Query(default=None, alias="class"),
        freq: str | None = Query(default=None),
        effect: str | None = Query(default=None),
    ) -> dict:
        snapshot = store.snapshot
        region_ids = (
            [token.strip() for token in region.split(",") if token.strip()]
            if region
            else None
        )
        frequency = parse_frequency_param(freq) if freq else None
        effect_kind = None
        if effect:
            try:
                effect_kind = effect_kind_from_token(effect)
            except WireError as exc:
                raise ApiError(400, "bad_request", exc.reason) from exc
        try:
            matches = facet_query(
                snapshot,
                region_ids=region_ids,
                requester_class=requester,
                frequency=frequency,
                effect=effect_kind,
            )
        except FacetFilterError as exc:
            raise ApiError(422, "unresolvable", str(exc)) from exc
        return {
            "version": snapshot.version,
            "matches": [
                {"policy_id": m.policy_id, "matched_facets": list(m.matched_facets)}
                for m in matches
            ],
        }

    @app.get("/policies/{policy_id}")
    def get_policy(policy_id: str) -> dict:
        snapshot = store.snapshot
        if policy_id not in snapshot.policies:
            raise ApiError(404, "not_found", f"unknown policy {policy_id!r}")
        return {
            "version": snapshot.version,
            "policy": policy_to_json(snapshot.policies[policy_id]),
        }

    @app.put("/policies/{policy_id}")
    def revise_policy(
        policy_id: str, body: dict, x_actor: str | None = Header(default=None)
    ) -> dict:
        actor = _require_actor(x_actor)
        snapshot = store.snapshot
        if "policy" in body:
            try:
                new_body = policy_from_json(body["policy"])
            except WireError as exc:
                raise ApiError(
                    400, "bad_request", exc.reason, detail={"field": exc.field}
                ) from exc
        else:
            doc = _doc_from_body(body, snapshot)
            if len(doc.policies) != 1:
                raise ApiError(
                    400, "bad_request", "revision body must contain exactly one policy"
                )
            new_body = doc.policies[0]
        if new_body.id != policy_id:
            raise ApiError(
                400,
                "bad_request",
                f"body policy id {new_body.id!r} does not match {policy_id!r}",
            )
        try:
            version = store.revise_policy(policy_id, new_body, actor=actor)
        except UnknownPolicyError as exc:
            raise ApiError(404, "not_found", str(exc)) from exc
        except IntegrityError as exc:
            raise ApiError(409, "integrity", str(exc)) from exc
        return {"version": version}

    @app.delete("/policies/{policy_id}")
    def delete_policy(
        policy_id: str,
        cascade: bool = Query(default=False),
        x_actor: str | None = Header(default=None),
    ) -> dict:
        actor = _require_actor(x_actor)
        before = store.snapshot
        if policy_id not in before.policies:
            raise ApiError(404, "not_found", f"unknown policy {policy_id!r}")
        doomed = sorted(_subtree(before, policy_id)) if cascade else [policy_id]
        try:
            version = store.delete_policy(policy_id, actor=actor, cascade=cascade)
        except ChildrenPresentError as exc:
            raise ApiError(409, "children_present", str(exc)) from exc
        except UnknownPolicyError as exc:
            raise ApiError(404, "not_found", str(exc)) from exc
        return {"version": version, "deleted": doomed}

    # -- lookups --------------------------------------------------------------

    @app.get("/taxonomy")
    def taxonomy() -> dict:
        snapshot = store.snapshot
        t = snapshot.taxonomy
        return {
            "classes": [
                {
                    "id": class_id,
                    "parents": list(t.parents.get(class_id, ())),
                    "affiliation": (
                        t.affiliation_of[class_id].value
                        if class_id in t.affiliation_of
                        else None
                    ),
                }
                for class_id in sorted(t.classes)
            ],
            "pending_terms": sorted(snapshot.pending_terms),
        }

    @app.get("/regions")
    def regions() -> dict:
        snapshot = store.snapshot
        return {
            "regions": [
                _region_json(snapshot, region_id)
                for region_id in sorted(snapshot.regions.regions)
            ]
        }

    @app.get("/policies/{policy_id}/provenance")
    def provenance(policy_id: str) -> dict:
        if policy_id not in store.snapshot.policies and not store.provenance_of(
            policy_id
        ):
            raise ApiError(404, "not_found", f"unknown policy {policy_id!r}")
        return {
            "records": [
                {
                    "assertion_id": r.assertion_id,
                    "policy_id": r.policy_id,
                    "action": r.action.value,
                    "actor": r.actor,
                    "timestamp": r.timestamp.isoformat().replace("+00:00", "Z"),
                    "source_note": r.source_note,
                }
                for r in store.provenance_of(policy_id)
            ]
        }

    @app.get("/policies/{policy_id}/detail")
    def detail(policy_id: str) -> dict:
        snapshot = store.snapshot
        if policy_id not in snapshot.policies:
            raise ApiError(404, "not_found", f"unknown policy {policy_id!r}")
        policy = snapshot.policies[policy_id]
        chain = snapshot.effective(policy_id)
        region_ids = sorted(
            {
                region_id
                for _, restriction in chain
                if hasattr(restriction, "region_ids")
                for region_id in restriction.region_ids
            }
        )
        return {
            "version": snapshot.version,
            "policy": policy_to_json(policy),
            "chain": [
                {
                    "policy_id": pid,
                    "clause": render_restriction(restriction),
                }
                for pid, restriction in chain
            ],
            "effect": policy.effect.kind.value if policy.effect else None,
            "precedence": policy.precedence,
            "regions": [_region_json(snapshot, rid) for rid in region_ids],
        }

    return app


def _subtree(snapshot: StoreSnapshot, policy_id: str) -> set[str]:
    doomed = {policy_id}
    grew = True
    while grew:
        grew = False
        for pid, policy in snapshot.policies.items():
            if policy.parent in doomed and pid not in doomed:
                doomed.add(pid)
                grew = True
    return doomed


def _region_json(snapshot: StoreSnapshot, region_id: str) -> dict[str, Any]:
    region = snapshot.regions.regions[region_id]
    return {
        "id": region.id,
        "name": region.name,
        "polygons": [
            [[point.longitude, point.latitude] for point in ring]
            for ring in region.polygons
        ],
    }
