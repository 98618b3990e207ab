"""Policy decision engine for dynamic radio spectrum access.

Stores machine-readable spectrum policies as a rule hierarchy, evaluates
transmission requests against them (geographic inference, realization,
precedence, explanation), and exposes the result over a CLI and an HTTP
service.
"""

from .model import (
    ActiveDuring,
    Affiliation,
    AffiliationIs,
    Effect,
    EffectKind,
    EvalContext,
    EvaluationResult,
    FrequencyRange,
    FrequencyWithin,
    GeoPoint,
    LocationWithinAny,
    Policy,
    PolicyError,
    Reason,
    Region,
    RequesterIsA,
    Restriction,
    SpectrumRequest,
    Taxonomy,
    TimeWindow,
    effective_restrictions,
    satisfies,
)
from .geo import RegionStore, infer_within, load_regions, parse_wkt_point, point_in_region
from .dsl import (
    ParseError,
    PolicyDocument,
    parse_capture_csv,
    parse_policy_doc,
    serialize_policy_doc,
)
from .store import PolicyStore, StoreSnapshot, facet_query, load_taxonomy, make_snapshot
from .reasoner import classify, decide, evaluate, evaluate_batch, implies, realize
from .explain import explain_default_deny, explain_explicit, render_reason

__version__ = "0.1.0"

__all__ = [
    "ActiveDuring",
    "Affiliation",
    "AffiliationIs",
    "Effect",
    "EffectKind",
    "EvalContext",
    "EvaluationResult",
    "FrequencyRange",
    "FrequencyWithin",
    "GeoPoint",
    "LocationWithinAny",
    "ParseError",
    "Policy",
    "PolicyDocument",
    "PolicyError",
    "PolicyStore",
    "Reason",
    "Region",
    "RegionStore",
    "RequesterIsA",
    "Restriction",
    "SpectrumRequest",
    "StoreSnapshot",
    "Taxonomy",
    "TimeWindow",
    "classify",
    "decide",
    "effective_restrictions",
    "evaluate",
    "evaluate_batch",
    "explain_default_deny",
    "explain_explicit",
    "facet_query",
    "implies",
    "infer_within",
    "load_regions",
    "load_taxonomy",
    "make_snapshot",
    "parse_capture_csv",
    "parse_policy_doc",
    "parse_wkt_point",
    "point_in_region",
    "realize",
    "render_reason",
    "satisfies",
    "serialize_policy_doc",
]
