// Wire types mirroring the policy service's JSON payloads.

export type EffectToken = "permit" | "deny" | "permit-with-obligations";

export interface RestrictionJson {
  kind:
    | "frequency-within"
    | "requester-isa"
    | "affiliation-is"
    | "location-within-any"
    | "active-during";
  min?: string;
  max?: string;
  unit?: string;
  class_id?: string;
  affiliation?: string;
  region_ids?: string[];
  start?: string;
  end?: string;
}

export interface EffectJson {
  kind: EffectToken;
  obligation_ids: string[];
}

export interface PolicyJson {
  id: string;
  parent: string | null;
  restrictions: RestrictionJson[];
  effect: EffectJson | null;
  precedence: number;
  obligations: string[];
  metadata: Record<string, string>;
}

export interface PolicySummary {
  id: string;
  parent: string | null;
  effect: string | null;
  precedence: number;
  restriction_count: number;
  pending_terms: string[];
}

export interface FacetMatch {
  policy_id: string;
  matched_facets: string[];
}

export interface TaxonomyClass {
  id: string;
  parents: string[];
  affiliation: string | null;
}

export interface TaxonomyResponse {
  classes: TaxonomyClass[];
  pending_terms: string[];
}

export interface RegionJson {
  id: string;
  name: string;
  polygons: number[][][];
}

export interface ChainEntry {
  policy_id: string;
  clause: string;
}

export interface PolicyDetailResponse {
  version: number;
  policy: PolicyJson;
  chain: ChainEntry[];
  effect: string | null;
  precedence: number;
  regions: RegionJson[];
}

export interface ProvenanceRecordJson {
  assertion_id: number;
  policy_id: string;
  action: string;
  actor: string;
  timestamp: string;
  source_note: string;
}

export interface RequestJson {
  id: string;
  requester_class: string;
  action: "Transmission";
  location_wkt: string;
  frequency: { min: string; max: string; unit: string };
  time: { start: string; end: string };
  affiliation?: string;
}

export interface ReasonJson {
  policy_id: string | null;
  restriction: string | null;
  satisfied: boolean;
  text: string;
}

export interface EvaluationJson {
  request_id: string;
  effect: string;
  default_deny: boolean;
  triggering_policy: string | null;
  applicable_policies: string[];
  obligations: string[];
  conflict: boolean;
  reasons: ReasonJson[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}
