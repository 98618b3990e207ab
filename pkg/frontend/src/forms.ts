// Policy Builder form state: validation mirrors the service's constraints
// (a frequency rule needs BOTH bounds, location rules need at least one
// region, permit-with-obligations needs at least one obligation id), and
// the PolicyJson conversion round-trips through the detail view.

import type { EffectToken, PolicyJson, RestrictionJson } from "./types.js";

export type RestrictionKind = RestrictionJson["kind"];

export interface RestrictionRow {
  kind: RestrictionKind;
  freqMin: string;
  freqMax: string;
  freqUnit: "MHz" | "GHz";
  classId: string;
  affiliation: "Federal" | "NonFederal";
  regionIds: string[];
  start: string;
  end: string;
}

export interface PolicyFormState {
  id: string;
  parent: string;
  rows: RestrictionRow[];
  effect: "" | EffectToken;
  obligations: string;
  precedence: string;
  metadata: { key: string; value: string }[];
}

export function emptyRow(kind: RestrictionKind = "frequency-within"): RestrictionRow {
  return {
    kind,
    freqMin: "",
    freqMax: "",
    freqUnit: "MHz",
    classId: "",
    affiliation: "Federal",
    regionIds: [],
    start: "",
    end: "",
  };
}

export function emptyForm(): PolicyFormState {
  return {
    id: "",
    parent: "",
    rows: [],
    effect: "",
    obligations: "",
    precedence: "0",
    metadata: [],
  };
}

const ID_PATTERN = /^[A-Za-z0-9][A-Za-z0-9._-]*$/;
const INSTANT_PATTERN = /^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}(:\d{2})?(\.\d+)?(Z|[+-]\d{2}:\d{2})$/;

export interface FieldError {
  field: string;
  message: string;
}

export function validateForm(form: PolicyFormState): FieldError[] {
  const errors: FieldError[] = [];
  if (!ID_PATTERN.test(form.id)) {
    errors.push({ field: "id", message: "policy id is required (letters, digits, . _ -)" });
  }
  if (form.parent && !ID_PATTERN.test(form.parent)) {
    errors.push({ field: "parent", message: "parent id is malformed" });
  }
  const seen = new Set<RestrictionKind>();
  form.rows.forEach((row, index) => {
    const at = `rows[${index}]`;
    if (seen.has(row.kind)) {
      errors.push({ field: at, message: `duplicate ${row.kind} rule` });
    }
    seen.add(row.kind);
    switch (row.kind) {
      case "frequency-within": {
        // Both lower and upper bounds are required to submit a frequency rule.
        if (!row.freqMin.trim() || !row.freqMax.trim()) {
          errors.push({
            field: at,
            message: "frequency rule needs both lower and upper bounds",
          });
        } else if (
          isNaN(Number(row.freqMin)) ||
          isNaN(Number(row.freqMax)) ||
          Number(row.freqMin) <= 0 ||
          Number(row.freqMax) <= 0
        ) {
          errors.push({ field: at, message: "frequency bounds must be positive numbers" });
        } else if (Number(row.freqMin) > Number(row.freqMax)) {
          errors.push({ field: at, message: "lower bound exceeds upper bound" });
        }
        break;
      }
      case "requester-isa":
        if (!row.classId.trim()) {
          errors.push({ field: at, message: "requester rule needs a class" });
        }
        break;
      case "location-within-any":
        if (row.regionIds.length === 0) {
          errors.push({ field: at, message: "location rule needs at least one region" });
        }
        break;
      case "active-during":
        if (!INSTANT_PATTERN.test(row.start) || !INSTANT_PATTERN.test(row.end)) {
          errors.push({
            field: at,
            message: "time rule needs ISO 8601 start and end instants",
          });
        } else if (row.start > row.end) {
          errors.push({ field: at, message: "window start is after its end" });
        }
        break;
      case "affiliation-is":
        break;
    }
  });
  const obligations = splitObligations(form.obligations);
  if (form.effect === "permit-with-obligations" && obligations.length === 0) {
    errors.push({
      field: "obligations",
      message: "permit-with-obligations needs at least one obligation id",
    });
  }
  if (form.precedence.trim() !== "" && !/^\d+$/.test(form.precedence.trim())) {
    errors.push({ field: "precedence", message: "precedence must be a non-negative integer" });
  }
  return errors;
}

function splitObligations(text: string): string[] {
  return text
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
}

export function rowToRestriction(row: RestrictionRow): RestrictionJson {
  switch (row.kind) {
    case "frequency-within":
      return {
        kind: "frequency-within",
        min: row.freqMin.trim(),
        max: row.freqMax.trim(),
        unit: row.freqUnit,
      };
    case "requester-isa":
      return { kind: "requester-isa", class_id: row.classId.trim() };
    case "affiliation-is":
      return { kind: "affiliation-is", affiliation: row.affiliation };
    case "location-within-any":
      return { kind: "location-within-any", region_ids: [...row.regionIds].sort() };
    case "active-during":
      return { kind: "active-during", start: row.start.trim(), end: row.end.trim() };
  }
}

export function restrictionToRow(restriction: RestrictionJson): RestrictionRow {
  const row = emptyRow(restriction.kind);
  switch (restriction.kind) {
    case "frequency-within":
      row.freqMin = restriction.min ?? "";
      row.freqMax = restriction.max ?? "";
      row.freqUnit = restriction.unit === "GHz" ? "GHz" : "MHz";
      break;
    case "requester-isa":
      row.classId = restriction.class_id ?? "";
      break;
    case "affiliation-is":
      row.affiliation = restriction.affiliation === "NonFederal" ? "NonFederal" : "Federal";
      break;
    case "location-within-any":
      row.regionIds = [...(restriction.region_ids ?? [])].sort();
      break;
    case "active-during":
      row.start = restriction.start ?? "";
      row.end = restriction.end ?? "";
      break;
  }
  return row;
}

export function formToPolicy(form: PolicyFormState): PolicyJson {
  const obligations = splitObligations(form.obligations);
  return {
    id: form.id.trim(),
    parent: form.parent.trim() || null,
    restrictions: form.rows.map(rowToRestriction),
    effect: form.effect
      ? {
          kind: form.effect,
          obligation_ids: form.effect === "permit-with-obligations" ? obligations : [],
        }
      : null,
    precedence: form.precedence.trim() === "" ? 0 : parseInt(form.precedence, 10),
    obligations: form.effect === "permit-with-obligations" ? obligations : [],
    metadata: Object.fromEntries(
      form.metadata
        .filter((entry) => entry.key.trim())
        .map((entry) => [entry.key.trim(), entry.value]),
    ),
  };
}

export function policyToForm(policy: PolicyJson): PolicyFormState {
  return {
    id: policy.id,
    parent: policy.parent ?? "",
    rows: policy.restrictions.map(restrictionToRow),
    effect: policy.effect?.kind ?? "",
    obligations: (policy.effect?.obligation_ids ?? []).join(", "),
    precedence: String(policy.precedence),
    metadata: Object.entries(policy.metadata).map(([key, value]) => ({ key, value })),
  };
}

// Pre-populate the builder for "reuse rules": the opened policy becomes
// the parent and its own rules are left behind (they are inherited).
export function reuseAsLocalPolicy(parent: PolicyJson): PolicyFormState {
  const form = emptyForm();
  form.parent = parent.id;
  form.id = `${parent.id}-Local`;
  return form;
}
