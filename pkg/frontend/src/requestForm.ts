// Request Builder form state and validation. The WKT check mirrors the
// service grammar so malformed points never reach the wire.

import type { RequestJson } from "./types.js";

export interface RequestFormState {
  id: string;
  requesterClass: string;
  locationWkt: string;
  freqMin: string;
  freqMax: string;
  freqUnit: "MHz" | "GHz";
  start: string;
  end: string;
  affiliation: "" | "Federal" | "NonFederal";
}

export function emptyRequestForm(): RequestFormState {
  return {
    id: "req-1",
    requesterClass: "",
    locationWkt: "",
    freqMin: "",
    freqMax: "",
    freqUnit: "MHz",
    start: "",
    end: "",
    affiliation: "",
  };
}

const WKT_POINT = /^\s*point\s*\(\s*(-?\d+(?:\.\d+)?)\s+(-?\d+(?:\.\d+)?)\s*\)\s*$/i;
const INSTANT = /^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}(:\d{2})?(\.\d+)?(Z|[+-]\d{2}:\d{2})$/;

export function parseWktPoint(text: string): { lon: number; lat: number } | null {
  const match = WKT_POINT.exec(text);
  if (!match) return null;
  const lon = Number(match[1]);
  const lat = Number(match[2]);
  if (lon < -180 || lon > 180 || lat < -90 || lat > 90) return null;
  return { lon, lat };
}

export function formatWktPoint(lon: number, lat: number): string {
  return `POINT(${trim(lon)} ${trim(lat)})`;
}

function trim(value: number): string {
  return Number(value.toFixed(6)).toString();
}

export interface FieldError {
  field: string;
  message: string;
}

export function validateRequestForm(form: RequestFormState): FieldError[] {
  const errors: FieldError[] = [];
  if (!form.id.trim()) errors.push({ field: "id", message: "request id is required" });
  if (!form.requesterClass.trim()) {
    errors.push({ field: "requester_class", message: "requester class is required" });
  }
  if (!parseWktPoint(form.locationWkt)) {
    errors.push({ field: "location_wkt", message: "location must be POINT(lon lat)" });
  }
  if (!form.freqMin.trim() || isNaN(Number(form.freqMin)) || Number(form.freqMin) <= 0) {
    errors.push({ field: "frequency.min", message: "minimum frequency must be positive" });
  }
  if (form.freqMax.trim()) {
    if (isNaN(Number(form.freqMax)) || Number(form.freqMax) <= 0) {
      errors.push({ field: "frequency.max", message: "maximum frequency must be positive" });
    } else if (Number(form.freqMin) > Number(form.freqMax)) {
      errors.push({ field: "frequency.max", message: "minimum exceeds maximum" });
    }
  }
  if (!INSTANT.test(form.start)) {
    errors.push({ field: "time.start", message: "start must be an ISO 8601 instant" });
  }
  if (!INSTANT.test(form.end)) {
    errors.push({ field: "time.end", message: "end must be an ISO 8601 instant" });
  }
  if (INSTANT.test(form.start) && INSTANT.test(form.end) && form.start > form.end) {
    errors.push({ field: "time.end", message: "start is after end" });
  }
  return errors;
}

export function formToRequest(form: RequestFormState): RequestJson {
  const request: RequestJson = {
    id: form.id.trim(),
    requester_class: form.requesterClass.trim(),
    action: "Transmission",
    location_wkt: form.locationWkt.trim(),
    frequency: {
      min: form.freqMin.trim(),
      max: (form.freqMax.trim() || form.freqMin.trim()),
      unit: form.freqUnit,
    },
    time: { start: form.start.trim(), end: form.end.trim() },
  };
  if (form.affiliation) request.affiliation = form.affiliation;
  return request;
}
