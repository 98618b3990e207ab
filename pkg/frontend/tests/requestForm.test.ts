// Request Builder form validation and wire conversion.

import { describe, expect, it } from "vitest";

import {
  emptyRequestForm,
  formToRequest,
  formatWktPoint,
  parseWktPoint,
  validateRequestForm,
} from "../src/requestForm.js";

function sampleForm() {
  const form = emptyRequestForm();
  form.id = "req-1";
  form.requesterClass = "GenericJTRS";
  form.locationWkt = "POINT(-114.23 33.20)";
  form.freqMin = "1755";
  form.freqMax = "1756.25";
  form.start = "2019-10-01T08:00:00Z";
  form.end = "2019-10-01T09:00:00Z";
  return form;
}

describe("parseWktPoint", () => {
  it("parses the sample point", () => {
    expect(parseWktPoint("POINT(-114.23 33.20)")).toEqual({ lon: -114.23, lat: 33.2 });
  });

  it("is whitespace and case tolerant", () => {
    expect(parseWktPoint("  point( 10.5  -20.25 ) ")).toEqual({ lon: 10.5, lat: -20.25 });
  });

  it("rejects malformed text and out-of-range coordinates", () => {
    expect(parseWktPoint("POINT(1)")).toBeNull();
    expect(parseWktPoint("nonsense")).toBeNull();
    expect(parseWktPoint("POINT(-200 10)")).toBeNull();
  });

  it("round-trips through formatWktPoint", () => {
    const formatted = formatWktPoint(-114.23, 33.2);
    expect(parseWktPoint(formatted)).toEqual({ lon: -114.23, lat: 33.2 });
  });
});

describe("validateRequestForm", () => {
  it("accepts the sample request", () => {
    expect(validateRequestForm(sampleForm())).toEqual([]);
  });

  it("blocks malformed WKT before submission", () => {
    const form = sampleForm();
    form.locationWkt = "POINT(oops)";
    const errors = validateRequestForm(form);
    expect(errors.map((e) => e.field)).toContain("location_wkt");
  });

  it("requires a positive minimum frequency", () => {
    const form = sampleForm();
    form.freqMin = "-5";
    expect(validateRequestForm(form).map((e) => e.field)).toContain("frequency.min");
  });

  it("rejects inverted bounds", () => {
    const form = sampleForm();
    form.freqMin = "1780";
    form.freqMax = "1755";
    expect(validateRequestForm(form).map((e) => e.field)).toContain("frequency.max");
  });

  it("rejects a start after the end", () => {
    const form = sampleForm();
    form.start = "2019-10-01T10:00:00Z";
    form.end = "2019-10-01T09:00:00Z";
    expect(validateRequestForm(form).map((e) => e.field)).toContain("time.end");
  });
});

describe("formToRequest", () => {
  it("builds the service schema", () => {
    expect(formToRequest(sampleForm())).toEqual({
      id: "req-1",
      requester_class: "GenericJTRS",
      action: "Transmission",
      location_wkt: "POINT(-114.23 33.20)",
      frequency: { min: "1755", max: "1756.25", unit: "MHz" },
      time: { start: "2019-10-01T08:00:00Z", end: "2019-10-01T09:00:00Z" },
    });
  });

  it("blank max means a single frequency", () => {
    const form = sampleForm();
    form.freqMax = "";
    expect(formToRequest(form).frequency).toEqual({
      min: "1755",
      max: "1755",
      unit: "MHz",
    });
  });

  it("includes affiliation only when chosen", () => {
    const form = sampleForm();
    expect("affiliation" in formToRequest(form)).toBe(false);
    form.affiliation = "Federal";
    expect(formToRequest(form).affiliation).toBe("Federal");
  });
});
