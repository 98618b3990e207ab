// Request Builder: probe evaluations against the live policy set. The
// point can be typed as WKT or set by clicking the map; previous
// submissions stay in the session for what-if comparison. All reason
// strings are displayed verbatim from the service response.

import { ApiClient, ApiError } from "../api.js";
import { renderMap } from "../map.js";
import {
  RequestFormState,
  emptyRequestForm,
  formToRequest,
  formatWktPoint,
  parseWktPoint,
  validateRequestForm,
} from "../requestForm.js";
import type { EvaluationJson, RegionJson, TaxonomyResponse } from "../types.js";
import { errorBox } from "./browser.js";

export interface RequestDeps {
  api: ApiClient;
  openDetail: (policyId: string) => void;
  history: { request: string; effect: string; trigger: string | null }[];
}

export async function renderRequestBuilder(
  root: HTMLElement,
  deps: RequestDeps,
): Promise<void> {
  root.innerHTML = "";
  const heading = document.createElement("h2");
  heading.textContent = "Request Builder";
  root.appendChild(heading);

  let taxonomy: TaxonomyResponse;
  let regions: RegionJson[];
  try {
    [taxonomy, regions] = await Promise.all([
      deps.api.taxonomy(),
      deps.api.regions().then((body) => body.regions),
    ]);
  } catch (error) {
    root.appendChild(errorBox(error));
    return;
  }

  const form = emptyRequestForm();
  const formEl = document.createElement("form");
  formEl.className = "request-builder";
  formEl.addEventListener("submit", (e) => e.preventDefault());

  function labelled(labelText: string, input: HTMLElement): HTMLElement {
    const wrap = document.createElement("label");
    wrap.className = "field";
    const span = document.createElement("span");
    span.textContent = labelText;
    wrap.append(span, input);
    return wrap;
  }

  const idInput = document.createElement("input");
  idInput.name = "id";
  idInput.value = form.id;
  idInput.addEventListener("input", () => (form.id = idInput.value));

  const classInput = document.createElement("input");
  classInput.name = "requester-class";
  classInput.setAttribute("list", "request-classes");
  classInput.placeholder = "e.g. GenericJTRS";
  classInput.addEventListener("input", () => (form.requesterClass = classInput.value));
  const datalist = document.createElement("datalist");
  datalist.id = "request-classes";
  for (const cls of taxonomy.classes) {
    const opt = document.createElement("option");
    opt.value = cls.id;
    datalist.appendChild(opt);
  }

  const wktInput = document.createElement("input");
  wktInput.name = "location-wkt";
  wktInput.placeholder = "POINT(-114.23 33.20) or click the map";
  wktInput.addEventListener("input", () => {
    form.locationWkt = wktInput.value;
    refreshMap();
  });

  const freqMin = document.createElement("input");
  freqMin.name = "freq-min";
  freqMin.placeholder = "min";
  freqMin.addEventListener("input", () => (form.freqMin = freqMin.value));
  const freqMax = document.createElement("input");
  freqMax.name = "freq-max";
  freqMax.placeholder = "max (blank = single frequency)";
  freqMax.addEventListener("input", () => (form.freqMax = freqMax.value));
  const unitSelect = document.createElement("select");
  unitSelect.name = "freq-unit";
  for (const unit of ["MHz", "GHz"] as const) {
    const opt = document.createElement("option");
    opt.value = unit;
    opt.textContent = unit;
    unitSelect.appendChild(opt);
  }
  unitSelect.addEventListener("change", () => (form.freqUnit = unitSelect.value as "MHz" | "GHz"));

  const startInput = document.createElement("input");
  startInput.name = "time-start";
  startInput.placeholder = "2019-10-01T08:00:00Z";
  startInput.addEventListener("input", () => (form.start = startInput.value));
  const endInput = document.createElement("input");
  endInput.name = "time-end";
  endInput.placeholder = "2019-10-01T09:00:00Z";
  endInput.addEventListener("input", () => (form.end = endInput.value));

  const affiliationSelect = document.createElement("select");
  affiliationSelect.name = "affiliation";
  for (const [value, label] of [
    ["", "(from device class)"],
    ["Federal", "Federal"],
    ["NonFederal", "NonFederal"],
  ]) {
    const opt = document.createElement("option");
    opt.value = value;
    opt.textContent = label;
    affiliationSelect.appendChild(opt);
  }
  affiliationSelect.addEventListener(
    "change",
    () => (form.affiliation = affiliationSelect.value as RequestFormState["affiliation"]),
  );

  const submit = document.createElement("button");
  submit.type = "button";
  submit.className = "evaluate";
  submit.textContent = "Evaluate";

  formEl.append(
    labelled("Request id", idInput),
    labelled("Requester class", classInput),
    datalist,
    labelled("Location (WKT)", wktInput),
    labelled("Frequency min", freqMin),
    labelled("Frequency max", freqMax),
    labelled("Unit", unitSelect),
    labelled("Start", startInput),
    labelled("End", endInput),
    labelled("Affiliation", affiliationSelect),
    submit,
  );
  root.appendChild(formEl);

  const problems = document.createElement("ul");
  problems.className = "problems error";
  root.appendChild(problems);

  const mapBox = document.createElement("div");
  root.appendChild(mapBox);
  function refreshMap(): void {
    mapBox.innerHTML = "";
    const point = parseWktPoint(form.locationWkt);
    mapBox.appendChild(
      renderMap({
        regions,
        point: point ? { lon: point.lon, lat: point.lat } : null,
        onClick: (lon, lat) => {
          form.locationWkt = formatWktPoint(lon, lat);
          wktInput.value = form.locationWkt;
          refreshMap();
        },
      }),
    );
  }
  refreshMap();

  const resultBox = document.createElement("div");
  resultBox.className = "evaluation-result";
  root.appendChild(resultBox);

  const historyHeading = document.createElement("h3");
  historyHeading.textContent = "Session history";
  const historyList = document.createElement("ul");
  historyList.className = "history";
  root.append(historyHeading, historyList);
  redrawHistory();

  function redrawHistory(): void {
    historyList.innerHTML = "";
    for (const entry of deps.history) {
      const item = document.createElement("li");
      item.textContent = `${entry.request} -> ${entry.effect}${
        entry.trigger ? ` via ${entry.trigger}` : ""
      }`;
      historyList.appendChild(item);
    }
  }

  function renderResult(result: EvaluationJson): void {
    resultBox.innerHTML = "";
    const effect = document.createElement("p");
    effect.className = `effect effect-${result.effect.toLowerCase()}`;
    effect.textContent = result.default_deny
      ? `${result.effect} (no applicable policy carries an effect)`
      : result.effect;
    resultBox.appendChild(effect);

    if (result.triggering_policy) {
      const trigger = document.createElement("p");
      trigger.append("Triggered by ");
      const link = document.createElement("a");
      link.textContent = result.triggering_policy;
      link.href = `#detail/${encodeURIComponent(result.triggering_policy)}`;
      link.addEventListener("click", (event) => {
        event.preventDefault();
        deps.openDetail(result.triggering_policy!);
      });
      trigger.appendChild(link);
      resultBox.appendChild(trigger);
    }
    if (result.conflict) {
      const conflict = document.createElement("p");
      conflict.className = "error";
      conflict.textContent =
        "conflict: policies with distinct effects tied at the top precedence";
      resultBox.appendChild(conflict);
    }
    if (result.obligations.length) {
      const obligations = document.createElement("p");
      obligations.textContent = `Obligations: ${result.obligations.join(", ")}`;
      resultBox.appendChild(obligations);
    }
    const reasonsHeading = document.createElement("h3");
    reasonsHeading.textContent = "Reasons";
    resultBox.appendChild(reasonsHeading);
    const reasons = document.createElement("ul");
    reasons.className = "reasons";
    for (const reason of result.reasons) {
      const item = document.createElement("li");
      item.textContent = reason.policy_id
        ? `[${reason.policy_id}] ${reason.text}`
        : reason.text;
      reasons.appendChild(item);
    }
    resultBox.appendChild(reasons);
  }

  submit.addEventListener("click", async () => {
    problems.innerHTML = "";
    const errors = validateRequestForm(form);
    if (errors.length) {
      for (const error of errors) {
        const item = document.createElement("li");
        item.textContent = `${error.field}: ${error.message}`;
        problems.appendChild(item);
      }
      return;
    }
    try {
      const { result } = await deps.api.evaluate(formToRequest(form));
      renderResult(result);
      deps.history.unshift({
        request: `${form.id} (${form.requesterClass}, ${form.freqMin}${
          form.freqMax ? "-" + form.freqMax : ""
        } ${form.freqUnit})`,
        effect: result.effect,
        trigger: result.triggering_policy,
      });
      redrawHistory();
    } catch (error) {
      const item = document.createElement("li");
      item.textContent =
        error instanceof ApiError
          ? `${error.body.code}: ${error.body.message}`
          : String(error);
      problems.appendChild(item);
    }
  });
}
