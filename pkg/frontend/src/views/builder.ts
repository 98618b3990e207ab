// Policy Builder: build a policy from scratch or specialize an existing
// one. Known device classes come from the taxonomy; free-text classes are
// allowed and flagged as pending curation. Validation runs client-side
// before anything is submitted.

import { ApiClient, ApiError } from "../api.js";
import {
  PolicyFormState,
  RestrictionKind,
  emptyForm,
  emptyRow,
  formToPolicy,
  validateForm,
} from "../forms.js";
import type { RegionJson, TaxonomyResponse } from "../types.js";
import { errorBox } from "./browser.js";

export interface BuilderDeps {
  api: ApiClient;
  openDetail: (policyId: string) => void;
  initialForm?: PolicyFormState;
}

const KIND_LABELS: Record<RestrictionKind, string> = {
  "frequency-within": "Frequency range",
  "requester-isa": "Requester class",
  "affiliation-is": "Affiliation",
  "location-within-any": "Locations",
  "active-during": "Time window",
};

export async function renderBuilder(root: HTMLElement, deps: BuilderDeps): Promise<void> {
  root.innerHTML = "";
  const heading = document.createElement("h2");
  heading.textContent = "Policy Builder";
  root.appendChild(heading);

  let taxonomy: TaxonomyResponse;
  let regions: RegionJson[];
  let knownPolicies: string[];
  try {
    [taxonomy, regions, knownPolicies] = await Promise.all([
      deps.api.taxonomy(),
      deps.api.regions().then((body) => body.regions),
      deps.api.listPolicies().then((body) => body.policies.map((p) => p.id)),
    ]);
  } catch (error) {
    root.appendChild(errorBox(error));
    return;
  }
  const knownClasses = new Set(taxonomy.classes.map((c) => c.id));

  const form = deps.initialForm ?? emptyForm();
  const formEl = document.createElement("form");
  formEl.className = "policy-builder";
  formEl.addEventListener("submit", (e) => e.preventDefault());
  root.appendChild(formEl);

  const problems = document.createElement("ul");
  problems.className = "problems error";
  const status = document.createElement("p");
  status.className = "status";

  function labelled(labelText: string, input: HTMLElement): HTMLElement {
    const wrap = document.createElement("label");
    wrap.className = "field";
    const span = document.createElement("span");
    span.textContent = labelText;
    wrap.append(span, input);
    return wrap;
  }

  function redraw(): void {
    formEl.innerHTML = "";

    const idInput = document.createElement("input");
    idInput.name = "id";
    idInput.value = form.id;
    idInput.placeholder = "e.g. US91-3.1-Local";
    idInput.addEventListener("input", () => (form.id = idInput.value));
    formEl.appendChild(labelled("Policy id", idInput));

    const parentSelect = document.createElement("select");
    parentSelect.name = "parent";
    const noneOption = document.createElement("option");
    noneOption.value = "";
    noneOption.textContent = "(no parent: new high-level policy)";
    parentSelect.appendChild(noneOption);
    for (const pid of knownPolicies) {
      const opt = document.createElement("option");
      opt.value = pid;
      opt.textContent = pid;
      if (pid === form.parent) opt.selected = true;
      parentSelect.appendChild(opt);
    }
    parentSelect.addEventListener("change", () => (form.parent = parentSelect.value));
    formEl.appendChild(labelled("Extends", parentSelect));

    const rows = document.createElement("div");
    rows.className = "restriction-rows";
    form.rows.forEach((row, index) => {
      const rowEl = document.createElement("fieldset");
      const legend = document.createElement("legend");
      legend.textContent = KIND_LABELS[row.kind];
      rowEl.appendChild(legend);

      switch (row.kind) {
        case "frequency-within": {
          const min = document.createElement("input");
          min.name = "freq-min";
          min.value = row.freqMin;
          min.placeholder = "lower bound";
          min.addEventListener("input", () => (row.freqMin = min.value));
          const max = document.createElement("input");
          max.name = "freq-max";
          max.value = row.freqMax;
          max.placeholder = "upper bound";
          max.addEventListener("input", () => (row.freqMax = max.value));
          const unit = document.createElement("select");
          for (const u of ["MHz", "GHz"] as const) {
            const opt = document.createElement("option");
            opt.value = u;
            opt.textContent = u;
            if (u === row.freqUnit) opt.selected = true;
            unit.appendChild(opt);
          }
          unit.addEventListener("change", () => (row.freqUnit = unit.value as "MHz" | "GHz"));
          rowEl.append(
            labelled("Lower", min),
            labelled("Upper", max),
            labelled("Unit", unit),
          );
          break;
        }
        case "requester-isa": {
          const input = document.createElement("input");
          input.name = "class-id";
          input.value = row.classId;
          input.setAttribute("list", "known-classes");
          input.addEventListener("input", () => {
            row.classId = input.value;
            pendingNote.hidden = !input.value || knownClasses.has(input.value);
          });
          const pendingNote = document.createElement("em");
          pendingNote.textContent = "new term: will be flagged for curation";
          pendingNote.hidden = !row.classId || knownClasses.has(row.classId);
          rowEl.append(labelled("Class", input), pendingNote);
          break;
        }
        case "affiliation-is": {
          const select = document.createElement("select");
          for (const a of ["Federal", "NonFederal"] as const) {
            const opt = document.createElement("option");
            opt.value = a;
            opt.textContent = a;
            if (a === row.affiliation) opt.selected = true;
            select.appendChild(opt);
          }
          select.addEventListener(
            "change",
            () => (row.affiliation = select.value as "Federal" | "NonFederal"),
          );
          rowEl.appendChild(labelled("Affiliation", select));
          break;
        }
        case "location-within-any": {
          const select = document.createElement("select");
          select.multiple = true;
          select.size = Math.min(regions.length, 6);
          for (const region of regions) {
            const opt = document.createElement("option");
            opt.value = region.id;
            opt.textContent = region.name;
            if (row.regionIds.includes(region.id)) opt.selected = true;
            select.appendChild(opt);
          }
          select.addEventListener("change", () => {
            row.regionIds = Array.from(select.selectedOptions).map((o) => o.value);
          });
          rowEl.appendChild(labelled("Regions", select));
          break;
        }
        case "active-during": {
          const start = document.createElement("input");
          start.name = "window-start";
          start.value = row.start;
          start.placeholder = "2019-10-01T11:00:00Z";
          start.addEventListener("input", () => (row.start = start.value));
          const end = document.createElement("input");
          end.name = "window-end";
          end.value = row.end;
          end.placeholder = "2019-10-01T17:00:00Z";
          end.addEventListener("input", () => (row.end = end.value));
          rowEl.append(labelled("From", start), labelled("Until", end));
          break;
        }
      }

      const remove = document.createElement("button");
      remove.type = "button";
      remove.textContent = "Remove rule";
      remove.addEventListener("click", () => {
        form.rows.splice(index, 1);
        redraw();
      });
      rowEl.appendChild(remove);
      rows.appendChild(rowEl);
    });
    formEl.appendChild(rows);

    const addRow = document.createElement("select");
    addRow.name = "add-rule";
    const prompt = document.createElement("option");
    prompt.value = "";
    prompt.textContent = "Add a rule...";
    addRow.appendChild(prompt);
    (Object.keys(KIND_LABELS) as RestrictionKind[]).forEach((kind) => {
      if (form.rows.some((r) => r.kind === kind)) return; // one per kind
      const opt = document.createElement("option");
      opt.value = kind;
      opt.textContent = KIND_LABELS[kind];
      addRow.appendChild(opt);
    });
    addRow.addEventListener("change", () => {
      if (!addRow.value) return;
      form.rows.push(emptyRow(addRow.value as RestrictionKind));
      redraw();
    });
    formEl.appendChild(labelled("Rules", addRow));

    const effectSelect = document.createElement("select");
    effectSelect.name = "effect";
    for (const [value, label] of [
      ["", "(none: pure constraint node)"],
      ["permit", "Permit"],
      ["deny", "Deny"],
      ["permit-with-obligations", "Permit with obligations"],
    ]) {
      const opt = document.createElement("option");
      opt.value = value;
      opt.textContent = label;
      if (value === form.effect) opt.selected = true;
      effectSelect.appendChild(opt);
    }
    effectSelect.addEventListener("change", () => {
      form.effect = effectSelect.value as PolicyFormState["effect"];
      redraw();
    });
    formEl.appendChild(labelled("Effect", effectSelect));

    if (form.effect === "permit-with-obligations") {
      const obligations = document.createElement("input");
      obligations.name = "obligations";
      obligations.value = form.obligations;
      obligations.placeholder = "comma-separated obligation ids";
      obligations.addEventListener("input", () => (form.obligations = obligations.value));
      formEl.appendChild(labelled("Obligations", obligations));
    }

    const precedence = document.createElement("input");
    precedence.name = "precedence";
    precedence.value = form.precedence;
    precedence.addEventListener("input", () => (form.precedence = precedence.value));
    formEl.appendChild(labelled("Precedence", precedence));

    const datalist = document.createElement("datalist");
    datalist.id = "known-classes";
    for (const cls of taxonomy.classes) {
      const opt = document.createElement("option");
      opt.value = cls.id;
      datalist.appendChild(opt);
    }
    formEl.appendChild(datalist);

    const submit = document.createElement("button");
    submit.type = "button";
    submit.className = "submit-policy";
    submit.textContent = knownPolicies.includes(form.id) ? "Revise policy" : "Create policy";
    submit.addEventListener("click", () => void submitForm());
    formEl.append(submit, problems, status);
  }

  async function submitForm(): Promise<void> {
    problems.innerHTML = "";
    const errors = validateForm(form);
    if (errors.length) {
      for (const error of errors) {
        const item = document.createElement("li");
        item.textContent = `${error.field}: ${error.message}`;
        problems.appendChild(item);
      }
      return;
    }
    const policy = formToPolicy(form);
    try {
      const response = knownPolicies.includes(policy.id)
        ? await deps.api.revisePolicy(policy)
        : await deps.api.createPolicy(policy);
      status.textContent = `saved at store version ${response.version}`;
      deps.openDetail(policy.id);
    } catch (error) {
      if (error instanceof ApiError) {
        const item = document.createElement("li");
        item.textContent = `${error.body.code}: ${error.body.message}`;
        problems.appendChild(item);
      } else {
        status.textContent = String(error);
      }
    }
  }

  redraw();
}
