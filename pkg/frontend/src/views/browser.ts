// Faceted policy browser: pick attribute values (region, device class,
// frequency, effect), list matching policies, open details.

import { ApiClient, ApiError, FacetFilters } from "../api.js";
import type { RegionJson, TaxonomyResponse } from "../types.js";

export interface BrowserDeps {
  api: ApiClient;
  openDetail: (policyId: string) => void;
}

function option(value: string, label?: string): HTMLOptionElement {
  const el = document.createElement("option");
  el.value = value;
  el.textContent = label ?? value;
  return el;
}

export async function renderBrowser(root: HTMLElement, deps: BrowserDeps): Promise<void> {
  root.innerHTML = "";
  const heading = document.createElement("h2");
  heading.textContent = "Policy Browser";
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

  const controls = document.createElement("form");
  controls.className = "facet-controls";
  controls.addEventListener("submit", (e) => e.preventDefault());

  const regionSelect = document.createElement("select");
  regionSelect.name = "region";
  regionSelect.appendChild(option("", "any region"));
  for (const region of regions) regionSelect.appendChild(option(region.id, region.name));

  const classSelect = document.createElement("select");
  classSelect.name = "class";
  classSelect.appendChild(option("", "any device class"));
  for (const cls of taxonomy.classes) classSelect.appendChild(option(cls.id));

  const freqInput = document.createElement("input");
  freqInput.name = "freq";
  freqInput.placeholder = "frequency, e.g. 1760MHz or 1755-1780MHz";

  const effectSelect = document.createElement("select");
  effectSelect.name = "effect";
  effectSelect.appendChild(option("", "any effect"));
  for (const token of ["permit", "deny", "permit-with-obligations"]) {
    effectSelect.appendChild(option(token));
  }

  const apply = document.createElement("button");
  apply.textContent = "Apply filters";

  controls.append(regionSelect, classSelect, freqInput, effectSelect, apply);
  root.appendChild(controls);

  const status = document.createElement("p");
  status.className = "status";
  root.appendChild(status);
  const list = document.createElement("ul");
  list.className = "policy-list";
  root.appendChild(list);

  async function refresh(): Promise<void> {
    const filters: FacetFilters = {};
    if (regionSelect.value) filters.region = regionSelect.value;
    if (classSelect.value) filters.class = classSelect.value;
    if (freqInput.value.trim()) filters.freq = freqInput.value.trim();
    if (effectSelect.value) filters.effect = effectSelect.value;
    try {
      const matches = await deps.api.facets(filters);
      status.textContent = `${matches.length} matching policies`;
      status.classList.remove("error");
      list.innerHTML = "";
      for (const match of matches) {
        const item = document.createElement("li");
        const link = document.createElement("a");
        link.href = `#detail/${encodeURIComponent(match.policy_id)}`;
        link.textContent = match.policy_id;
        link.addEventListener("click", (event) => {
          event.preventDefault();
          deps.openDetail(match.policy_id);
        });
        item.appendChild(link);
        if (match.matched_facets.length) {
          const tag = document.createElement("span");
          tag.className = "facet-tags";
          tag.textContent = ` matched: ${match.matched_facets.join(", ")}`;
          item.appendChild(tag);
        }
        list.appendChild(item);
      }
    } catch (error) {
      // Surface the failure but keep the current filter state editable.
      status.textContent =
        error instanceof ApiError ? `error: ${error.body.message}` : String(error);
      status.classList.add("error");
    }
  }

  apply.addEventListener("click", () => void refresh());
  await refresh();
}

export function errorBox(error: unknown): HTMLElement {
  const box = document.createElement("p");
  box.className = "error";
  box.textContent =
    error instanceof ApiError
      ? `service error: ${error.body.message}`
      : `service unreachable: ${String(error)}`;
  return box;
}
