// Policy detail: metadata, the effective rule chain grouped by the policy
// that contributed each rule, provenance, and the referenced locations on
// a map.

import { ApiClient } from "../api.js";
import { renderMap } from "../map.js";
import type { PolicyDetailResponse } from "../types.js";
import { errorBox } from "./browser.js";

export interface DetailDeps {
  api: ApiClient;
  openBuilderWithParent: (parentId: string) => void;
  openDetail: (policyId: string) => void;
}

export async function renderDetail(
  root: HTMLElement,
  policyId: string,
  deps: DetailDeps,
): Promise<void> {
  root.innerHTML = "";
  let detail: PolicyDetailResponse;
  try {
    detail = await deps.api.policyDetail(policyId);
  } catch (error) {
    root.appendChild(errorBox(error));
    return;
  }

  const heading = document.createElement("h2");
  heading.textContent = detail.policy.id;
  root.appendChild(heading);

  const facts = document.createElement("dl");
  facts.className = "policy-facts";
  const pairs: [string, string][] = [
    ["Parent", detail.policy.parent ?? "(root policy)"],
    ["Effect", detail.effect ?? "(no effect: constraint node)"],
    ["Precedence", String(detail.precedence)],
    ["Store version", String(detail.version)],
  ];
  if (detail.policy.obligations.length) {
    pairs.push(["Obligations", detail.policy.obligations.join(", ")]);
  }
  for (const [key, value] of Object.entries(detail.policy.metadata)) {
    pairs.push([key, value]);
  }
  for (const [term, value] of pairs) {
    const dt = document.createElement("dt");
    dt.textContent = term;
    const dd = document.createElement("dd");
    dd.textContent = value;
    facts.append(dt, dd);
  }
  root.appendChild(facts);

  const reuse = document.createElement("button");
  reuse.textContent = "Reuse rules (new local policy)";
  reuse.addEventListener("click", () => deps.openBuilderWithParent(detail.policy.id));
  root.appendChild(reuse);

  const chainHeading = document.createElement("h3");
  chainHeading.textContent = "Effective rule chain";
  root.appendChild(chainHeading);
  const chain = document.createElement("ol");
  chain.className = "rule-chain";
  let currentGroup: HTMLElement | null = null;
  let currentPolicy = "";
  for (const entry of detail.chain) {
    if (entry.policy_id !== currentPolicy) {
      currentPolicy = entry.policy_id;
      const item = document.createElement("li");
      const label = document.createElement("a");
      label.textContent = entry.policy_id;
      label.href = `#detail/${encodeURIComponent(entry.policy_id)}`;
      label.addEventListener("click", (event) => {
        event.preventDefault();
        deps.openDetail(entry.policy_id);
      });
      item.appendChild(label);
      currentGroup = document.createElement("ul");
      item.appendChild(currentGroup);
      chain.appendChild(item);
    }
    const clause = document.createElement("li");
    clause.textContent = entry.clause;
    currentGroup!.appendChild(clause);
  }
  if (!detail.chain.length) {
    const none = document.createElement("li");
    none.textContent = "(no restrictions: applies to every request)";
    chain.appendChild(none);
  }
  root.appendChild(chain);

  if (detail.regions.length) {
    const mapHeading = document.createElement("h3");
    mapHeading.textContent = "Locations";
    root.appendChild(mapHeading);
    root.appendChild(renderMap({ regions: detail.regions }));
    const legend = document.createElement("p");
    legend.className = "map-legend";
    legend.textContent = detail.regions.map((r) => r.name).join(", ");
    root.appendChild(legend);
  }

  try {
    const provenance = await deps.api.provenance(policyId);
    const provHeading = document.createElement("h3");
    provHeading.textContent = "Provenance";
    root.appendChild(provHeading);
    const records = document.createElement("ul");
    records.className = "provenance";
    for (const record of provenance.records) {
      const item = document.createElement("li");
      item.textContent = `${record.timestamp} ${record.action} by ${record.actor}`;
      records.appendChild(item);
    }
    root.appendChild(records);
  } catch {
    // provenance is advisory in the detail view; ignore lookup failures
  }
}
