// App shell: hash routing between the faceted browser, policy detail,
// policy builder, and request builder. The UI is a pure client of the
// policy service; the only state kept here is the session's what-if
// history and builder handoff.

import { ApiClient } from "./api.js";
import { PolicyFormState, policyToForm, reuseAsLocalPolicy } from "./forms.js";
import { renderBrowser } from "./views/browser.js";
import { renderBuilder } from "./views/builder.js";
import { renderDetail } from "./views/detail.js";
import { renderRequestBuilder } from "./views/request.js";

const serviceBase =
  (window as { DSA_SERVICE_URL?: string }).DSA_SERVICE_URL ?? "";
const api = new ApiClient(serviceBase, "spectrum-manager");
const history: { request: string; effect: string; trigger: string | null }[] = [];
let builderSeed: PolicyFormState | undefined;

function openDetail(policyId: string): void {
  window.location.hash = `#detail/${encodeURIComponent(policyId)}`;
}

function openBuilderWithParent(parentId: string): void {
  void api.policyDetail(parentId).then((detail) => {
    builderSeed = reuseAsLocalPolicy(detail.policy);
    window.location.hash = "#builder";
    void route();
  });
}

function openBuilderForRevision(policyId: string): void {
  void api.policyDetail(policyId).then((detail) => {
    builderSeed = policyToForm(detail.policy);
    window.location.hash = "#builder";
    void route();
  });
}

async function route(): Promise<void> {
  const main = document.getElementById("view");
  if (!main) return;
  const hash = window.location.hash || "#browser";
  for (const link of document.querySelectorAll("nav a")) {
    link.classList.toggle(
      "active",
      hash.startsWith(link.getAttribute("href") ?? "#none"),
    );
  }
  if (hash.startsWith("#detail/")) {
    const policyId = decodeURIComponent(hash.slice("#detail/".length));
    await renderDetail(main, policyId, { api, openBuilderWithParent, openDetail });
    const revise = document.createElement("button");
    revise.textContent = "Edit this policy";
    revise.addEventListener("click", () => openBuilderForRevision(policyId));
    main.appendChild(revise);
  } else if (hash.startsWith("#builder")) {
    const seed = builderSeed;
    builderSeed = undefined;
    await renderBuilder(main, { api, openDetail, initialForm: seed });
  } else if (hash.startsWith("#request")) {
    await renderRequestBuilder(main, { api, openDetail, history });
  } else {
    await renderBrowser(main, { api, openDetail });
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
