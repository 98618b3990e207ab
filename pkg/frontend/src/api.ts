// Typed client for the policy service. The UI talks to the service through
// this module only.

import type {
  ApiErrorBody,
  EvaluationJson,
  FacetMatch,
  PolicyDetailResponse,
  PolicyJson,
  PolicySummary,
  ProvenanceRecordJson,
  RegionJson,
  RequestJson,
  TaxonomyResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ApiErrorBody,
  ) {
    super(body.message);
  }
}

export interface FacetFilters {
  region?: string;
  class?: string;
  freq?: string;
  effect?: string;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private actor: string = "spectrum-manager",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  facetsUrl(filters: FacetFilters): string {
    const params = new URLSearchParams();
    if (filters.region) params.set("region", filters.region);
    if (filters.class) params.set("class", filters.class);
    if (filters.freq) params.set("freq", filters.freq);
    if (filters.effect) params.set("effect", filters.effect);
    const query = params.toString();
    return `${this.baseUrl}/policies/facets${query ? "?" + query : ""}`;
  }

  private async call<T>(
    path: string,
    init: RequestInit = {},
    mutate = false,
  ): Promise<T> {
    const headers: Record<string, string> = {
      "Content-Type": "application/json",
      ...((init.headers as Record<string, string>) ?? {}),
    };
    if (mutate) headers["X-Actor"] = this.actor;
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      ...init,
      headers,
    });
    const body = await response.json();
    if (!response.ok) {
      const error: ApiErrorBody = body?.error ?? {
        code: "unknown",
        message: `HTTP ${response.status}`,
      };
      throw new ApiError(response.status, error);
    }
    return body as T;
  }

  taxonomy(): Promise<TaxonomyResponse> {
    return this.call("/taxonomy");
  }

  regions(): Promise<{ regions: RegionJson[] }> {
    return this.call("/regions");
  }

  listPolicies(): Promise<{ version: number; policies: PolicySummary[] }> {
    return this.call("/policies");
  }

  async facets(filters: FacetFilters): Promise<FacetMatch[]> {
    const url = this.facetsUrl(filters).slice(this.baseUrl.length);
    const body = await this.call<{ matches: FacetMatch[] }>(url);
    return body.matches;
  }

  policyDetail(id: string): Promise<PolicyDetailResponse> {
    return this.call(`/policies/${encodeURIComponent(id)}/detail`);
  }

  provenance(id: string): Promise<{ records: ProvenanceRecordJson[] }> {
    return this.call(`/policies/${encodeURIComponent(id)}/provenance`);
  }

  createPolicy(policy: PolicyJson): Promise<{ version: number; added: string[] }> {
    return this.call(
      "/policies",
      { method: "POST", body: JSON.stringify({ policies: [policy] }) },
      true,
    );
  }

  revisePolicy(policy: PolicyJson): Promise<{ version: number }> {
    return this.call(
      `/policies/${encodeURIComponent(policy.id)}`,
      { method: "PUT", body: JSON.stringify({ policy }) },
      true,
    );
  }

  deletePolicy(id: string, cascade = false): Promise<{ version: number; deleted: string[] }> {
    const suffix = cascade ? "?cascade=true" : "";
    return this.call(
      `/policies/${encodeURIComponent(id)}${suffix}`,
      { method: "DELETE" },
      true,
    );
  }

  evaluate(request: RequestJson): Promise<{ version: number; result: EvaluationJson }> {
    return this.call("/evaluate", {
      method: "POST",
      body: JSON.stringify(request),
    });
  }
}
