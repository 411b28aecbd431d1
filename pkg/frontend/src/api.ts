// Typed client for the assistant's HTTP API. Every displayed value in the
// UI comes from one of these calls; nothing is fabricated client-side.

import type {
  CatalogView,
  ExplanationView,
  ForecastView,
  SelectionView,
  SnapshotView,
  SuggestionView,
  TraceView,
} from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

export class ApiClient {
  readonly baseUrl: string;
  sessionId: string | null = null;

  constructor(baseUrl = "") {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async request<T>(
    method: string,
    path: string,
    options: { body?: unknown; session?: boolean } = {},
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (options.body !== undefined) headers["Content-Type"] = "application/json";
    if (options.session !== false && this.sessionId) headers["X-Session"] = this.sessionId;
    const response = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: options.body === undefined ? undefined : JSON.stringify(options.body),
    });
    if (!response.ok) {
      let code = "http-error";
      let message = `${method} ${path} failed with ${response.status}`;
      try {
        const body = (await response.json()) as { error?: { code: string; message: string } };
        if (body.error) ({ code, message } = body.error);
      } catch {
        // non-envelope error body; keep the generic message
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  async openSession(): Promise<string> {
    const body = await this.request<{ session_id: string }>("POST", "/api/sessions", {
      session: false,
    });
    this.sessionId = body.session_id;
    return body.session_id;
  }

  catalog(): Promise<CatalogView> {
    return this.request("GET", "/api/catalog", { session: false });
  }

  forecasts(date: string, material: string): Promise<ForecastView[]> {
    const query = new URLSearchParams({ date, material });
    return this.request("GET", `/api/forecasts?${query}`);
  }

  editForecast(forecastId: string, quantity: number): Promise<{ feedback_id: string; quantity: number }> {
    return this.request("POST", `/api/forecasts/${forecastId}/edit`, { body: { quantity } });
  }

  explanation(forecastId: string): Promise<ExplanationView> {
    return this.request("GET", `/api/forecasts/${forecastId}/explanation`);
  }

  removeFeature(explanationId: string, featureName: string): Promise<{ feedback_id: string }> {
    return this.request("POST", `/api/explanations/${explanationId}/remove-feature`, {
      body: { feature_name: featureName },
    });
  }

  options(forecastId: string): Promise<SnapshotView> {
    return this.request("GET", `/api/forecasts/${forecastId}/options`);
  }

  select(snapshotId: string, optionId: string, quantity?: number): Promise<SelectionView> {
    const body: Record<string, unknown> = { option_id: optionId };
    if (quantity !== undefined) body.quantity = quantity;
    return this.request("POST", `/api/snapshots/${snapshotId}/select`, { body });
  }

  reason(
    snapshotId: string,
    optionId: string,
    reason: { code: string } | { text: string },
  ): Promise<{ feedback_id: string }> {
    const body: Record<string, unknown> = { snapshot_id: snapshotId, option_id: optionId };
    if ("code" in reason) body.reason_code = reason.code;
    else body.reason_text = reason.text;
    return this.request("POST", "/api/feedback/reason", { body });
  }

  reasons(): Promise<string[]> {
    return this.request<{ reasons: string[] }>("GET", "/api/reasons", { session: false }).then(
      (body) => body.reasons,
    );
  }

  closeSession(): Promise<number> {
    if (!this.sessionId) return Promise.resolve(0);
    return this.request<{ implicit_approvals: number }>(
      "POST",
      `/api/sessions/${this.sessionId}/close`,
      { session: false },
    ).then((body) => body.implicit_approvals);
  }

  suggestions(k: number): Promise<SuggestionView[]> {
    return this.request("GET", `/api/al/suggestions?k=${k}`, { session: false });
  }

  trace(entityId: string): Promise<TraceView> {
    return this.request("GET", `/api/kg/trace/${entityId}`, { session: false });
  }

  // Fired on tab unload so implicit approvals are not lost; sendBeacon
  // cannot carry headers, which is why the close route keys on the path.
  beaconClose(): boolean {
    if (!this.sessionId || typeof navigator === "undefined" || !navigator.sendBeacon) {
      return false;
    }
    return navigator.sendBeacon(`${this.baseUrl}/api/sessions/${this.sessionId}/close`);
  }
}
