import { beforeEach, describe, expect, it, vi } from "vitest";

import {
  renderErrorBanner,
  renderExplanationPanel,
  renderFeedbackPanel,
  renderForecastPanel,
  renderOptionsPanel,
} from "../src/panels.js";
import type { ExplanationView, ForecastView, SnapshotView } from "../src/types.js";

function forecast(partial: Partial<ForecastView> = {}): ForecastView {
  return {
    forecast_id: "fc-1",
    material_id: "M001",
    client_id: "C001",
    date: "2023-01-02",
    quantity: 12,
    edited: false,
    model_id: "md-1",
    ...partial,
  };
}

let container: HTMLElement;

beforeEach(() => {
  container = document.createElement("section");
  document.body.replaceChildren(container);
});

describe("forecast panel", () => {
  it("renders one row per client with the three actions", () => {
    const handlers = { onEdit: vi.fn(), onExplain: vi.fn(), onOptions: vi.fn() };
    renderForecastPanel(container, [
      forecast({ forecast_id: "fc-1", client_id: "C001" }),
      forecast({ forecast_id: "fc-2", client_id: "C002" }),
    ], handlers);
    const rows = container.querySelectorAll(".forecast-row");
    expect(rows).toHaveLength(2);
    for (const row of rows) {
      expect(row.querySelectorAll("button")).toHaveLength(3);
    }
  });

  it("edit opens an inline editor and submits the new quantity", () => {
    const handlers = { onEdit: vi.fn(), onExplain: vi.fn(), onOptions: vi.fn() };
    renderForecastPanel(container, [forecast()], handlers);
    (container.querySelector(".action-edit") as HTMLButtonElement).click();
    const input = container.querySelector(".edit-input") as HTMLInputElement;
    expect(input.value).toBe("12");
    input.value = "15";
    (container.querySelector(".edit-save") as HTMLButtonElement).click();
    expect(handlers.onEdit).toHaveBeenCalledWith("fc-1", 15);
  });

  it("shows the edited badge", () => {
    renderForecastPanel(container, [forecast({ edited: true, quantity: 15 })],
                        { onEdit: vi.fn(), onExplain: vi.fn(), onOptions: vi.fn() });
    expect(container.querySelector(".edited-badge")?.textContent).toBe("edited");
    expect(container.querySelector(".quantity-cell")?.textContent).toContain("15.00");
  });

  it("explain and options fire their handlers", () => {
    const handlers = { onEdit: vi.fn(), onExplain: vi.fn(), onOptions: vi.fn() };
    renderForecastPanel(container, [forecast()], handlers);
    (container.querySelector(".action-explain") as HTMLButtonElement).click();
    (container.querySelector(".action-options") as HTMLButtonElement).click();
    expect(handlers.onExplain).toHaveBeenCalledWith("fc-1");
    expect(handlers.onOptions).toHaveBeenCalledWith("fc-1");
  });
});

describe("explanation panel", () => {
  const explanation: ExplanationView = {
    explanation_id: "xp-1",
    forecast_id: "fc-1",
    fidelity: 0.997,
    attributions: [
      { feature_name: "lag_1", weight: 2.5 },
      { feature_name: "lag_7", weight: -1.25 },
      { feature_name: "is_monday", weight: 0.0 },
    ],
  };

  it("renders attribution rows in the order given", () => {
    renderExplanationPanel(container, explanation, vi.fn());
    const rows = [...container.querySelectorAll(".attribution-row")];
    expect(rows.map((r) => (r as HTMLElement).dataset.feature))
      .toEqual(["lag_1", "lag_7", "is_monday"]);
    expect(container.querySelectorAll(".bar-fill.negative")).toHaveLength(1);
  });

  it("removing a row drops it and reports the feedback", () => {
    const onRemove = vi.fn();
    renderExplanationPanel(container, explanation, onRemove);
    const second = container.querySelectorAll(".remove-feature")[1] as HTMLButtonElement;
    second.click();
    expect(onRemove).toHaveBeenCalledWith("xp-1", "lag_7");
    expect(container.querySelectorAll(".attribution-row")).toHaveLength(2);
  });

  it("zero-weight attributions stay removable", () => {
    renderExplanationPanel(container, explanation, vi.fn());
    const last = [...container.querySelectorAll(".attribution-row")].at(-1) as HTMLElement;
    expect(last.querySelector(".remove-feature")).not.toBeNull();
  });
});

describe("options panel", () => {
  const snapshot: SnapshotView = {
    snapshot_id: "sn-1",
    forecast_id: "fc-1",
    stage: "choose_transport",
    position: 1,
    options: [
      { option_id: "op-2", kind: "create_new_transport", rank: 2, transport_id: null, payload: {} },
      {
        option_id: "op-1", kind: "assign_to_transport", rank: 1, transport_id: "T2",
        payload: { departure_date: "2023-01-05" },
      },
    ],
  };

  it("renders options in rank order regardless of input order", () => {
    renderOptionsPanel(container, snapshot, null, vi.fn());
    const buttons = [...container.querySelectorAll(".option-select")] as HTMLButtonElement[];
    expect(buttons.map((b) => b.dataset.optionId)).toEqual(["op-1", "op-2"]);
    expect(buttons[0]?.textContent).toContain("T2");
  });

  it("selecting fires the handler with the option", () => {
    const onSelect = vi.fn();
    renderOptionsPanel(container, snapshot, null, onSelect);
    (container.querySelector(".option-select") as HTMLButtonElement).click();
    expect(onSelect).toHaveBeenCalledWith("sn-1", expect.objectContaining({ option_id: "op-1" }));
  });

  it("shows the terminal note instead of options when done", () => {
    renderOptionsPanel(container, null, "Committed 12 to T2", vi.fn());
    expect(container.querySelector(".terminal-note")?.textContent).toContain("Committed");
    expect(container.querySelectorAll(".option-select")).toHaveLength(0);
  });
});

describe("feedback panel", () => {
  it("offers catalog codes and a free-text field once enabled", () => {
    const onReason = vi.fn();
    renderFeedbackPanel(container, ["cost", "other"], true, onReason);
    const codes = [...container.querySelectorAll(".reason-code")] as HTMLButtonElement[];
    expect(codes.map((b) => b.textContent)).toEqual(["cost", "other"]);
    codes[0]?.click();
    expect(onReason).toHaveBeenCalledWith({ code: "cost" });

    const input = container.querySelector(".reason-input") as HTMLInputElement;
    input.value = "customer requested friday";
    (container.querySelector(".reason-submit") as HTMLButtonElement).click();
    expect(onReason).toHaveBeenCalledWith({ text: "customer requested friday" });
  });

  it("stays disabled before a flow finishes", () => {
    renderFeedbackPanel(container, ["cost"], false, vi.fn());
    expect(container.querySelectorAll(".reason-code")).toHaveLength(0);
    expect(container.querySelector(".empty")).not.toBeNull();
  });
});

describe("error banner", () => {
  it("prepends one banner and replaces it on repeat", () => {
    renderErrorBanner(container, "first");
    renderErrorBanner(container, "second");
    const banners = container.querySelectorAll(".error-banner");
    expect(banners).toHaveLength(1);
    expect(banners[0]?.textContent).toBe("second");
  });
});
