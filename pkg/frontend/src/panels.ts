// DOM builders for the four panel regions. Handlers are injected so the
// panels stay testable without a live server; every rendered value comes
// straight from an API view object.

import type { AttributionView, ExplanationView, ForecastView, OptionView, SnapshotView } from "./types.js";

export interface ForecastHandlers {
  onEdit(forecastId: string, quantity: number): void;
  onExplain(forecastId: string): void;
  onOptions(forecastId: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderErrorBanner(container: HTMLElement, message: string): void {
  const existing = container.querySelector(".error-banner");
  if (existing) existing.remove();
  const banner = el("div", "error-banner", message);
  container.prepend(banner);
}

export function clearErrorBanner(container: HTMLElement): void {
  container.querySelector(".error-banner")?.remove();
}

export function renderForecastPanel(
  container: HTMLElement,
  forecasts: ForecastView[],
  handlers: ForecastHandlers,
): void {
  container.replaceChildren();
  container.appendChild(el("h2", "panel-title", "A · Forecasts"));
  if (forecasts.length === 0) {
    container.appendChild(el("p", "empty", "No forecasts for this material and date."));
    return;
  }
  const table = el("table", "forecast-table");
  const head = el("tr");
  for (const label of ["Client", "Date", "Quantity", "Actions"]) {
    head.appendChild(el("th", undefined, label));
  }
  table.appendChild(head);

  for (const forecast of forecasts) {
    const row = el("tr", "forecast-row");
    row.dataset.forecastId = forecast.forecast_id;
    row.appendChild(el("td", undefined, forecast.client_id));
    row.appendChild(el("td", undefined, forecast.date));

    const quantityCell = el("td", "quantity-cell", forecast.quantity.toFixed(2));
    if (forecast.edited) {
      quantityCell.appendChild(el("span", "edited-badge", "edited"));
    }
    row.appendChild(quantityCell);

    const actions = el("td", "actions");
    const editButton = el("button", "action-edit", "Edit");
    editButton.addEventListener("click", () => {
      if (actions.querySelector(".edit-box")) return;
      const box = el("span", "edit-box");
      const input = el("input", "edit-input");
      input.type = "number";
      input.min = "0";
      input.step = "any";
      input.value = String(forecast.quantity);
      const save = el("button", "edit-save", "Save");
      save.addEventListener("click", () => {
        const quantity = Number(input.value);
        if (Number.isFinite(quantity) && quantity >= 0) {
          handlers.onEdit(forecast.forecast_id, quantity);
        }
      });
      const cancel = el("button", "edit-cancel", "Cancel");
      cancel.addEventListener("click", () => box.remove());
      box.append(input, save, cancel);
      actions.appendChild(box);
    });
    const explainButton = el("button", "action-explain", "Explain");
    explainButton.addEventListener("click", () => handlers.onExplain(forecast.forecast_id));
    const optionsButton = el("button", "action-options", "Options");
    optionsButton.addEventListener("click", () => handlers.onOptions(forecast.forecast_id));
    actions.append(editButton, explainButton, optionsButton);
    row.appendChild(actions);
    table.appendChild(row);
  }
  container.appendChild(table);
}

function attributionBar(attribution: AttributionView, maxWeight: number): HTMLElement {
  const bar = el("div", "attribution-bar");
  const fill = el("div", attribution.weight >= 0 ? "bar-fill positive" : "bar-fill negative");
  const share = maxWeight > 0 ? Math.abs(attribution.weight) / maxWeight : 0;
  fill.style.width = `${Math.round(share * 100)}%`;
  bar.appendChild(fill);
  return bar;
}

export function renderExplanationPanel(
  container: HTMLElement,
  explanation: ExplanationView | null,
  onRemove: (explanationId: string, featureName: string) => void,
): void {
  container.replaceChildren();
  container.appendChild(el("h2", "panel-title", "B · Forecast explanation"));
  if (!explanation) {
    container.appendChild(el("p", "empty", "Pick a forecast and press Explain."));
    return;
  }
  const list = el("ul", "attribution-list");
  const maxWeight = Math.max(...explanation.attributions.map((a) => Math.abs(a.weight)), 0);
  for (const attribution of explanation.attributions) {
    const item = el("li", "attribution-row");
    item.dataset.feature = attribution.feature_name;
    item.appendChild(el("span", "feature-name", attribution.feature_name));
    item.appendChild(el("span", "feature-weight", attribution.weight.toFixed(4)));
    item.appendChild(attributionBar(attribution, maxWeight));
    const remove = el("button", "remove-feature", "✕");
    remove.title = "This feature does not explain the forecast";
    remove.addEventListener("click", () => {
      item.remove();
      onRemove(explanation.explanation_id, attribution.feature_name);
    });
    item.appendChild(remove);
    list.appendChild(item);
  }
  container.appendChild(list);
  container.appendChild(
    el("p", "fidelity", `surrogate fidelity ${explanation.fidelity.toFixed(3)}`),
  );
}

function optionLabel(option: OptionView): string {
  switch (option.kind) {
    case "assign_to_transport":
      return `Assign to ${option.transport_id} (departs ${String(option.payload["departure_date"] ?? "?")})`;
    case "create_new_transport":
      return "Create a new transport";
    case "confirm_assignment":
      return "Confirm assignment";
    case "adjust_quantity":
      return "Adjust quantity";
    case "cancel":
      return "Cancel";
    default:
      return option.kind;
  }
}

export function renderOptionsPanel(
  container: HTMLElement,
  snapshot: SnapshotView | null,
  terminalNote: string | null,
  onSelect: (snapshotId: string, option: OptionView) => void,
): void {
  container.replaceChildren();
  container.appendChild(el("h2", "panel-title", "C · Decision options"));
  if (terminalNote) {
    container.appendChild(el("p", "terminal-note", terminalNote));
    return;
  }
  if (!snapshot) {
    container.appendChild(el("p", "empty", "Pick a forecast and press Options."));
    return;
  }
  container.appendChild(
    el("p", "stage-label", `step ${snapshot.position} · ${snapshot.stage.replace("_", " ")}`),
  );
  const list = el("ol", "option-list");
  for (const option of [...snapshot.options].sort((a, b) => a.rank - b.rank)) {
    const item = el("li", "option-row");
    const button = el("button", "option-select", optionLabel(option));
    button.dataset.optionId = option.option_id;
    button.dataset.kind = option.kind;
    button.addEventListener("click", () => onSelect(snapshot.snapshot_id, option));
    item.appendChild(button);
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderFeedbackPanel(
  container: HTMLElement,
  catalog: string[],
  enabled: boolean,
  onReason: (reason: { code: string } | { text: string }) => void,
): void {
  container.replaceChildren();
  container.appendChild(el("h2", "panel-title", "D · Why this option?"));
  if (!enabled) {
    container.appendChild(el("p", "empty", "Finish a decision flow to record your reasons."));
    return;
  }
  const codes = el("div", "reason-codes");
  for (const code of catalog) {
    const button = el("button", "reason-code", code);
    button.addEventListener("click", () => onReason({ code }));
    codes.appendChild(button);
  }
  container.appendChild(codes);

  const freeForm = el("div", "reason-free");
  const input = el("input", "reason-input");
  input.type = "text";
  input.placeholder = "add your own reason";
  const submit = el("button", "reason-submit", "Add reason");
  submit.addEventListener("click", () => {
    const text = input.value.trim();
    if (text) {
      onReason({ text });
      input.value = "";
    }
  });
  freeForm.append(input, submit);
  container.appendChild(freeForm);
}
