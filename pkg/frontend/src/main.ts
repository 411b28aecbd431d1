// Application bootstrap: one session per tab, four always-visible panels,
// and a close beacon so implicit approvals survive tab closes.

import { ApiClient, ApiError } from "./api.js";
import {
  clearErrorBanner,
  renderErrorBanner,
  renderExplanationPanel,
  renderFeedbackPanel,
  renderForecastPanel,
  renderOptionsPanel,
} from "./panels.js";
import {
  PanelState,
  flowFinished,
  initialState,
  selectForecast,
  showExplanation,
  showSnapshot,
} from "./state.js";
import type { OptionView } from "./types.js";

interface Regions {
  forecasts: HTMLElement;
  explanation: HTMLElement;
  options: HTMLElement;
  feedback: HTMLElement;
}

export class App {
  readonly client: ApiClient;
  private readonly regions: Regions;
  private state: PanelState = initialState();
  private terminalNote: string | null = null;
  private completed: { snapshotId: string; optionId: string } | null = null;

  constructor(client: ApiClient, regions: Regions) {
    this.client = client;
    this.regions = regions;
  }

  async loadForecasts(date: string, material: string): Promise<void> {
    clearErrorBanner(this.regions.forecasts);
    try {
      const forecasts = await this.client.forecasts(date, material);
      this.state = initialState();
      this.terminalNote = null;
      this.completed = null;
      renderForecastPanel(this.regions.forecasts, forecasts, {
        onEdit: (id, quantity) => void this.editForecast(date, material, id, quantity),
        onExplain: (id) => void this.explain(id),
        onOptions: (id) => void this.openOptions(id),
      });
      this.renderSidePanels(null);
      void this.refreshFeedbackPanel();
    } catch (error) {
      this.surface(this.regions.forecasts, error);
    }
  }

  private async editForecast(date: string, material: string, forecastId: string,
                             quantity: number): Promise<void> {
    try {
      await this.client.editForecast(forecastId, quantity);
      await this.loadForecasts(date, material); // re-render with edited badge
    } catch (error) {
      this.surface(this.regions.forecasts, error);
    }
  }

  private async explain(forecastId: string): Promise<void> {
    try {
      const explanation = await this.client.explanation(forecastId);
      this.state = showExplanation(selectForecast(this.state, forecastId));
      renderExplanationPanel(this.regions.explanation, explanation, (explanationId, feature) => {
        void this.client
          .removeFeature(explanationId, feature)
          .catch((error) => this.surface(this.regions.explanation, error));
      });
    } catch (error) {
      this.surface(this.regions.explanation, error);
    }
  }

  private async openOptions(forecastId: string): Promise<void> {
    try {
      const snapshot = await this.client.options(forecastId);
      this.state = showSnapshot(selectForecast(this.state, forecastId), snapshot);
      this.terminalNote = null;
      this.renderSidePanels(null);
    } catch (error) {
      this.surface(this.regions.options, error);
    }
  }

  private async select(snapshotId: string, option: OptionView): Promise<void> {
    try {
      let quantity: number | undefined;
      if (option.kind === "adjust_quantity") {
        const current = Number(option.payload["quantity"] ?? 0);
        const answer = typeof window !== "undefined" && window.prompt
          ? window.prompt("New quantity", String(current))
          : null;
        if (answer === null) return;
        quantity = Number(answer);
        if (!Number.isFinite(quantity) || quantity < 0) return;
      }
      const result = await this.client.select(snapshotId, option.option_id, quantity);
      if (result.terminal) {
        this.completed = { snapshotId, optionId: option.option_id };
        this.terminalNote = result.committed_quantity !== null
          ? `Committed ${result.committed_quantity} to ${result.committed_transport_id}` +
            (result.created_transport ? " (new transport)" : "")
          : "Flow cancelled — nothing committed.";
        this.state = flowFinished(this.state);
        this.renderSidePanels(null);
        await this.refreshFeedbackPanel();
      } else if (result.snapshot) {
        this.state = showSnapshot(this.state, result.snapshot);
        this.renderSidePanels(null);
      }
    } catch (error) {
      if (error instanceof ApiError && error.code === "already-selected") {
        this.terminalNote = "This step was already decided; start again from Options.";
        this.state = flowFinished(this.state);
        this.renderSidePanels(null);
        return;
      }
      this.surface(this.regions.options, error);
    }
  }

  private async refreshFeedbackPanel(): Promise<void> {
    const catalog = await this.client.reasons().catch(() => [] as string[]);
    renderFeedbackPanel(this.regions.feedback, catalog, this.completed !== null, (reason) => {
      const done = this.completed;
      if (!done) return;
      void this.client
        .reason(done.snapshotId, done.optionId, reason)
        .then(() => this.refreshFeedbackPanel())
        .catch((error) => this.surface(this.regions.feedback, error));
    });
  }

  private renderSidePanels(_: null): void {
    renderOptionsPanel(this.regions.options, this.state.currentSnapshot, this.terminalNote,
                       (snapshotId, option) => void this.select(snapshotId, option));
    if (!this.state.explanationVisible) {
      renderExplanationPanel(this.regions.explanation, null, () => undefined);
    }
  }

  private surface(region: HTMLElement, error: unknown): void {
    const message = error instanceof ApiError
      ? `${error.code}: ${error.message}`
      : String(error);
    renderErrorBanner(region, message);
  }
}

export async function bootstrap(root: Document = document): Promise<App> {
  const client = new ApiClient("");
  const regions: Regions = {
    forecasts: root.getElementById("forecast-panel") as HTMLElement,
    explanation: root.getElementById("explanation-panel") as HTMLElement,
    options: root.getElementById("options-panel") as HTMLElement,
    feedback: root.getElementById("feedback-panel") as HTMLElement,
  };
  const app = new App(client, regions);

  await client.openSession();
  const catalog = await client.catalog();

  const materialSelect = root.getElementById("material-select") as HTMLSelectElement;
  for (const material of catalog.materials) {
    const option = root.createElement("option");
    option.value = material;
    option.textContent = material;
    materialSelect.appendChild(option);
  }
  const dateInput = root.getElementById("date-input") as HTMLInputElement;
  dateInput.value = catalog.default_date;

  const load = () => void app.loadForecasts(dateInput.value, materialSelect.value);
  (root.getElementById("load-button") as HTMLButtonElement).addEventListener("click", load);
  load();

  window.addEventListener("pagehide", () => client.beaconClose());
  return app;
}

if (typeof document !== "undefined" && document.getElementById("forecast-panel")) {
  void bootstrap();
}
