// Shapes of the JSON API responses the UI consumes.

export interface ForecastView {
  forecast_id: string;
  material_id: string;
  client_id: string;
  date: string;
  quantity: number;
  edited: boolean;
  model_id: string;
}

export interface AttributionView {
  feature_name: string;
  weight: number;
}

export interface ExplanationView {
  explanation_id: string;
  forecast_id: string;
  attributions: AttributionView[];
  fidelity: number;
}

export interface OptionView {
  option_id: string;
  kind: string;
  rank: number;
  transport_id: string | null;
  payload: Record<string, unknown>;
}

export interface SnapshotView {
  snapshot_id: string;
  forecast_id: string;
  stage: string;
  position: number;
  options: OptionView[];
}

export interface SelectionView {
  terminal: boolean;
  snapshot: SnapshotView | null;
  committed_transport_id: string | null;
  committed_quantity: number | null;
  created_transport: boolean;
}

export interface CatalogView {
  materials: string[];
  clients: string[];
  first_date: string;
  last_date: string;
  default_date: string;
}

export interface SuggestionView {
  rank: number;
  target_kind: string;
  target_id: string;
  informativeness: number;
  rationale: string;
}

export interface TraceView {
  origin_forecast: string;
  path: string[];
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}
