// Panel state machine. Transitions keep the layout invariants true by
// construction: an explanation or snapshot is only ever shown for the
// currently active forecast.

import type { SnapshotView } from "./types.js";

export interface PanelState {
  activeForecast: string | null;
  explanationVisible: boolean;
  currentSnapshot: SnapshotView | null;
  pendingReason: string | null;
}

export function initialState(): PanelState {
  return {
    activeForecast: null,
    explanationVisible: false,
    currentSnapshot: null,
    pendingReason: null,
  };
}

export function assertInvariants(state: PanelState): void {
  if (state.explanationVisible && state.activeForecast === null) {
    throw new Error("explanation visible without an active forecast");
  }
  if (state.currentSnapshot !== null && state.activeForecast === null) {
    throw new Error("snapshot shown without an active forecast");
  }
}

export function selectForecast(state: PanelState, forecastId: string): PanelState {
  if (state.activeForecast === forecastId) return state;
  return {
    activeForecast: forecastId,
    explanationVisible: false,
    currentSnapshot: null,
    pendingReason: null,
  };
}

export function showExplanation(state: PanelState): PanelState {
  if (state.activeForecast === null) {
    throw new Error("cannot show an explanation before choosing a forecast");
  }
  return { ...state, explanationVisible: true };
}

export function showSnapshot(state: PanelState, snapshot: SnapshotView): PanelState {
  if (state.activeForecast === null) {
    throw new Error("cannot show options before choosing a forecast");
  }
  return { ...state, currentSnapshot: snapshot };
}

export function flowFinished(state: PanelState): PanelState {
  return { ...state, currentSnapshot: null };
}

export function draftReason(state: PanelState, text: string | null): PanelState {
  return { ...state, pendingReason: text };
}

export function reset(): PanelState {
  return initialState();
}
