import { describe, expect, it } from "vitest";

import {
  assertInvariants,
  draftReason,
  flowFinished,
  initialState,
  selectForecast,
  showExplanation,
  showSnapshot,
} from "../src/state.js";
import type { SnapshotView } from "../src/types.js";

const snapshot: SnapshotView = {
  snapshot_id: "sn-1",
  forecast_id: "fc-1",
  stage: "choose_transport",
  position: 1,
  options: [],
};

describe("panel state invariants", () => {
  it("starts empty and valid", () => {
    const state = initialState();
    expect(state.activeForecast).toBeNull();
    expect(() => assertInvariants(state)).not.toThrow();
  });

  it("never shows an explanation without an active forecast", () => {
    expect(() => showExplanation(initialState())).toThrow();
    const state = showExplanation(selectForecast(initialState(), "fc-1"));
    expect(state.explanationVisible).toBe(true);
    expect(() => assertInvariants(state)).not.toThrow();
  });

  it("never shows a snapshot without an active forecast", () => {
    expect(() => showSnapshot(initialState(), snapshot)).toThrow();
    const state = showSnapshot(selectForecast(initialState(), "fc-1"), snapshot);
    expect(state.currentSnapshot?.snapshot_id).toBe("sn-1");
    expect(() => assertInvariants(state)).not.toThrow();
  });

  it("switching forecast clears dependent panels", () => {
    let state = selectForecast(initialState(), "fc-1");
    state = showExplanation(state);
    state = showSnapshot(state, snapshot);
    state = selectForecast(state, "fc-2");
    expect(state.explanationVisible).toBe(false);
    expect(state.currentSnapshot).toBeNull();
    expect(state.pendingReason).toBeNull();
  });

  it("selecting the same forecast keeps state", () => {
    const state = showExplanation(selectForecast(initialState(), "fc-1"));
    expect(selectForecast(state, "fc-1")).toBe(state);
  });

  it("finishing a flow drops only the snapshot", () => {
    let state = showSnapshot(selectForecast(initialState(), "fc-1"), snapshot);
    state = draftReason(state, "late friday slot");
    state = flowFinished(state);
    expect(state.currentSnapshot).toBeNull();
    expect(state.activeForecast).toBe("fc-1");
    expect(state.pendingReason).toBe("late friday slot");
  });
});
