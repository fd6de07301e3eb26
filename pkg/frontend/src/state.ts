// Client view state. The server owns the spec; the client only verifies that
// the incremental patch it received reproduces the spec it was sent. Any
// discrepancy means our copy drifted and a full refetch is required.

import type { LoopResponse, ViewGraph, ViewSpec, ViewSpecPatch } from "./types.js";

export interface ClientViewState {
  sessionId: string;
  lastVersion: number;
  viewgraph: ViewGraph | null;
  viewspec: ViewSpec | null;
  pendingRequest: boolean;
  selection: string | null;
}

export function createState(sessionId: string): ClientViewState {
  return {
    sessionId,
    lastVersion: 0,
    viewgraph: null,
    viewspec: null,
    pendingRequest: false,
    selection: null,
  };
}

/** JSON with recursively sorted keys, for spec equality checks. */
export function canonicalJson(value: unknown): string {
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([k, v]) => JSON.stringify(k) + ":" + canonicalJson(v));
    return "{" + entries.join(",") + "}";
  }
  return JSON.stringify(value);
}

export function specsEqual(a: ViewSpec, b: ViewSpec): boolean {
  return canonicalJson(a) === canonicalJson(b);
}

/** Apply a field-path patch ("level", "filters.min_heat") to a spec copy. */
export function applyPatch(spec: ViewSpec, patch: ViewSpecPatch): ViewSpec {
  const copy = JSON.parse(JSON.stringify(spec)) as ViewSpec;
  const target = copy as unknown as Record<string, unknown>;
  for (const [path, change] of Object.entries(patch.changed_fields)) {
    const dot = path.indexOf(".");
    if (dot === -1) {
      target[path] = change.new;
    } else {
      const head = path.slice(0, dot);
      const rest = path.slice(dot + 1);
      const inner = target[head] as Record<string, unknown>;
      inner[rest] = change.new;
    }
  }
  return copy;
}

export type AcceptResult = "applied" | "stale" | "refetch";

/**
 * Fold a mutation response into the state.
 *
 * Returns "stale" when the response is not newer than what we hold (no
 * re-render), "refetch" when the patch check failed and the caller must pull
 * the full view again, and "applied" otherwise. Version never goes backwards.
 */
export function acceptResponse(state: ClientViewState, resp: LoopResponse): AcceptResult {
  if (resp.version <= state.lastVersion) {
    return "stale";
  }
  let consistent = true;
  if (state.viewspec !== null) {
    const patched = applyPatch(state.viewspec, resp.patch);
    consistent = specsEqual(patched, resp.viewspec);
  }
  state.lastVersion = resp.version;
  state.viewspec = resp.viewspec;
  state.viewgraph = resp.viewgraph;
  return consistent ? "applied" : "refetch";
}
