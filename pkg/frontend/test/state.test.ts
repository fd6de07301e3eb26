import { describe, expect, it } from "vitest";

import { acceptResponse, applyPatch, canonicalJson, createState, specsEqual } from "../src/state.js";
import type { LoopResponse, ViewGraph, ViewSpec } from "../src/types.js";

function baseSpec(): ViewSpec {
  return {
    schema_version: 1,
    view_id: "v-1",
    diagram_kind: "package",
    scope: "root",
    level: "RootPackage",
    expanded: [],
    collapsed: [],
    filters: {
      include_globs: [],
      exclude_globs: [],
      kinds: null,
      min_heat: null,
      changed_since: null,
    },
    overlays: [],
    overlay_params: {},
    highlights: [],
    focus: null,
    layout_hints: { direction: "TB", group_by_package: true },
    summary_panel: [],
    show_annotations: true,
  };
}

const emptyGraph: ViewGraph = { nodes: [], edges: [], internal_counts: {}, provenance: "p" };

function response(version: number, spec: ViewSpec, patch = {}): LoopResponse {
  return {
    session_id: "s1",
    version,
    viewspec: spec,
    viewgraph: emptyGraph,
    narration: "",
    source: "rule",
    suggestions: [],
    patch: { changed_fields: patch },
  };
}

describe("patch application", () => {
  it("applies top-level and dotted paths", () => {
    const spec = baseSpec();
    const patched = applyPatch(spec, {
      changed_fields: {
        level: { old: "RootPackage", new: "Type" },
        "filters.min_heat": { old: null, new: 0.5 },
      },
    });
    expect(patched.level).toBe("Type");
    expect(patched.filters.min_heat).toBe(0.5);
    expect(spec.level).toBe("RootPackage"); // original untouched
  });

  it("round-trips: patched old spec equals the received spec", () => {
    const before = baseSpec();
    const after = { ...baseSpec(), level: "Type", expanded: ["pkg:a"] };
    const patch = {
      changed_fields: {
        level: { old: "RootPackage", new: "Type" },
        expanded: { old: [], new: ["pkg:a"] },
      },
    };
    expect(specsEqual(applyPatch(before, patch), after)).toBe(true);
  });

  it("canonicalJson sorts keys recursively", () => {
    expect(canonicalJson({ b: 1, a: { d: 2, c: 3 } })).toBe('{"a":{"c":3,"d":2},"b":1}');
  });
});

describe("acceptResponse", () => {
  it("applies newer responses and tracks version monotonically", () => {
    const state = createState("s1");
    expect(acceptResponse(state, response(1, baseSpec()))).toBe("applied");
    expect(state.lastVersion).toBe(1);
    const next = { ...baseSpec(), level: "Type" };
    const outcome = acceptResponse(
      state,
      response(2, next, { level: { old: "RootPackage", new: "Type" } }),
    );
    expect(outcome).toBe("applied");
    expect(state.lastVersion).toBe(2);
    expect(state.viewspec?.level).toBe("Type");
  });

  it("ignores stale responses without re-render", () => {
    const state = createState("s1");
    acceptResponse(state, response(5, baseSpec()));
    const before = state.viewspec;
    expect(acceptResponse(state, response(5, { ...baseSpec(), level: "Type" }))).toBe("stale");
    expect(acceptResponse(state, response(3, baseSpec()))).toBe("stale");
    expect(state.viewspec).toBe(before);
    expect(state.lastVersion).toBe(5);
  });

  it("signals refetch when the patch does not reproduce the received spec", () => {
    const state = createState("s1");
    acceptResponse(state, response(1, baseSpec()));
    // server says only the level changed, but the spec also changed scope:
    // our held copy must have drifted, so a full refetch is demanded
    const drifted = { ...baseSpec(), level: "Type", scope: "pkg:shop" };
    const outcome = acceptResponse(
      state,
      response(2, drifted, { level: { old: "RootPackage", new: "Type" } }),
    );
    expect(outcome).toBe("refetch");
    expect(state.lastVersion).toBe(2); // still monotone
  });
});
