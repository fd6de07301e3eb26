import { describe, expect, it } from "vitest";

import { groupKey, layoutGraph } from "../src/layout.js";
import type { ViewGraph, ViewNode } from "../src/types.js";

function node(id: string, kind: string, label: string): ViewNode {
  return { id, kind, label, metrics: {}, badge: null };
}

function graph(nodes: ViewNode[]): ViewGraph {
  return { nodes, edges: [], internal_counts: {}, provenance: "" };
}

const SAMPLE = graph([
  node("class:a.X", "Class", "a.X"),
  node("class:a.Y", "Class", "a.Y"),
  node("class:b.Z", "Class", "b.Z"),
  node("pkg:b", "Package", "b"),
]);

describe("layout", () => {
  it("is deterministic for identical input", () => {
    const hints = { direction: "TB" as const, group_by_package: true };
    const one = layoutGraph(SAMPLE, hints);
    const two = layoutGraph(SAMPLE, hints);
    expect([...one.placed.entries()].map(([k, v]) => [k, v.x, v.y])).toEqual(
      [...two.placed.entries()].map(([k, v]) => [k, v.x, v.y]),
    );
  });

  it("groups types under their package prefix", () => {
    expect(groupKey(node("class:a.X", "Class", "a.X"))).toBe("a");
    expect(groupKey(node("pkg:b", "Package", "b"))).toBe("b");
    expect(groupKey(node("class:X", "Class", "X"))).toBe("X");
  });

  it("direction hint changes the main axis", () => {
    const tb = layoutGraph(SAMPLE, { direction: "TB", group_by_package: true });
    const lr = layoutGraph(SAMPLE, { direction: "LR", group_by_package: true });
    const tbA = tb.placed.get("class:a.X")!;
    const tbB = tb.placed.get("class:b.Z")!;
    const lrA = lr.placed.get("class:a.X")!;
    const lrB = lr.placed.get("class:b.Z")!;
    // groups separate vertically in TB mode, horizontally in LR mode
    expect(tbB.y).toBeGreaterThan(tbA.y);
    expect(lrB.x).toBeGreaterThan(lrA.x);
  });

  it("every node is placed and the canvas covers them", () => {
    const result = layoutGraph(SAMPLE, { direction: "TB", group_by_package: true });
    expect(result.placed.size).toBe(SAMPLE.nodes.length);
    for (const p of result.placed.values()) {
      expect(p.x + p.width).toBeLessThanOrEqual(result.width + 1);
      expect(p.y + p.height).toBeLessThanOrEqual(result.height + 1);
    }
  });
});
