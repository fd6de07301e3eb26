// Deterministic node placement honoring the server's layout hints. Positions
// are ephemeral: they are recomputed from the received graph on every render
// and never sent back.

import type { LayoutHints, ViewGraph, ViewNode } from "./types.js";

export interface Placed {
  node: ViewNode;
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface LayoutResult {
  placed: Map<string, Placed>;
  width: number;
  height: number;
}

const NODE_H = 34;
const GAP_X = 28;
const GAP_Y = 26;
const GROUP_GAP = 48;
const CHAR_W = 7.2;

function nodeWidth(node: ViewNode): number {
  return Math.max(90, Math.round(node.label.length * CHAR_W) + 28);
}

/** Grouping key: the label's package-ish prefix, or the label itself. */
export function groupKey(node: ViewNode): string {
  if (node.kind === "Package") return node.label;
  const dot = node.label.lastIndexOf(".");
  return dot === -1 ? node.label : node.label.slice(0, dot);
}

export function layoutGraph(graph: ViewGraph, hints: LayoutHints): LayoutResult {
  const groups = new Map<string, ViewNode[]>();
  for (const node of graph.nodes) {
    const key = hints.group_by_package ? groupKey(node) : "";
    const bucket = groups.get(key);
    if (bucket) bucket.push(node);
    else groups.set(key, [node]);
  }
  const groupKeys = [...groups.keys()].sort();

  const placed = new Map<string, Placed>();
  let mainOffset = 0; // along the hint direction
  let crossExtent = 0;
  for (const key of groupKeys) {
    const members = groups.get(key)!;
    members.sort((a, b) => (a.label < b.label ? -1 : 1));
    const columns = Math.max(1, Math.ceil(Math.sqrt(members.length)));
    let groupMain = 0;
    let groupCross = 0;
    members.forEach((node, i) => {
      const col = i % columns;
      const row = Math.floor(i / columns);
      const w = nodeWidth(node);
      const cellW = Math.max(...members.map(nodeWidth)) + GAP_X;
      const cellH = NODE_H + GAP_Y;
      let x: number, y: number;
      if (hints.direction === "LR") {
        x = mainOffset + row * cellW;
        y = col * cellH;
        groupMain = Math.max(groupMain, (row + 1) * cellW);
        groupCross = Math.max(groupCross, (col + 1) * cellH);
      } else {
        x = col * cellW;
        y = mainOffset + row * cellH;
        groupMain = Math.max(groupMain, (row + 1) * cellH);
        groupCross = Math.max(groupCross, (col + 1) * cellW);
      }
      placed.set(node.id, { node, x, y, width: w, height: NODE_H });
    });
    mainOffset += groupMain + GROUP_GAP;
    crossExtent = Math.max(crossExtent, groupCross);
  }
  const width = hints.direction === "LR" ? mainOffset : crossExtent + GAP_X;
  const height = hints.direction === "LR" ? crossExtent + GAP_Y : mainOffset;
  return { placed, width: Math.max(width, 320), height: Math.max(height, 200) };
}
