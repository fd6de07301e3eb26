// SVG rendering of a view graph: node-link diagram with heat fills, diff
// badges, internal-count markers, a heat legend, and built-in zoom and pan.
// A malformed payload renders an error banner, never a blank screen.

import { BADGE_COLORS, KIND_FILL, heatColor, legendStops } from "./color.js";
import { layoutGraph } from "./layout.js";
import type { LayoutHints, ViewGraph, ViewNode } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface RenderCallbacks {
  onNodeDoubleClick: (node: ViewNode) => void;
  onNodeSelect: (node: ViewNode | null) => void;
}

interface ViewBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

export class DiagramRenderer {
  private viewBox: ViewBox | null = null;
  private selection: string | null = null;

  constructor(
    private svg: SVGSVGElement,
    private callbacks: RenderCallbacks,
  ) {
    this.installZoomPan();
  }

  render(graph: ViewGraph, hints: LayoutHints): void {
    try {
      this.renderInner(graph, hints);
    } catch (err) {
      this.renderError(`render failed: ${String(err)}`);
    }
  }

  renderError(message: string): void {
    this.clear();
    const text = this.textEl(12, 24, message);
    text.setAttribute("class", "error-banner");
    this.svg.appendChild(text);
  }

  private clear(): void {
    while (this.svg.firstChild) this.svg.removeChild(this.svg.firstChild);
  }

  private renderInner(graph: ViewGraph, hints: LayoutHints): void {
    this.clear();
    if (!graph || !Array.isArray(graph.nodes)) {
      this.renderError("malformed view payload");
      return;
    }
    if (graph.nodes.length === 0) {
      const placeholder = this.textEl(20, 40, "empty view: nothing matches the current spec");
      placeholder.setAttribute("class", "placeholder");
      this.svg.appendChild(placeholder);
      return;
    }

    const { placed, width, height } = layoutGraph(graph, hints);
    if (this.viewBox === null) {
      this.viewBox = { x: -20, y: -20, w: width + 40, h: height + 40 };
    }
    this.applyViewBox();

    this.appendArrowDefs();
    const edgeLayer = document.createElementNS(SVG_NS, "g");
    const nodeLayer = document.createElementNS(SVG_NS, "g");
    this.svg.appendChild(edgeLayer);
    this.svg.appendChild(nodeLayer);

    for (const edge of graph.edges) {
      const from = placed.get(edge.source);
      const to = placed.get(edge.target);
      if (!from || !to) continue;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(from.x + from.width / 2));
      line.setAttribute("y1", String(from.y + from.height / 2));
      line.setAttribute("x2", String(to.x + to.width / 2));
      line.setAttribute("y2", String(to.y + to.height / 2));
      line.setAttribute("class", `edge edge-${edge.kind.toLowerCase()}`);
      if (edge.kind === "Dependency" || edge.kind === "Implements") {
        line.setAttribute("stroke-dasharray", "6 4");
      }
      line.setAttribute("marker-end", edgeMarker(edge.kind));
      edgeLayer.appendChild(line);
      if (edge.multiplicity > 1) {
        const mx = (from.x + to.x) / 2 + from.width / 2;
        const my = (from.y + to.y) / 2 + from.height / 2 - 4;
        const label = this.textEl(mx, my, `x${edge.multiplicity}`);
        label.setAttribute("class", "edge-label");
        edgeLayer.appendChild(label);
      }
    }

    const internal = graph.internal_counts ?? {};
    for (const item of placed.values()) {
      nodeLayer.appendChild(this.nodeGroup(item.node, item, internal[item.node.id]));
    }

    if (graph.nodes.some((n) => "heat" in (n.metrics ?? {}))) {
      this.svg.appendChild(this.legendGroup());
    }
  }

  private nodeGroup(node: ViewNode, pos: { x: number; y: number; width: number; height: number }, internalCount?: number): SVGGElement {
    const g = document.createElementNS(SVG_NS, "g");
    g.setAttribute("class", `node node-${node.kind.toLowerCase()}`);
    g.setAttribute("data-id", node.id);

    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(pos.x));
    rect.setAttribute("y", String(pos.y));
    rect.setAttribute("width", String(pos.width));
    rect.setAttribute("height", String(pos.height));
    rect.setAttribute("rx", node.kind === "Package" ? "2" : "8");
    const heat = node.metrics?.heat;
    rect.setAttribute(
      "fill",
      heat !== undefined ? heatColor(heat) : KIND_FILL[node.kind] ?? "#ffffff",
    );
    if (this.selection === node.id) rect.setAttribute("class", "selected");
    g.appendChild(rect);

    const label = this.textEl(pos.x + pos.width / 2, pos.y + pos.height / 2 + 4, node.label);
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "node-label");
    g.appendChild(label);

    if (node.badge) {
      const badge = document.createElementNS(SVG_NS, "circle");
      badge.setAttribute("cx", String(pos.x + pos.width - 6));
      badge.setAttribute("cy", String(pos.y + 6));
      badge.setAttribute("r", "5");
      badge.setAttribute("fill", BADGE_COLORS[node.badge] ?? "#5f6368");
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = node.badge;
      badge.appendChild(title);
      g.appendChild(badge);
    }
    if (internalCount && internalCount > 0) {
      const marker = this.textEl(pos.x + 6, pos.y + 12, `↺${internalCount}`);
      marker.setAttribute("class", "internal-count");
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = `${internalCount} relations inside this node`;
      marker.appendChild(title);
      g.appendChild(marker);
    }

    g.addEventListener("dblclick", (ev) => {
      ev.preventDefault();
      this.callbacks.onNodeDoubleClick(node);
    });
    g.addEventListener("click", () => {
      this.selection = this.selection === node.id ? null : node.id;
      this.callbacks.onNodeSelect(this.selection === null ? null : node);
    });
    return g;
  }

  private legendGroup(): SVGGElement {
    const g = document.createElementNS(SVG_NS, "g");
    g.setAttribute("class", "heat-legend");
    const box = this.viewBox!;
    const x = box.x + 12;
    let y = box.y + 16;
    const caption = this.textEl(x, y, "change heat");
    caption.setAttribute("class", "legend-caption");
    g.appendChild(caption);
    y += 8;
    for (const stop of legendStops(5)) {
      const swatch = document.createElementNS(SVG_NS, "rect");
      swatch.setAttribute("x", String(x));
      swatch.setAttribute("y", String(y));
      swatch.setAttribute("width", "18");
      swatch.setAttribute("height", "10");
      swatch.setAttribute("fill", stop.color);
      g.appendChild(swatch);
      const label = this.textEl(x + 24, y + 9, stop.value.toFixed(2));
      label.setAttribute("class", "legend-label");
      g.appendChild(label);
      y += 14;
    }
    return g;
  }

  private textEl(x: number, y: number, content: string): SVGTextElement {
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(x));
    text.setAttribute("y", String(y));
    text.textContent = content;
    return text;
  }

  private appendArrowDefs(): void {
    const defs = document.createElementNS(SVG_NS, "defs");
    defs.innerHTML = `
      <marker id="arrow-plain" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse">
        <path d="M 0 0 L 10 5 L 0 10 z" fill="#5f6368"></path>
      </marker>
      <marker id="arrow-hollow" viewBox="0 0 12 12" refX="11" refY="6" markerWidth="9" markerHeight="9" orient="auto-start-reverse">
        <path d="M 1 1 L 11 6 L 1 11 z" fill="white" stroke="#5f6368"></path>
      </marker>`;
    this.svg.appendChild(defs);
  }

  private installZoomPan(): void {
    let dragging = false;
    let last: { x: number; y: number } | null = null;
    this.svg.addEventListener("wheel", (ev) => {
      if (this.viewBox === null) return;
      ev.preventDefault();
      const factor = ev.deltaY > 0 ? 1.15 : 1 / 1.15;
      const box = this.viewBox;
      const cx = box.x + box.w / 2;
      const cy = box.y + box.h / 2;
      box.w *= factor;
      box.h *= factor;
      box.x = cx - box.w / 2;
      box.y = cy - box.h / 2;
      this.applyViewBox();
    });
    this.svg.addEventListener("mousedown", (ev) => {
      dragging = true;
      last = { x: ev.clientX, y: ev.clientY };
    });
    window.addEventListener("mouseup", () => {
      dragging = false;
      last = null;
    });
    window.addEventListener("mousemove", (ev) => {
      if (!dragging || last === null || this.viewBox === null) return;
      const scale = this.viewBox.w / this.svg.clientWidth;
      this.viewBox.x -= (ev.clientX - last.x) * scale;
      this.viewBox.y -= (ev.clientY - last.y) * scale;
      last = { x: ev.clientX, y: ev.clientY };
      this.applyViewBox();
    });
  }

  private applyViewBox(): void {
    if (this.viewBox === null) return;
    const { x, y, w, h } = this.viewBox;
    this.svg.setAttribute("viewBox", `${x} ${y} ${w} ${h}`);
  }

  resetViewport(): void {
    this.viewBox = null;
  }
}

function edgeMarker(kind: string): string {
  return kind === "Extends" || kind === "Implements"
    ? "url(#arrow-hollow)"
    : "url(#arrow-plain)";
}
