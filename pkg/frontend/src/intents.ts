// Gesture-to-intent mapping. The client never edits the spec itself; every
// interaction becomes a typed intent for the server to apply.

import type { Intent, ViewNode } from "./types.js";

const EXPANDABLE = new Set(["Package", "Class", "Interface", "Enum"]);

export function intentForDoubleClick(node: ViewNode): Intent | null {
  if (!EXPANDABLE.has(node.kind)) return null;
  return { type: "expand", entity: node.id };
}

export function intentForCollapse(selection: string | null): Intent | null {
  if (!selection) return null;
  return { type: "collapse", entity: selection };
}

export function intentLabel(intent: Intent): string {
  const name = (id: unknown) =>
    typeof id === "string" && id.includes(":") ? id.split(":", 2)[1] : String(id ?? "");
  switch (intent.type) {
    case "expand":
      return `Expand ${name(intent.entity)}`;
    case "collapse":
      return `Collapse ${name(intent.entity)}`;
    case "show_cochange":
      return `Co-changes of ${name(intent.entity)}`;
    case "compare_versions":
      return `Compare ${intent.ref_before} vs ${intent.ref_after}`;
    case "filter_changed":
      return "Changed since last release";
    case "overlay_heat":
      return "Show change heat";
    case "summarize":
      return `Summarize ${name(intent.scope)}`;
    case "set_level":
      return `Level: ${intent.level}`;
    case "reset_view":
      return "Reset view";
    default:
      return intent.type;
  }
}
