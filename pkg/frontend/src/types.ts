// Wire types for the /api endpoints. The server is authoritative: the client
// renders what it receives and sends back typed intents, nothing more.

export interface ViewNode {
  id: string;
  kind: string;
  label: string;
  metrics: Record<string, number>;
  badge: string | null;
}

export interface ViewEdge {
  source: string;
  target: string;
  kind: string;
  multiplicity: number;
}

export interface ViewGraph {
  nodes: ViewNode[];
  edges: ViewEdge[];
  internal_counts: Record<string, number>;
  provenance: string;
}

export interface LayoutHints {
  direction: "TB" | "LR";
  group_by_package: boolean;
}

export interface ViewSpec {
  schema_version: number;
  view_id: string;
  diagram_kind: string;
  scope: string;
  level: string;
  expanded: string[];
  collapsed: string[];
  filters: Record<string, unknown>;
  overlays: string[];
  overlay_params: Record<string, unknown>;
  highlights: string[];
  focus: { entity: string; hops: number } | null;
  layout_hints: LayoutHints;
  summary_panel: { text: string; provenance: string }[];
  show_annotations: boolean;
}

export interface Intent {
  type: string;
  [field: string]: unknown;
}

export interface ViewSpecPatch {
  changed_fields: Record<string, { old: unknown; new: unknown }>;
}

export interface LoopResponse {
  session_id: string;
  version: number;
  viewspec: ViewSpec;
  viewgraph: ViewGraph;
  narration: string;
  source: string;
  suggestions: Intent[];
  patch: ViewSpecPatch;
}

export interface Annotation {
  id: string;
  entity: string;
  author: string;
  kind: string;
  text: string;
  created_at: number;
}

export interface TraceStep {
  timestamp: number;
  actor: string;
  intent: Intent;
  resulting_viewspec_hash: string;
}

export interface SessionData {
  id: string;
  name: string;
  viewspec: ViewSpec;
  trace: { steps: TraceStep[] };
  annotations: Annotation[];
  version: number;
  updated_at: number;
}

export interface ApiErrorBody {
  error: string;
  message: string;
  violations: { path: string; reason: string }[];
}
