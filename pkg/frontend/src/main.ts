// Application wiring: session picker, query box with suggestions, diagram,
// side panel (summaries, annotations, trace), and shared-session polling.

import {
  ApiError,
  createSession,
  getSession,
  getView,
  listSessions,
  postAnnotation,
  postIntent,
  postQuery,
  probeSession,
} from "./api.js";
import { intentForCollapse, intentForDoubleClick, intentLabel } from "./intents.js";
import { SessionPoller } from "./poll.js";
import { DiagramRenderer } from "./render.js";
import { acceptResponse, createState } from "./state.js";
import type { Intent, LoopResponse, SessionData, ViewNode } from "./types.js";

const ACTOR = `user-${Math.floor(Math.random() * 10000)}`;

function el<T extends HTMLElement>(id: string): T {
  const got = document.getElementById(id);
  if (!got) throw new Error(`missing element #${id}`);
  return got as T;
}

const state = createState("");
let renderer: DiagramRenderer;
let poller: SessionPoller | null = null;

async function boot(): Promise<void> {
  renderer = new DiagramRenderer(el("diagram") as unknown as SVGSVGElement, {
    onNodeDoubleClick: (node) => void handleDoubleClick(node),
    onNodeSelect: (node) => setSelection(node),
  });
  el<HTMLFormElement>("query-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    void submitQuery();
  });
  el<HTMLButtonElement>("collapse-button").addEventListener("click", () => {
    const intent = intentForCollapse(state.selection);
    if (intent) void sendIntent(intent);
  });
  el<HTMLButtonElement>("new-session").addEventListener("click", () => void newSession());
  el<HTMLSelectElement>("session-select").addEventListener("change", (ev) => {
    const id = (ev.target as HTMLSelectElement).value;
    if (id) void openSession(id);
  });
  el<HTMLFormElement>("annotation-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    void submitAnnotation();
  });

  await refreshSessionList();
  const existing = el<HTMLSelectElement>("session-select").value;
  if (existing) {
    await openSession(existing);
  } else {
    await newSession();
  }
}

async function refreshSessionList(): Promise<void> {
  const { sessions } = await listSessions();
  const select = el<HTMLSelectElement>("session-select");
  select.innerHTML = "";
  for (const s of sessions) {
    const option = document.createElement("option");
    option.value = s.id;
    option.textContent = `${s.name} (${s.id})`;
    if (s.id === state.sessionId) option.selected = true;
    select.appendChild(option);
  }
}

async function newSession(): Promise<void> {
  const session = await createSession(`view-${Date.now() % 100000}`);
  await refreshSessionList();
  el<HTMLSelectElement>("session-select").value = session.id;
  await openSession(session.id);
}

async function openSession(id: string): Promise<void> {
  poller?.stop();
  state.sessionId = id;
  state.lastVersion = 0;
  state.viewspec = null;
  state.viewgraph = null;
  renderer.resetViewport();
  await fullRefetch();
  startPolling();
}

async function fullRefetch(): Promise<void> {
  try {
    const view = await getView(state.sessionId);
    state.lastVersion = view.version;
    state.viewspec = view.viewspec;
    state.viewgraph = view.viewgraph;
    renderView(view);
    const session = await getSession(state.sessionId);
    renderSidePanel(session);
  } catch (err) {
    renderer.renderError(errorMessage(err));
  }
}

function startPolling(): void {
  poller = new SessionPoller({
    fetchVersion: () => probeSession(state.sessionId, state.lastVersion),
    onNewer: () => {
      void (async () => {
        await fullRefetch();
        const session = await getSession(state.sessionId);
        const steps = session.trace.steps;
        const actor = steps.length ? steps[steps.length - 1].actor : "someone";
        if (actor !== ACTOR) toast(`updated by ${actor}`);
      })();
    },
    onOffline: (offline) => {
      el("offline-banner").hidden = !offline;
    },
    isPaused: () => state.pendingRequest,
    lastSeen: () => state.lastVersion,
  });
  poller.start();
}

async function handleDoubleClick(node: ViewNode): Promise<void> {
  const intent = intentForDoubleClick(node);
  if (intent) await sendIntent(intent);
}

function setSelection(node: ViewNode | null): void {
  state.selection = node?.id ?? null;
  el("selection-label").textContent = node ? node.label : "nothing selected";
  el<HTMLButtonElement>("collapse-button").disabled = node === null;
}

async function sendIntent(intent: Intent): Promise<void> {
  if (state.pendingRequest) return;
  state.pendingRequest = true;
  try {
    const resp = await postIntent(state.sessionId, intent, ACTOR);
    await foldResponse(resp);
  } catch (err) {
    showQueryError(errorMessage(err));
  } finally {
    state.pendingRequest = false;
  }
}

async function submitQuery(): Promise<void> {
  const input = el<HTMLInputElement>("query-input");
  const utterance = input.value.trim();
  if (!utterance || state.pendingRequest) return;
  state.pendingRequest = true;
  showQueryError("");
  try {
    const resp = await postQuery(state.sessionId, utterance, ACTOR);
    input.value = "";
    await foldResponse(resp);
  } catch (err) {
    showQueryError(errorMessage(err));
  } finally {
    state.pendingRequest = false;
  }
}

async function submitAnnotation(): Promise<void> {
  const text = el<HTMLInputElement>("annotation-input").value.trim();
  if (!text || !state.selection) return;
  try {
    await postAnnotation(state.sessionId, state.selection, text, ACTOR);
    el<HTMLInputElement>("annotation-input").value = "";
    await fullRefetch();
  } catch (err) {
    showQueryError(errorMessage(err));
  }
}

async function foldResponse(resp: LoopResponse): Promise<void> {
  const outcome = acceptResponse(state, resp);
  if (outcome === "refetch") {
    // the held spec drifted from the server's: pull everything fresh
    await fullRefetch();
    return;
  }
  if (outcome === "stale") return;
  renderView(resp);
  const session = await getSession(state.sessionId);
  renderSidePanel(session);
}

function renderView(resp: LoopResponse): void {
  renderer.render(resp.viewgraph, resp.viewspec.layout_hints);
  el("narration").textContent = resp.narration || "";
  el("source-tag").textContent = resp.source ? `[${resp.source}]` : "";
  const chips = el("suggestions");
  chips.innerHTML = "";
  for (const suggestion of resp.suggestions ?? []) {
    const button = document.createElement("button");
    button.type = "button";
    button.className = "chip";
    button.textContent = intentLabel(suggestion);
    button.addEventListener("click", () => void sendIntent(suggestion));
    chips.appendChild(button);
  }
}

function renderSidePanel(session: SessionData): void {
  const summaries = el("summaries");
  summaries.innerHTML = "";
  for (const item of session.viewspec.summary_panel) {
    const entry = document.createElement("p");
    entry.className = `summary summary-${item.provenance}`;
    entry.textContent = item.text;
    summaries.appendChild(entry);
  }
  const annotations = el("annotations");
  annotations.innerHTML = "";
  if (session.viewspec.show_annotations) {
    for (const a of session.annotations) {
      const entry = document.createElement("li");
      entry.textContent = `${a.entity.split(":").pop()}: ${a.text} (${a.author})`;
      annotations.appendChild(entry);
    }
  }
  const trace = el("trace");
  trace.innerHTML = "";
  for (const step of session.trace.steps.slice(-12).reverse()) {
    const entry = document.createElement("li");
    entry.textContent = `${step.actor}: ${intentLabel(step.intent)}`;
    trace.appendChild(entry);
  }
}

function showQueryError(message: string): void {
  const banner = el("query-error");
  banner.textContent = message;
  banner.hidden = message === "";
}

function errorMessage(err: unknown): string {
  if (err instanceof ApiError) return err.body.message;
  return String(err);
}

let toastTimer: ReturnType<typeof setTimeout> | null = null;
function toast(message: string): void {
  const node = el("toast");
  node.textContent = message;
  node.hidden = false;
  if (toastTimer) clearTimeout(toastTimer);
  toastTimer = setTimeout(() => {
    node.hidden = true;
  }, 4000);
}

void boot();
