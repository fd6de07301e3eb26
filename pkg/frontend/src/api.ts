// Thin fetch client for the /api endpoints.

import type {
  ApiErrorBody,
  Intent,
  LoopResponse,
  SessionData,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ApiErrorBody,
  ) {
    super(body.message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(path, init);
  if (!resp.ok) {
    let body: ApiErrorBody = { error: "http_error", message: resp.statusText, violations: [] };
    try {
      body = (await resp.json()) as ApiErrorBody;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(resp.status, body);
  }
  return (await resp.json()) as T;
}

function post(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  };
}

export function listSessions(): Promise<{ sessions: { id: string; name: string; version: number }[] }> {
  return request("/api/sessions");
}

export function createSession(name: string): Promise<SessionData> {
  return request("/api/sessions", post({ name }));
}

export function getSession(id: string): Promise<SessionData> {
  return request(`/api/sessions/${id}`);
}

/** Conditional session probe; resolves null when the version is unchanged. */
export async function probeSession(id: string, lastVersion: number): Promise<number | null> {
  const resp = await fetch(`/api/sessions/${id}`, {
    headers: { "If-None-Match": `"${lastVersion}"` },
  });
  if (resp.status === 304) return null;
  if (!resp.ok) throw new ApiError(resp.status, await resp.json());
  const data = (await resp.json()) as SessionData;
  return data.version;
}

export function getView(id: string): Promise<LoopResponse> {
  return request(`/api/sessions/${id}/view`);
}

export function postQuery(id: string, utterance: string, actor: string): Promise<LoopResponse> {
  return request(`/api/sessions/${id}/query`, post({ utterance, actor }));
}

export function postIntent(id: string, intent: Intent, actor: string): Promise<LoopResponse> {
  return request(`/api/sessions/${id}/intent`, post({ ...intent, actor }));
}

export function postAnnotation(
  id: string,
  entity: string,
  text: string,
  author: string,
): Promise<{ annotation: unknown; version: number }> {
  return request(`/api/sessions/${id}/annotations`, post({ entity, text, author, kind: "note" }));
}
