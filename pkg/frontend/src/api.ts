import type {
  ApiErrorBody,
  ClipPayload,
  PredicateGroups,
  QueryBody,
  QueryResultPayload,
} from "./types.js";

export interface HttpResponse {
  status: number;
  body: unknown;
}

// The transport is injectable so tests can run the client against an
// in-memory fixture server implementing the same wire contract.
export type Transport = (
  path: string,
  init?: { method?: string; body?: unknown },
) => Promise<HttpResponse>;

export const fetchTransport: Transport = async (path, init) => {
  const response = await fetch(path, {
    method: init?.method ?? "GET",
    headers: init?.body !== undefined ? { "Content-Type": "application/json" } : undefined,
    body: init?.body !== undefined ? JSON.stringify(init.body) : undefined,
  });
  return { status: response.status, body: await response.json() };
};

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly field?: string,
  ) {
    super(message);
  }
}

function raiseFor(status: number, body: unknown): never {
  const error = body as ApiErrorBody;
  throw new ApiError(
    status,
    error?.code ?? "unknown_error",
    error?.message ?? `request failed with status ${status}`,
    error?.field,
  );
}

export class ApiClient {
  constructor(private readonly transport: Transport = fetchTransport) {}

  async predicates(): Promise<PredicateGroups> {
    const { status, body } = await this.transport("/api/predicates");
    if (status !== 200) raiseFor(status, body);
    return body as PredicateGroups;
  }

  async query(body: QueryBody): Promise<QueryResultPayload> {
    const response = await this.transport("/api/query", { method: "POST", body });
    if (response.status !== 200) raiseFor(response.status, response.body);
    return response.body as QueryResultPayload;
  }

  async clip(clipId: string): Promise<ClipPayload> {
    const { status, body } = await this.transport(
      `/api/clips/${encodeURIComponent(clipId)}`,
    );
    if (status !== 200) raiseFor(status, body);
    return body as ClipPayload;
  }

  async stats(): Promise<Record<string, unknown>> {
    const { status, body } = await this.transport("/api/stats");
    if (status !== 200) raiseFor(status, body);
    return body as Record<string, unknown>;
  }
}
