import type { ApiClient } from "./api.js";
import { buildRequest, type QueryFormState } from "./query.js";
import type { ClipPayload, QueryBody } from "./types.js";

export interface HistoryEntry {
  form: QueryFormState;
  seed: number;
  formula: string;
  totalMatches: number;
}

export interface SessionState {
  status: "idle" | "loading" | "ready" | "error";
  clips: ClipPayload[];
  warnings: string[];
  seed: number | null;
  formula: string;
  totalMatches: number;
  canLoadMore: boolean;
  error: string | null;
}

type Listener = (state: SessionState) => void;

// One user session: at most one in-flight query; responses that were
// superseded by a newer submit are discarded.  Query history is local to
// the session and re-running an entry replays its recorded seed, which
// reproduces the gallery exactly.
export class QuerySession {
  readonly history: HistoryEntry[] = [];
  private state: SessionState = {
    status: "idle",
    clips: [],
    warnings: [],
    seed: null,
    formula: "",
    totalMatches: 0,
    canLoadMore: false,
    error: null,
  };
  private listeners: Listener[] = [];
  private requestCounter = 0;
  private activeBody: QueryBody | null = null;
  private continuation: string | null = null;

  constructor(private readonly api: ApiClient) {}

  getState(): SessionState {
    return this.state;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private setState(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  async submit(form: QueryFormState, seed?: number): Promise<void> {
    let body: QueryBody;
    try {
      body = buildRequest(form);
    } catch (error) {
      this.setState({ status: "error", error: (error as Error).message });
      return;
    }
    if (seed !== undefined) {
      body.seed = seed;
    }
    const ticket = ++this.requestCounter;
    this.setState({ status: "loading", error: null });
    try {
      const result = await this.api.query(body);
      if (ticket !== this.requestCounter) {
        return; // superseded by a newer submit
      }
      this.activeBody = body;
      this.continuation = result.continuation;
      this.history.push({
        form: { ...form },
        seed: result.sample_seed,
        formula: result.formula,
        totalMatches: result.total_matches,
      });
      this.setState({
        status: "ready",
        clips: result.clips,
        warnings: result.warnings,
        seed: result.sample_seed,
        formula: result.formula,
        totalMatches: result.total_matches,
        canLoadMore: result.continuation !== null,
        error: null,
      });
    } catch (error) {
      if (ticket !== this.requestCounter) {
        return;
      }
      this.setState({ status: "error", error: (error as Error).message });
    }
  }

  async loadMore(): Promise<void> {
    if (this.activeBody === null || this.continuation === null) {
      return;
    }
    const ticket = this.requestCounter;
    const body = { ...this.activeBody, continuation: this.continuation };
    const result = await this.api.query(body);
    if (ticket !== this.requestCounter) {
      return; // a newer query replaced this gallery meanwhile
    }
    this.continuation = result.continuation;
    this.setState({
      clips: [...this.state.clips, ...result.clips],
      canLoadMore: result.continuation !== null,
    });
  }

  async rerun(index: number): Promise<void> {
    const entry = this.history[index];
    if (entry !== undefined) {
      await this.submit(entry.form, entry.seed);
    }
  }
}
