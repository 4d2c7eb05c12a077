/**
 * Typed client for the refspect analysis service.
 *
 * Every response carries the session's staleness counter; mutations
 * send the counter the client last saw so a concurrent change surfaces
 * as a 409 conflict instead of silently clobbering state.
 */

export interface SpectrumPoint {
  rpy: number;
  ncr: number;
  median5: number;
  dev: number;
}

export interface SpectrumResponse {
  counter: number;
  year_range: [number, number] | null;
  points: SpectrumPoint[];
  warnings: string[];
}

export interface ClusterRef {
  cluster_id: string;
  rpy: number | null;
  ncr: number;
  author: string;
  source: string | null;
  volume: number | null;
  page: string | null;
  doi: string | null;
  n_variants: number;
  canonical: string;
  variants: string[];
}

export interface YearReferencesResponse {
  counter: number;
  rpy: number;
  references: ClusterRef[];
}

export interface PeakEntry {
  rpy: number;
  dev: number;
  ncr: number;
  top_clusters: { cluster_id: string; ncr: number }[];
}

export interface PeaksResponse {
  counter: number;
  peaks: PeakEntry[];
}

export interface MarkersState {
  cluster_ids: string[];
  mode: "or" | "and";
}

export interface LedgerEntry {
  op: string;
  args: Record<string, unknown>;
  timestamp: string;
  note: string;
}

export interface SessionResponse {
  counter: number;
  session_id: string;
  token: string;
  fingerprint: string;
  num_records: number;
  num_clusters: number;
  filters: Record<string, unknown>;
  markers: MarkersState;
  ledger: LedgerEntry[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

/** The service surface the explorer depends on; tests substitute fakes. */
export interface ExplorerApi {
  getSession(): Promise<SessionResponse>;
  getSpectrum(range?: [number, number]): Promise<SpectrumResponse>;
  getYearReferences(rpy: number, k?: number): Promise<YearReferencesResponse>;
  getPeaks(minDeviation: number): Promise<PeaksResponse>;
  mergeClusters(ids: string[], counter: number): Promise<{ counter: number; cluster_id: string }>;
  splitCluster(
    id: string,
    partition: string[][],
    counter: number,
  ): Promise<{ counter: number; cluster_ids: string[] }>;
  correctYear(id: string, rpy: number, counter: number): Promise<{ counter: number; cluster_id: string }>;
  setMarkers(ids: string[], mode: "or" | "and", counter: number): Promise<{ counter: number; markers: MarkersState }>;
  clearMarkers(): Promise<{ counter: number; markers: MarkersState }>;
  saveSession(path?: string): Promise<{ counter: number; path: string }>;
}

export class HttpExplorerApi implements ExplorerApi {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let parsed: ApiErrorBody;
      try {
        parsed = (await response.json()) as ApiErrorBody;
      } catch {
        parsed = { code: "http_error", message: response.statusText, detail: "" };
      }
      throw new ApiError(response.status, parsed);
    }
    return (await response.json()) as T;
  }

  getSession(): Promise<SessionResponse> {
    return this.request("GET", "/session");
  }

  getSpectrum(range?: [number, number]): Promise<SpectrumResponse> {
    const query = range ? `?from=${range[0]}&to=${range[1]}` : "";
    return this.request("GET", `/spectrum${query}`);
  }

  getYearReferences(rpy: number, k = 50): Promise<YearReferencesResponse> {
    return this.request("GET", `/years/${rpy}/references?k=${k}`);
  }

  getPeaks(minDeviation: number): Promise<PeaksResponse> {
    return this.request("GET", `/peaks?min_deviation=${minDeviation}`);
  }

  mergeClusters(ids: string[], counter: number): Promise<{ counter: number; cluster_id: string }> {
    return this.request("POST", "/clusters/merge", { ids, counter });
  }

  splitCluster(
    id: string,
    partition: string[][],
    counter: number,
  ): Promise<{ counter: number; cluster_ids: string[] }> {
    return this.request("POST", `/clusters/${id}/split`, { partition, counter });
  }

  correctYear(id: string, rpy: number, counter: number): Promise<{ counter: number; cluster_id: string }> {
    return this.request("POST", `/clusters/${id}/year`, { rpy, counter });
  }

  setMarkers(
    ids: string[],
    mode: "or" | "and",
    counter: number,
  ): Promise<{ counter: number; markers: MarkersState }> {
    return this.request("PUT", "/markers", { cluster_ids: ids, mode, counter });
  }

  clearMarkers(): Promise<{ counter: number; markers: MarkersState }> {
    return this.request("DELETE", "/markers");
  }

  saveSession(path?: string): Promise<{ counter: number; path: string }> {
    return this.request("POST", "/session/save", path ? { path } : {});
  }
}
