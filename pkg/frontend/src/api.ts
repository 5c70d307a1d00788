// Typed client for the search service HTTP API. Every shape here mirrors
// the service's JSON exactly; nothing is renamed or reordered on the way in.

export type AggregationMethod = "max" | "pool";

export interface ApiSearchRequest {
    query: string;
    method: AggregationMethod;
    game?: string;
    k?: number;
    pool_size?: number;
}

export interface EvidenceFrame {
    frame_index: number;
    timestamp_ms: number;
    score: number;
}

export interface RankedVideo {
    video_id: number;
    submission_id: string;
    game: string;
    agg_score: number;
    evidence: EvidenceFrame[];
}

export interface SearchResponse {
    results: RankedVideo[];
    timing_ms: number;
}

export interface GameCount {
    game: string;
    video_count: number;
}

export interface VideoDetail {
    video_id: number;
    submission_id: string;
    game: string;
    frame_count: number;
    fps: number;
    url: string;
    frame_timestamps_ms: number[];
}

/** Non-2xx answer from the service, carrying its {code, message} body. */
export class ApiError extends Error {
    constructor(
        public readonly status: number,
        public readonly code: string,
        message: string,
    ) {
        super(message);
        this.name = "ApiError";
    }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function raiseForStatus(response: Response): Promise<void> {
    if (response.ok) {
        return;
    }
    let code = `http_${response.status}`;
    let message = response.statusText || "request failed";
    try {
        const body = await response.json();
        if (body && typeof body.code === "string") {
            code = body.code;
        }
        if (body && typeof body.message === "string") {
            message = body.message;
        }
    } catch {
        // non-JSON error body, keep the status-line fallback
    }
    throw new ApiError(response.status, code, message);
}

export class SearchClient {
    private readonly baseUrl: string;
    private readonly fetchFn: FetchLike;

    constructor(baseUrl: string, fetchFn?: FetchLike) {
        // strip one trailing slash so path joins stay predictable
        this.baseUrl = baseUrl.endsWith("/") ? baseUrl.slice(0, -1) : baseUrl;
        this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
    }

    async search(request: ApiSearchRequest, signal?: AbortSignal): Promise<SearchResponse> {
        const response = await this.fetchFn(`${this.baseUrl}/api/search`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(request),
            signal,
        });
        await raiseForStatus(response);
        return (await response.json()) as SearchResponse;
    }

    async games(signal?: AbortSignal): Promise<GameCount[]> {
        const response = await this.fetchFn(`${this.baseUrl}/api/games`, { signal });
        await raiseForStatus(response);
        return (await response.json()) as GameCount[];
    }

    async video(videoId: number, signal?: AbortSignal): Promise<VideoDetail> {
        const response = await this.fetchFn(`${this.baseUrl}/api/videos/${videoId}`, { signal });
        await raiseForStatus(response);
        return (await response.json()) as VideoDetail;
    }
}
