// Shared fixtures: the real page markup mounted into jsdom, plus a fake
// service for driving the app without a network.

import { existsSync, readFileSync } from "node:fs";
import { join } from "node:path";

import { FetchLike, GameCount } from "../src/api.js";

// import.meta.url is an http URL under the DOM test environment, so locate
// the page relative to the package root instead
function shellPath(): string {
    const local = join(process.cwd(), "index.html");
    return existsSync(local) ? local : join(process.cwd(), "frontend", "index.html");
}

/** Load index.html's body into the test DOM so tests exercise the real markup. */
export function mountShell(): void {
    const html = readFileSync(shellPath(), "utf8");
    const start = html.indexOf("<body>") + "<body>".length;
    const end = html.indexOf("</body>");
    document.body.innerHTML = html.slice(start, end);
}

export function jsonResponse(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
        status,
        headers: { "content-type": "application/json" },
    });
}

export interface RecordedRequest {
    url: string;
    method: string;
    body?: unknown;
    signal?: AbortSignal;
}

/** Never settles until the caller aborts; mimics a slow backend. */
export function hangUntilAborted(signal?: AbortSignal): Promise<Response> {
    return new Promise((_resolve, reject) => {
        const bail = () => reject(new DOMException("aborted", "AbortError"));
        if (signal?.aborted) {
            bail();
            return;
        }
        signal?.addEventListener("abort", bail);
    });
}

export class FakeService {
    requests: RecordedRequest[] = [];
    games: GameCount[] = [];
    respondSearch: (body: unknown, signal?: AbortSignal) => Response | Promise<Response> = () =>
        jsonResponse(200, { results: [], timing_ms: 0 });

    readonly fetch: FetchLike = async (url, init) => {
        const recorded: RecordedRequest = {
            url,
            method: init?.method ?? "GET",
            signal: init?.signal ?? undefined,
        };
        if (typeof init?.body === "string") {
            recorded.body = JSON.parse(init.body);
        }
        this.requests.push(recorded);
        if (url.endsWith("/api/games")) {
            return jsonResponse(200, this.games);
        }
        if (url.endsWith("/api/search")) {
            return this.respondSearch(recorded.body, recorded.signal);
        }
        return jsonResponse(404, { code: "unknown_route", message: `no route for ${url}` });
    };

    searchRequests(): RecordedRequest[] {
        return this.requests.filter((r) => r.url.endsWith("/api/search"));
    }
}
