import { describe, expect, it } from "vitest";

import { ApiError, SearchClient } from "../src/api.js";
import { FakeService, jsonResponse } from "./helpers.js";

const RESULT = {
    video_id: 0,
    submission_id: "abc123",
    game: "Fallout 4",
    agg_score: 0.91,
    evidence: [{ frame_index: 2, timestamp_ms: 67, score: 0.91 }],
};

describe("SearchClient.search", () => {
    it("posts the request body verbatim and parses the response", async () => {
        const service = new FakeService();
        service.respondSearch = () => jsonResponse(200, { results: [RESULT], timing_ms: 7 });
        const client = new SearchClient("http://svc:9", service.fetch);
        const response = await client.search({ query: "flying horse", method: "pool", k: 3 });
        expect(response.results.length).toBe(1);
        expect(response.results[0]?.submission_id).toBe("abc123");
        expect(response.timing_ms).toBe(7);
        const request = service.searchRequests()[0];
        expect(request?.url).toBe("http://svc:9/api/search");
        expect(request?.method).toBe("POST");
        expect(request?.body).toEqual({ query: "flying horse", method: "pool", k: 3 });
    });

    it("raises ApiError carrying the service's code and message", async () => {
        const service = new FakeService();
        service.respondSearch = () =>
            jsonResponse(404, { code: "unknown_game", message: "no game named Pong" });
        const client = new SearchClient("http://svc:9", service.fetch);
        const failure = await client
            .search({ query: "q", method: "max", game: "Pong" })
            .then(() => null, (e: unknown) => e);
        expect(failure).toBeInstanceOf(ApiError);
        const apiError = failure as ApiError;
        expect(apiError.status).toBe(404);
        expect(apiError.code).toBe("unknown_game");
        expect(apiError.message).toBe("no game named Pong");
    });

    it("falls back to a status code when the error body is not JSON", async () => {
        const client = new SearchClient("http://svc:9", async () =>
            new Response("gateway melted", { status: 502, statusText: "Bad Gateway" }));
        const failure = await client
            .search({ query: "q", method: "max" })
            .then(() => null, (e: unknown) => e);
        const apiError = failure as ApiError;
        expect(apiError.status).toBe(502);
        expect(apiError.code).toBe("http_502");
        expect(apiError.message).toBe("Bad Gateway");
    });

    it("forwards the abort signal to fetch", async () => {
        const service = new FakeService();
        service.respondSearch = () => jsonResponse(200, { results: [], timing_ms: 0 });
        const client = new SearchClient("http://svc:9", service.fetch);
        const controller = new AbortController();
        await client.search({ query: "q", method: "max" }, controller.signal);
        expect(service.searchRequests()[0]?.signal).toBe(controller.signal);
    });
});

describe("SearchClient catalog endpoints", () => {
    it("fetches the game list", async () => {
        const service = new FakeService();
        service.games = [
            { game: "Fallout 4", video_count: 9 },
            { game: "Far Cry 5", video_count: 4 },
        ];
        const client = new SearchClient("http://svc:9", service.fetch);
        expect(await client.games()).toEqual(service.games);
        expect(service.requests[0]?.method).toBe("GET");
    });

    it("fetches one video's detail by id", async () => {
        const detail = { video_id: 4, submission_id: "svid", game: "Fallout 4" };
        const client = new SearchClient("http://svc:9/", async (url) => {
            expect(url).toBe("http://svc:9/api/videos/4");
            return jsonResponse(200, detail);
        });
        expect((await client.video(4)).submission_id).toBe("svid");
    });
});
