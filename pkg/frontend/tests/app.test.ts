import { beforeEach, describe, expect, it } from "vitest";

import { SearchClient, SearchResponse } from "../src/api.js";
import { AppHandles, setupApp } from "../src/app.js";
import { SearchSession } from "../src/session.js";
import { FakeService, hangUntilAborted, jsonResponse, mountShell } from "./helpers.js";

function video(rank: number, submissionId: string, game: string, score: number) {
    return {
        video_id: rank,
        submission_id: submissionId,
        game,
        agg_score: score,
        evidence: [
            { frame_index: 0, timestamp_ms: 0, score },
            { frame_index: 2, timestamp_ms: 2000, score: score - 0.05 },
        ],
    };
}

const THREE_RESULTS: SearchResponse = {
    // deliberately not sorted by score: render order must follow the API
    results: [
        video(0, "first", "Fallout 4", 0.51),
        video(1, "second", "Far Cry 5", 0.93),
        video(2, "third", "Fallout 4", 0.72),
    ],
    timing_ms: 21,
};

interface Mounted {
    handles: AppHandles;
    session: SearchSession;
    copied: string[];
}

function mountApp(service: FakeService): Mounted {
    mountShell();
    sessionStorage.clear();
    const session = new SearchSession(sessionStorage);
    const copied: string[] = [];
    const handles = setupApp(document, {
        client: new SearchClient("", service.fetch),
        session,
        copyText: (text) => copied.push(text),
    });
    return { handles, session, copied };
}

function queryInput(): HTMLInputElement {
    return document.getElementById("query") as HTMLInputElement;
}

function submitButton(): HTMLButtonElement {
    return document.getElementById("submit") as HTMLButtonElement;
}

function typeQuery(text: string): void {
    const input = queryInput();
    input.value = text;
    input.dispatchEvent(new Event("input"));
}

function submitForm(): void {
    const form = document.getElementById("search-form") as HTMLFormElement;
    form.dispatchEvent(new Event("submit", { cancelable: true }));
}

function setMethod(method: "max" | "pool"): void {
    const radio = document.getElementById(`method-${method}`) as HTMLInputElement;
    radio.checked = true;
    radio.dispatchEvent(new Event("change"));
}

function renderedSubmissionIds(): string[] {
    return [...document.querySelectorAll<HTMLElement>("#results .result")].map(
        (card) => card.dataset.submissionId ?? "",
    );
}

beforeEach(() => {
    document.body.innerHTML = "";
});

describe("submit gating", () => {
    it("disables submit while the query is blank", () => {
        mountApp(new FakeService());
        expect(submitButton().disabled).toBe(true);
        typeQuery("   ");
        expect(submitButton().disabled).toBe(true);
        typeQuery("a horse in the air");
        expect(submitButton().disabled).toBe(false);
        typeQuery("");
        expect(submitButton().disabled).toBe(true);
    });

    it("ignores a submit with a blank query", async () => {
        const service = new FakeService();
        const { handles } = mountApp(service);
        submitForm();
        await handles.settled();
        expect(service.searchRequests().length).toBe(0);
    });
});

describe("search flow", () => {
    it("renders results in exactly the API order", async () => {
        const service = new FakeService();
        service.respondSearch = () => jsonResponse(200, THREE_RESULTS);
        const { handles } = mountApp(service);
        typeQuery("ragdoll");
        submitForm();
        await handles.settled();
        expect(renderedSubmissionIds()).toEqual(["first", "second", "third"]);
        const cards = document.querySelectorAll<HTMLElement>("#results .result");
        expect(cards[0]?.querySelector(".game")?.textContent).toBe("Fallout 4");
        expect(cards[0]?.querySelector(".score")?.textContent).toBe("0.5100");
        expect(cards[1]?.querySelector(".score")?.textContent).toBe("0.9300");
        const stamps = cards[0]?.querySelectorAll(".stamp") ?? [];
        expect([...stamps].map((s) => s.textContent)).toEqual(["00:00", "00:02"]);
        expect(document.getElementById("status")?.textContent).toBe("3 videos in 21 ms");
    });

    it("sends query and method, omitting game when unscoped", async () => {
        const service = new FakeService();
        const { handles } = mountApp(service);
        typeQuery("  ragdoll  ");
        submitForm();
        await handles.settled();
        expect(service.searchRequests()[0]?.body).toEqual({ query: "ragdoll", method: "max" });
    });

    it("shows an empty-state line for zero results", async () => {
        const service = new FakeService();
        const { handles } = mountApp(service);
        typeQuery("nothing at all");
        submitForm();
        await handles.settled();
        expect(document.querySelector("#results .empty")?.textContent).toBe("No videos matched.");
    });

    it("copies a submission id and timestamp from an evidence link", async () => {
        const service = new FakeService();
        service.respondSearch = () => jsonResponse(200, THREE_RESULTS);
        const { handles, copied } = mountApp(service);
        typeQuery("ragdoll");
        submitForm();
        await handles.settled();
        const stamp = document.querySelector<HTMLAnchorElement>("#results .result .stamp + .stamp");
        stamp?.dispatchEvent(new Event("click", { cancelable: true }));
        expect(copied).toEqual(["first @ 00:02"]);
    });

    it("appends each completed search to the session history", async () => {
        const service = new FakeService();
        service.respondSearch = () => jsonResponse(200, THREE_RESULTS);
        const { handles, session } = mountApp(service);
        typeQuery("one");
        submitForm();
        await handles.settled();
        typeQuery("two");
        submitForm();
        await handles.settled();
        const entries = session.entries();
        expect(entries.map((e) => e.request.query)).toEqual(["one", "two"]);
        expect(entries[0]?.summary).toEqual({
            resultCount: 3,
            topGame: "Fallout 4",
            timingMs: 21,
        });
        // rendered newest first
        const rendered = [...document.querySelectorAll("#history .history-query")];
        expect(rendered.map((a) => a.textContent)).toEqual(["two", "one"]);
    });

    it("refills the form from a history entry without searching", async () => {
        const service = new FakeService();
        service.games = [{ game: "Far Cry 5", video_count: 2 }];
        service.respondSearch = () => jsonResponse(200, THREE_RESULTS);
        const { handles } = mountApp(service);
        await handles.reloadGames();
        typeQuery("scoped query");
        setMethod("pool");
        (document.getElementById("game") as HTMLSelectElement).value = "Far Cry 5";
        submitForm();
        await handles.settled();
        typeQuery("something else");
        setMethod("max");
        const before = service.searchRequests().length;
        document
            .querySelector<HTMLAnchorElement>("#history .history-query")
            ?.dispatchEvent(new Event("click", { cancelable: true }));
        expect(queryInput().value).toBe("scoped query");
        expect((document.getElementById("method-pool") as HTMLInputElement).checked).toBe(true);
        expect((document.getElementById("game") as HTMLSelectElement).value).toBe("Far Cry 5");
        expect(service.searchRequests().length).toBe(before);
    });
});

describe("method toggle", () => {
    it("re-queries with the new method after a search", async () => {
        const service = new FakeService();
        service.respondSearch = () => jsonResponse(200, THREE_RESULTS);
        const { handles } = mountApp(service);
        typeQuery("ragdoll");
        submitForm();
        await handles.settled();
        setMethod("pool");
        await handles.settled();
        const bodies = service.searchRequests().map((r) => r.body);
        expect(bodies.length).toBe(2);
        expect(bodies[0]).toEqual({ query: "ragdoll", method: "max" });
        expect(bodies[1]).toEqual({ query: "ragdoll", method: "pool" });
    });

    it("does not query when toggled before any search", async () => {
        const service = new FakeService();
        const { handles } = mountApp(service);
        typeQuery("ragdoll");
        setMethod("pool");
        await handles.settled();
        expect(service.searchRequests().length).toBe(0);
    });
});

describe("game scoping", () => {
    it("renders the catalog into the picker in payload order", async () => {
        const service = new FakeService();
        service.games = [
            { game: "Fallout 4", video_count: 7 },
            { game: "Far Cry 5", video_count: 3 },
        ];
        const { handles } = mountApp(service);
        await handles.reloadGames();
        const options = [...document.querySelectorAll<HTMLOptionElement>("#game option")];
        expect(options.map((o) => o.textContent)).toEqual([
            "all games",
            "Fallout 4 (7)",
            "Far Cry 5 (3)",
        ]);
        expect(options.map((o) => o.value)).toEqual(["", "Fallout 4", "Far Cry 5"]);
    });

    it("shows an empty-state note when the catalog is empty", async () => {
        const service = new FakeService();
        const { handles } = mountApp(service);
        await handles.reloadGames();
        expect(document.getElementById("catalog-note")?.textContent).toBe("catalog is empty");
        expect(document.querySelectorAll("#game option").length).toBe(1);
    });

    it("adds the selected game to the outgoing request", async () => {
        const service = new FakeService();
        service.games = [{ game: "Fallout 4", video_count: 7 }];
        const { handles } = mountApp(service);
        await handles.reloadGames();
        (document.getElementById("game") as HTMLSelectElement).value = "Fallout 4";
        typeQuery("ragdoll");
        submitForm();
        await handles.settled();
        expect(service.searchRequests()[0]?.body).toEqual({
            query: "ragdoll",
            method: "max",
            game: "Fallout 4",
        });
        // back to all games drops the field
        (document.getElementById("game") as HTMLSelectElement).value = "";
        submitForm();
        await handles.settled();
        expect(service.searchRequests()[1]?.body).toEqual({ query: "ragdoll", method: "max" });
    });
});

describe("failure handling", () => {
    it("surfaces a service error inline and keeps the typed query", async () => {
        const service = new FakeService();
        service.respondSearch = () => jsonResponse(200, THREE_RESULTS);
        const { handles } = mountApp(service);
        typeQuery("ragdoll");
        submitForm();
        await handles.settled();
        service.respondSearch = () =>
            jsonResponse(404, { code: "unknown_game", message: "no game named Pong" });
        typeQuery("ragdoll in pong");
        submitForm();
        await handles.settled();
        const error = document.getElementById("error");
        expect(error?.hidden).toBe(false);
        expect(error?.textContent).toBe("search failed (404 unknown_game): no game named Pong");
        expect(queryInput().value).toBe("ragdoll in pong");
        // earlier results stay on screen
        expect(renderedSubmissionIds()).toEqual(["first", "second", "third"]);
    });

    it("clears the error once a later search succeeds", async () => {
        const service = new FakeService();
        service.respondSearch = () =>
            jsonResponse(503, { code: "embedder_unavailable", message: "down" });
        const { handles } = mountApp(service);
        typeQuery("ragdoll");
        submitForm();
        await handles.settled();
        expect(document.getElementById("error")?.hidden).toBe(false);
        service.respondSearch = () => jsonResponse(200, THREE_RESULTS);
        submitForm();
        await handles.settled();
        expect(document.getElementById("error")?.hidden).toBe(true);
    });

    it("reports an unreachable service without losing the query", async () => {
        const service = new FakeService();
        service.respondSearch = () => {
            throw new TypeError("fetch failed");
        };
        const { handles } = mountApp(service);
        typeQuery("ragdoll");
        submitForm();
        await handles.settled();
        expect(document.getElementById("error")?.textContent).toBe(
            "service unreachable: fetch failed",
        );
        expect(queryInput().value).toBe("ragdoll");
    });
});

describe("single in-flight search", () => {
    it("aborts the pending request when a new one is submitted", async () => {
        const service = new FakeService();
        service.respondSearch = (_body, signal) => hangUntilAborted(signal);
        const { handles, session } = mountApp(service);
        typeQuery("slow query");
        submitForm();
        const first = handles.settled();
        service.respondSearch = () => jsonResponse(200, THREE_RESULTS);
        typeQuery("fast query");
        submitForm();
        await handles.settled();
        await first;
        const requests = service.searchRequests();
        expect(requests.length).toBe(2);
        expect(requests[0]?.signal?.aborted).toBe(true);
        expect(requests[1]?.signal?.aborted).toBe(false);
        expect(renderedSubmissionIds()).toEqual(["first", "second", "third"]);
        // only the completed search lands in history
        expect(session.entries().map((e) => e.request.query)).toEqual(["fast query"]);
    });
});
