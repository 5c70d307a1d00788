// Form wiring. One search may be in flight at a time: submitting again
// aborts the pending request, and a stale response is never rendered.

import { AggregationMethod, ApiError, ApiSearchRequest, SearchClient } from "./api.js";
import { SearchSession } from "./session.js";
import { CopyText, renderGamePicker, renderHistory, renderResults } from "./view.js";

export interface AppDeps {
    client: SearchClient;
    session: SearchSession;
    copyText?: CopyText;
}

export interface AppHandles {
    /** Run the current form state through the service, as submit does. */
    submitSearch(): Promise<void>;
    /** Re-fetch the game catalog into the picker. */
    reloadGames(): Promise<void>;
    /** Resolves once no search is in flight. */
    settled(): Promise<void>;
}

function byId<T extends HTMLElement>(root: Document, id: string): T {
    const node = root.getElementById(id);
    if (node === null) {
        throw new Error(`missing #${id}`);
    }
    return node as T;
}

function defaultCopyText(text: string): void {
    // clipboard access needs a secure context; degrade to a no-op prompt-free log
    if (typeof navigator !== "undefined" && navigator.clipboard) {
        void navigator.clipboard.writeText(text);
    } else {
        console.log(`copy: ${text}`);
    }
}

export function setupApp(root: Document, deps: AppDeps): AppHandles {
    const client = deps.client;
    const session = deps.session;
    const copyText = deps.copyText ?? defaultCopyText;

    const form = byId<HTMLFormElement>(root, "search-form");
    const queryInput = byId<HTMLInputElement>(root, "query");
    const submitButton = byId<HTMLButtonElement>(root, "submit");
    const methodMax = byId<HTMLInputElement>(root, "method-max");
    const methodPool = byId<HTMLInputElement>(root, "method-pool");
    const gameSelect = byId<HTMLSelectElement>(root, "game");
    const catalogNote = byId<HTMLElement>(root, "catalog-note");
    const statusLine = byId<HTMLElement>(root, "status");
    const errorLine = byId<HTMLElement>(root, "error");
    const resultsPane = byId<HTMLElement>(root, "results");
    const historyList = byId<HTMLElement>(root, "history");

    let inFlight: AbortController | null = null;
    let lastRun: Promise<void> = Promise.resolve();
    let hasSearched = false;

    function selectedMethod(): AggregationMethod {
        return methodPool.checked ? "pool" : "max";
    }

    function currentRequest(): ApiSearchRequest {
        const request: ApiSearchRequest = {
            query: queryInput.value.trim(),
            method: selectedMethod(),
        };
        if (gameSelect.value !== "") {
            request.game = gameSelect.value;
        }
        return request;
    }

    function syncSubmitEnabled(): void {
        submitButton.disabled = queryInput.value.trim() === "";
    }

    function showError(message: string): void {
        errorLine.textContent = message;
        errorLine.hidden = false;
    }

    function clearError(): void {
        errorLine.textContent = "";
        errorLine.hidden = true;
    }

    function applyHistoryPick(request: ApiSearchRequest): void {
        queryInput.value = request.query;
        methodMax.checked = request.method === "max";
        methodPool.checked = request.method === "pool";
        gameSelect.value = request.game ?? "";
        syncSubmitEnabled();
        queryInput.focus();
    }

    function refreshHistory(): void {
        renderHistory(historyList, session.entries(), applyHistoryPick);
    }

    async function runSearch(): Promise<void> {
        const request = currentRequest();
        if (request.query === "") {
            return;
        }
        inFlight?.abort();
        const controller = new AbortController();
        inFlight = controller;
        session.setActive(request);
        hasSearched = true;
        statusLine.textContent = "searching";
        try {
            const response = await client.search(request, controller.signal);
            if (inFlight !== controller) {
                return;
            }
            inFlight = null;
            clearError();
            renderResults(resultsPane, response, copyText);
            statusLine.textContent =
                `${response.results.length} videos in ${response.timing_ms} ms`;
            session.record(request, {
                resultCount: response.results.length,
                topGame: response.results[0]?.game ?? null,
                timingMs: response.timing_ms,
            });
            refreshHistory();
        } catch (error) {
            if (controller.signal.aborted || inFlight !== controller) {
                return;
            }
            inFlight = null;
            statusLine.textContent = "";
            if (error instanceof ApiError) {
                showError(`search failed (${error.status} ${error.code}): ${error.message}`);
            } else {
                showError(`service unreachable: ${(error as Error).message}`);
            }
        }
    }

    function submitSearch(): Promise<void> {
        lastRun = runSearch();
        return lastRun;
    }

    async function reloadGames(): Promise<void> {
        try {
            const games = await client.games();
            renderGamePicker(gameSelect, games);
            catalogNote.textContent = games.length === 0 ? "catalog is empty" : "";
        } catch (error) {
            catalogNote.textContent = `catalog unavailable: ${(error as Error).message}`;
        }
    }

    form.addEventListener("submit", (event) => {
        event.preventDefault();
        void submitSearch();
    });
    queryInput.addEventListener("input", syncSubmitEnabled);
    // switching aggregation re-runs the query in place, no reload
    for (const radio of [methodMax, methodPool]) {
        radio.addEventListener("change", () => {
            if (hasSearched && queryInput.value.trim() !== "") {
                void submitSearch();
            }
        });
    }

    syncSubmitEnabled();
    refreshHistory();

    return {
        submitSearch,
        reloadGames,
        settled: () => lastRun,
    };
}
