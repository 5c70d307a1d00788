// Query history for the current browser session. The history is append-only
// and lives in sessionStorage only: closing the tab discards it, and the
// service itself never sees it.

import { ApiSearchRequest } from "./api.js";

export interface ResultSummary {
    resultCount: number;
    topGame: string | null;
    timingMs: number;
}

export interface HistoryEntry {
    request: ApiSearchRequest;
    summary: ResultSummary;
    at: string;
}

const STORAGE_KEY = "gpvs.history";

export class SearchSession {
    private readonly storage: Storage;
    private active: ApiSearchRequest | null = null;

    constructor(storage: Storage) {
        this.storage = storage;
    }

    get activeRequest(): ApiSearchRequest | null {
        return this.active;
    }

    setActive(request: ApiSearchRequest): void {
        this.active = request;
    }

    /** Append one completed search. Entries are never edited or removed. */
    record(request: ApiSearchRequest, summary: ResultSummary): void {
        const entries = this.entries();
        entries.push({ request, summary, at: new Date().toISOString() });
        this.storage.setItem(STORAGE_KEY, JSON.stringify(entries));
    }

    /** Snapshot of the history, oldest first. Mutating it changes nothing. */
    entries(): HistoryEntry[] {
        const raw = this.storage.getItem(STORAGE_KEY);
        if (raw === null) {
            return [];
        }
        try {
            const parsed = JSON.parse(raw);
            return Array.isArray(parsed) ? (parsed as HistoryEntry[]) : [];
        } catch {
            // unreadable storage starts a fresh history rather than wedging the app
            return [];
        }
    }
}
