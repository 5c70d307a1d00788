// DOM rendering. Every function here replaces the contents of a container
// it is handed; none of them fetch anything or keep state.
//
// Results render strictly in API order. Ranking is the service's job and
// re-sorting on the client would silently disagree with it.

import { GameCount, RankedVideo, SearchResponse } from "./api.js";
import { formatScore, formatTimestamp } from "./format.js";
import { HistoryEntry } from "./session.js";

export type CopyText = (text: string) => void;

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    if (text !== undefined) {
        node.textContent = text;
    }
    return node;
}

function stampLink(video: RankedVideo, timestampMs: number, copyText: CopyText): HTMLAnchorElement {
    const stamp = formatTimestamp(timestampMs);
    const link = el("a", "stamp", stamp);
    link.href = "#";
    link.title = `copy ${video.submission_id} @ ${stamp}`;
    link.addEventListener("click", (event) => {
        event.preventDefault();
        copyText(`${video.submission_id} @ ${stamp}`);
    });
    return link;
}

function resultCard(video: RankedVideo, rank: number, copyText: CopyText): HTMLElement {
    const card = el("article", "result");
    card.dataset.videoId = String(video.video_id);
    card.dataset.submissionId = video.submission_id;

    const head = el("div", "result-head");
    head.append(el("span", "rank", `#${rank}`));
    head.append(el("span", "game", video.game));
    head.append(el("span", "score", formatScore(video.agg_score)));
    card.append(head);

    card.append(el("div", "submission", video.submission_id));

    const stamps = el("div", "stamps");
    for (const frame of video.evidence) {
        stamps.append(stampLink(video, frame.timestamp_ms, copyText));
    }
    card.append(stamps);
    return card;
}

export function renderResults(
    container: HTMLElement,
    response: SearchResponse,
    copyText: CopyText,
): void {
    container.replaceChildren();
    if (response.results.length === 0) {
        container.append(el("p", "empty", "No videos matched."));
        return;
    }
    response.results.forEach((video, i) => {
        container.append(resultCard(video, i + 1, copyText));
    });
}

/** Fill the game picker: one "all games" option, then the catalog verbatim. */
export function renderGamePicker(select: HTMLSelectElement, games: GameCount[]): void {
    select.replaceChildren();
    const all = el("option", undefined, "all games");
    all.value = "";
    select.append(all);
    for (const entry of games) {
        const option = el("option", undefined, `${entry.game} (${entry.video_count})`);
        option.value = entry.game;
        select.append(option);
    }
}

export function renderHistory(
    container: HTMLElement,
    entries: HistoryEntry[],
    onPick: (request: HistoryEntry["request"]) => void,
): void {
    container.replaceChildren();
    // newest first; the stored order is oldest first
    for (const entry of [...entries].reverse()) {
        const row = el("li", "history-entry");
        const pick = el("a", "history-query", entry.request.query);
        pick.href = "#";
        pick.addEventListener("click", (event) => {
            event.preventDefault();
            onPick(entry.request);
        });
        row.append(pick);
        const scope = entry.request.game ? ` in ${entry.request.game}` : "";
        row.append(
            el(
                "span",
                "history-meta",
                ` ${entry.request.method}${scope}, ${entry.summary.resultCount} videos`,
            ),
        );
        container.append(row);
    }
}
