// Display formatting helpers.

/** Millisecond offset as mm:ss, rounded to the nearest second. */
export function formatTimestamp(ms: number): string {
    const totalSeconds = Math.round(Math.max(0, ms) / 1000);
    const minutes = Math.floor(totalSeconds / 60);
    const seconds = totalSeconds % 60;
    return `${String(minutes).padStart(2, "0")}:${String(seconds).padStart(2, "0")}`;
}

/** Aggregation score with fixed width so columns line up. */
export function formatScore(score: number): string {
    return score.toFixed(4);
}
