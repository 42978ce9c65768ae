import type { ScanResult } from "./api.js";

export const HISTORY_CAP = 50;

export interface HistoryEntry {
  id: number;
  url: string;
  result: ScanResult | null; // null while the request is in flight
  error: string | null;
}

/** Session-only scan log, newest first, capped. Nothing is persisted. */
export class ScanHistory {
  private entries: HistoryEntry[] = [];
  private nextId = 1;

  begin(url: string): HistoryEntry {
    const entry: HistoryEntry = { id: this.nextId++, url, result: null, error: null };
    this.entries.unshift(entry);
    if (this.entries.length > HISTORY_CAP) {
      this.entries.length = HISTORY_CAP; // drop the oldest
    }
    return entry;
  }

  /** Attach a response to the entry of the request that produced it. */
  resolve(id: number, result: ScanResult): void {
    const entry = this.entries.find((e) => e.id === id);
    if (entry) {
      entry.result = result;
      entry.error = null;
    }
  }

  fail(id: number, message: string): void {
    const entry = this.entries.find((e) => e.id === id);
    if (entry) {
      entry.error = message;
    }
  }

  list(): readonly HistoryEntry[] {
    return this.entries;
  }
}
