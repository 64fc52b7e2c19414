/**
 * Progressive preview scheduling.
 *
 * Policy: the first edit after an idle period fires a coarse render at
 * once; further edits inside the burst are debounced (250 ms). One second
 * after the last edit a fine render refreshes the preview. At most one
 * request is outstanding; while one is in flight the newest desired render
 * waits in a single slot. Responses display only if their sequence number
 * exceeds the last displayed one, so a stale frame can never replace a
 * fresher preview.
 */

import type { RenderResult, SceneDict } from "./api.js";

export type PreviewKind = "coarse" | "fine";

export interface TimerHost {
  set(fn: () => void, ms: number): unknown;
  clear(id: unknown): void;
}

export interface SchedulerOptions {
  /** Send one render request. */
  issue(body: SceneDict): Promise<RenderResult>;
  /** Snapshot the current overrides at the scale for the preview kind. */
  body(kind: PreviewKind): SceneDict;
  onDisplay(result: RenderResult, seq: number): void;
  onError(err: unknown): void;
  debounceMs?: number;
  idleMs?: number;
  timers?: TimerHost;
}

const REAL_TIMERS: TimerHost = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (id) => clearTimeout(id as Parameters<typeof clearTimeout>[0]),
};

export class PreviewScheduler {
  private readonly debounceMs: number;
  private readonly idleMs: number;
  private readonly timers: TimerHost;

  private seq = 0;
  private displayed = 0;
  private inFlight = false;
  private queued: { body: SceneDict; key: string } | null = null;
  private lastIssuedKey = "";
  private debounceTimer: unknown = null;
  private idleTimer: unknown = null;

  constructor(private readonly opts: SchedulerOptions) {
    this.debounceMs = opts.debounceMs ?? 250;
    this.idleMs = opts.idleMs ?? 1000;
    this.timers = opts.timers ?? REAL_TIMERS;
  }

  /** Sequence number of the preview currently displayed. */
  get displayedSeq(): number {
    return this.displayed;
  }

  /** Register one accepted control edit. */
  edit(): void {
    const burstStart = this.idleTimer === null;
    this.clearTimers();
    this.idleTimer = this.timers.set(() => {
      this.idleTimer = null;
      this.issueKind("fine");
    }, this.idleMs);
    if (burstStart) {
      this.issueKind("coarse");
    } else {
      this.debounceTimer = this.timers.set(() => {
        this.debounceTimer = null;
        this.issueKind("coarse");
      }, this.debounceMs);
    }
  }

  /** Issue one preview right now (preset loads, manual refresh). */
  requestNow(kind: PreviewKind = "fine"): void {
    this.clearTimers();
    this.lastIssuedKey = "";
    this.issueKind(kind);
  }

  dispose(): void {
    this.clearTimers();
    this.queued = null;
  }

  private clearTimers(): void {
    if (this.debounceTimer !== null) {
      this.timers.clear(this.debounceTimer);
      this.debounceTimer = null;
    }
    if (this.idleTimer !== null) {
      this.timers.clear(this.idleTimer);
      this.idleTimer = null;
    }
  }

  private issueKind(kind: PreviewKind): void {
    const body = this.opts.body(kind);
    const key = JSON.stringify(body);
    if (key === this.lastIssuedKey) return;
    if (this.inFlight) {
      this.queued = { body, key };
    } else {
      this.dispatch(body, key);
    }
  }

  private dispatch(body: SceneDict, key: string): void {
    this.lastIssuedKey = key;
    const seq = ++this.seq;
    this.inFlight = true;
    this.opts.issue(body).then(
      (result) => {
        this.inFlight = false;
        if (seq > this.displayed) {
          this.displayed = seq;
          this.opts.onDisplay(result, seq);
        }
        this.drainQueue();
      },
      (err) => {
        this.inFlight = false;
        this.opts.onError(err);
        this.drainQueue();
      },
    );
  }

  private drainQueue(): void {
    const next = this.queued;
    this.queued = null;
    if (next !== null && next.key !== this.lastIssuedKey) {
      this.dispatch(next.body, next.key);
    }
  }
}
