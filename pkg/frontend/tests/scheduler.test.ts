import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { RenderResult, SceneDict } from "../src/api.js";
import { PreviewScheduler, type PreviewKind } from "../src/scheduler.js";
import { lcg, pngResult } from "./fixtures.js";

interface IssueRecord {
  body: SceneDict;
}

interface Harness {
  scheduler: PreviewScheduler;
  issued: IssueRecord[];
  displayed: { seq: number; result: RenderResult }[];
  errors: unknown[];
  pending: { resolve(r: RenderResult): void; reject(e: unknown): void }[];
  settle(): void;
  fail(err: unknown): void;
  value: { n: number };
}

function harness(auto = false): Harness {
  const issued: IssueRecord[] = [];
  const displayed: { seq: number; result: RenderResult }[] = [];
  const errors: unknown[] = [];
  const pending: Harness["pending"] = [];
  const value = { n: 0 };
  let tag = 0;
  const scheduler = new PreviewScheduler({
    issue(body) {
      issued.push({ body });
      if (auto) return Promise.resolve(pngResult(++tag));
      return new Promise((resolve, reject) => {
        pending.push({ resolve, reject });
      });
    },
    body(kind: PreviewKind): SceneDict {
      return { kind, n: value.n };
    },
    onDisplay(result, seq) {
      displayed.push({ seq, result });
    },
    onError(err) {
      errors.push(err);
    },
  });
  return {
    scheduler,
    issued,
    displayed,
    errors,
    pending,
    value,
    settle() {
      const call = pending.shift();
      if (!call) throw new Error("nothing pending");
      call.resolve(pngResult(++tag));
    },
    fail(err) {
      const call = pending.shift();
      if (!call) throw new Error("nothing pending");
      call.reject(err);
    },
  };
}

const tick = () => vi.advanceTimersByTimeAsync(0);

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("PreviewScheduler", () => {
  it("renders coarse immediately on the first edit, fine after idle", async () => {
    const h = harness(true);

    h.value.n = 1;
    h.scheduler.edit();
    await tick();
    expect(h.issued.map((r) => r.body)).toEqual([{ kind: "coarse", n: 1 }]);

    await vi.advanceTimersByTimeAsync(999);
    expect(h.issued).toHaveLength(1);

    await vi.advanceTimersByTimeAsync(1);
    expect(h.issued.map((r) => r.body)).toEqual([
      { kind: "coarse", n: 1 },
      { kind: "fine", n: 1 },
    ]);
    expect(h.displayed.map((d) => d.seq)).toEqual([1, 2]);
  });

  it("debounces edits within a burst and skips intermediate values", async () => {
    const h = harness(true);

    h.value.n = 1;
    h.scheduler.edit();
    await vi.advanceTimersByTimeAsync(100);

    h.value.n = 2;
    h.scheduler.edit();
    await vi.advanceTimersByTimeAsync(100);

    h.value.n = 3;
    h.scheduler.edit();
    await vi.advanceTimersByTimeAsync(2000);

    expect(h.issued.map((r) => r.body)).toEqual([
      { kind: "coarse", n: 1 },
      { kind: "coarse", n: 3 },
      { kind: "fine", n: 3 },
    ]);
  });

  it("skips renders whose body matches the last issued one", async () => {
    const h = harness(true);

    h.value.n = 5;
    h.scheduler.edit();
    h.scheduler.edit();
    h.scheduler.edit();
    await vi.advanceTimersByTimeAsync(2000);

    expect(h.issued.map((r) => r.body)).toEqual([
      { kind: "coarse", n: 5 },
      { kind: "fine", n: 5 },
    ]);
  });

  it("keeps at most one request in flight and one queued", async () => {
    const h = harness();

    h.value.n = 1;
    h.scheduler.edit();
    await tick();
    expect(h.pending).toHaveLength(1);

    h.value.n = 2;
    h.scheduler.edit();
    h.value.n = 3;
    h.scheduler.edit();
    await vi.advanceTimersByTimeAsync(2000);
    expect(h.pending).toHaveLength(1);
    expect(h.issued).toHaveLength(1);

    h.settle();
    await tick();
    expect(h.issued).toHaveLength(2);
    expect(h.issued[1]?.body).toEqual({ kind: "fine", n: 3 });

    h.settle();
    await tick();
    expect(h.pending).toHaveLength(0);
    expect(h.displayed.map((d) => d.seq)).toEqual([1, 2]);
  });

  it("forces a render on requestNow even for an unchanged body", async () => {
    const h = harness(true);

    h.scheduler.requestNow("fine");
    await tick();
    h.scheduler.requestNow("fine");
    await tick();

    expect(h.issued.map((r) => r.body)).toEqual([
      { kind: "fine", n: 0 },
      { kind: "fine", n: 0 },
    ]);
  });

  it("reports request failures and keeps scheduling afterwards", async () => {
    const h = harness();

    h.scheduler.edit();
    await tick();
    h.fail(new Error("boom"));
    await tick();
    expect(h.errors).toHaveLength(1);
    expect(h.displayed).toHaveLength(0);

    await vi.advanceTimersByTimeAsync(1000);
    expect(h.pending).toHaveLength(1);
    h.settle();
    await tick();
    expect(h.displayed.map((d) => d.seq)).toEqual([2]);
  });

  it("stops scheduling after dispose", async () => {
    const h = harness(true);

    h.scheduler.edit();
    await tick();
    h.scheduler.dispose();
    await vi.advanceTimersByTimeAsync(5000);

    expect(h.issued).toHaveLength(1);
  });

  it("never regresses the displayed sequence under random editing", async () => {
    const h = harness();
    const rand = lcg(20260815);

    for (let step = 0; step < 300; step += 1) {
      const roll = rand();
      if (roll < 0.4) {
        h.value.n = Math.floor(rand() * 6);
        h.scheduler.edit();
      } else if (roll < 0.6 && h.pending.length > 0) {
        h.settle();
      } else if (roll < 0.7 && h.pending.length > 0) {
        h.fail(new Error("transient"));
      } else if (roll < 0.8) {
        h.scheduler.requestNow(rand() < 0.5 ? "coarse" : "fine");
      } else {
        await vi.advanceTimersByTimeAsync(Math.floor(rand() * 600));
      }
      expect(h.pending.length).toBeLessThanOrEqual(1);
    }

    await vi.advanceTimersByTimeAsync(2000);
    while (h.pending.length > 0) {
      h.settle();
      await tick();
    }

    const seqs = h.displayed.map((d) => d.seq);
    for (let i = 1; i < seqs.length; i += 1) {
      expect(seqs[i]).toBeGreaterThan(seqs[i - 1] ?? Infinity);
    }
    expect(h.scheduler.displayedSeq).toBe(seqs[seqs.length - 1] ?? 0);
  });
});
