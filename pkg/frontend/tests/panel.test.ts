import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { RenderResult, SceneDict } from "../src/api.js";
import { ServiceError, ServiceUnreachable } from "../src/api.js";
import { BoundsTable } from "../src/bounds.js";
import { PanelController, type PanelEvents } from "../src/panel.js";
import { FIELD_PATHS } from "../src/state.js";
import { StubClient, fixturePayload, lcg } from "./fixtures.js";

interface Events extends PanelEvents {
  previews: { seq: number; result: RenderResult }[];
  fieldErrors: { field: string; message: string | null }[];
  banners: { kind: string; message: string }[];
}

function makeEvents(): Events {
  const previews: Events["previews"] = [];
  const fieldErrors: Events["fieldErrors"] = [];
  const banners: Events["banners"] = [];
  return {
    previews,
    fieldErrors,
    banners,
    onPreview: (result, seq) => previews.push({ seq, result }),
    onFieldError: (field, message) => fieldErrors.push({ field, message }),
    onBanner: (kind, message) => banners.push({ kind, message }),
  };
}

function makePanel(auto = true, payload = fixturePayload()) {
  const api = new StubClient();
  api.autoResolve = auto;
  const events = makeEvents();
  const panel = new PanelController(api, payload, events);
  return { api, events, panel };
}

function lookup(body: SceneDict, path: string): unknown {
  let node: unknown = body;
  for (const part of path.split(".")) {
    if (typeof node !== "object" || node === null) return undefined;
    node = (node as SceneDict)[part];
  }
  return node;
}

const tick = () => vi.advanceTimersByTimeAsync(0);

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("PanelController", () => {
  it("seeds its state from the service defaults", () => {
    const { panel } = makePanel();

    expect(panel.state.P4).toBe(0.85);
    expect(panel.state.phase.kind).toBe("tthg");
    expect(panel.state.sun_elevation_deg).toBeCloseTo(32.0, 6);
    expect(panel.state.preview_scale).toBe(2);
  });

  it("renders coarse at once on an edit, then fine at the panel scale", async () => {
    const { api, events, panel } = makePanel();

    expect(panel.setField("P4", 0.5)).toBe(true);
    await tick();
    expect(api.renderCalls).toHaveLength(1);
    expect(api.renderCalls[0]?.preview_scale).toBe(8);
    expect(lookup(api.renderCalls[0] ?? {}, "cloud_params.P4")).toBe(0.5);

    await vi.advanceTimersByTimeAsync(1000);
    expect(api.renderCalls).toHaveLength(2);
    expect(api.renderCalls[1]?.preview_scale).toBe(2);
    expect(events.previews.map((p) => p.seq)).toEqual([1, 2]);
  });

  it("issues at most three renders for a three-step drag", async () => {
    const { api, panel } = makePanel();

    panel.setField("P4", 0.4);
    await vi.advanceTimersByTimeAsync(100);
    panel.setField("P4", 0.85);
    await vi.advanceTimersByTimeAsync(100);
    panel.setField("P4", 1.2);
    await vi.advanceTimersByTimeAsync(2000);

    expect(api.renderCalls.length).toBeLessThanOrEqual(3);
    const p4s = api.renderCalls.map((b) => lookup(b, "cloud_params.P4"));
    expect(p4s[p4s.length - 1]).toBe(1.2);
    expect(p4s).not.toContain(0.85);
  });

  it("rejects out-of-bounds edits inline without any request", async () => {
    const { api, events, panel } = makePanel();

    expect(panel.setField("P4", -1)).toBe(false);
    await vi.advanceTimersByTimeAsync(2000);

    expect(api.renderCalls).toHaveLength(0);
    expect(panel.state.P4).toBe(0.85);
    expect(events.fieldErrors).toEqual([
      { field: "P4", message: "cloud_params.P4: value -1 below minimum 0" },
    ]);
  });

  it("accepts boundary values and sends them verbatim", async () => {
    const { api, panel } = makePanel();

    expect(panel.setField("P4", 0)).toBe(true);
    await tick();
    expect(lookup(api.renderCalls[0] ?? {}, "cloud_params.P4")).toBe(0);
  });

  it("rejects non-finite values", () => {
    const { api, panel } = makePanel();

    expect(panel.setField("exposure", Number.NaN)).toBe(false);
    expect(api.renderCalls).toHaveLength(0);
  });

  it("takes slider limits from the payload, not from constants", async () => {
    const wide = fixturePayload();
    wide.bounds["cloud_params.P4"] = { min: 0, max: 2.5 };
    const { api, panel } = makePanel(true, wide);

    expect(panel.setField("P4", 1.8)).toBe(true);
    await tick();
    expect(api.renderCalls).toHaveLength(1);
    expect(panel.bounds.get("cloud_params.P4")).toEqual({ min: 0, max: 2.5 });

    const { panel: strict } = makePanel();
    expect(strict.setField("P4", 1.8)).toBe(false);
  });

  it("routes server validation errors to the offending field", async () => {
    const { api, events, panel } = makePanel(false);

    panel.setField("P4", 0.5);
    await tick();
    api.fail(
      new ServiceError(
        400,
        "cloud_params.P4",
        "cloud_params.P4: value 0.5 above maximum 0.1",
      ),
    );
    await tick();

    const last = events.fieldErrors[events.fieldErrors.length - 1];
    expect(last).toEqual({
      field: "P4",
      message: "cloud_params.P4: value 0.5 above maximum 0.1",
    });
    expect(events.banners).toHaveLength(0);
  });

  it("shows a retry banner when the service is unreachable", async () => {
    const { api, events, panel } = makePanel(false);

    panel.refresh();
    await tick();
    api.fail(new ServiceUnreachable(new TypeError("fetch failed")));
    await tick();

    expect(events.banners[0]?.kind).toBe("retry");
    expect(events.banners[0]?.message).toContain("unreachable");
  });

  it("shows a plain error banner for failures naming no field", async () => {
    const { api, events, panel } = makePanel(false);

    panel.refresh();
    await tick();
    api.fail(new ServiceError(429, null, "render queue full"));
    await tick();

    expect(events.banners).toEqual([
      { kind: "error", message: "render queue full" },
    ]);
  });

  it("replaces the whole state from a preset scene with one render", async () => {
    const { api, panel } = makePanel();
    const sweep = fixturePayload().presets[2];

    panel.applyScene(sweep?.scenes[2] ?? {});
    await vi.advanceTimersByTimeAsync(2000);

    expect(panel.state.P4).toBe(1.2);
    expect(api.renderCalls).toHaveLength(1);
    expect(api.renderCalls[0]?.preview_scale).toBe(2);
    expect(lookup(api.renderCalls[0] ?? {}, "cloud_params.P4")).toBe(1.2);
  });

  it("switches phase families with fresh defaults", async () => {
    const { api, panel } = makePanel();

    panel.setPhaseKind("hgd");
    await tick();

    expect(panel.state.phase).toEqual({ kind: "hgd", d: 4.5 });
    const phase = api.renderCalls[0]?.phase_model as SceneDict;
    expect(Object.keys(phase)).toEqual(["hgd"]);

    panel.setField("phase.d", 0.8);
    await vi.advanceTimersByTimeAsync(2000);
    const last = api.renderCalls[api.renderCalls.length - 1];
    expect(lookup(last ?? {}, "phase_model.hgd.d")).toBe(0.8);
  });

  it("validates wind components for finiteness only", async () => {
    const { api, panel } = makePanel();

    expect(panel.setWind(1, Number.POSITIVE_INFINITY)).toBe(false);
    expect(api.renderCalls).toHaveLength(0);

    expect(panel.setWind(1, 0.5)).toBe(true);
    await tick();
    const wind = lookup(api.renderCalls[0] ?? {}, "cloud_params.wind_kmps");
    expect(wind).toEqual([0.008, 0.5, 0]);
  });

  it("throws on panel fields that do not exist", () => {
    const { panel } = makePanel();
    expect(() => panel.setField("no_such_field", 1)).toThrow(
      /unknown panel field/,
    );
  });

  it("never sends an out-of-bounds body under random editing", async () => {
    const payload = fixturePayload();
    const { api, events, panel } = makePanel(true, payload);
    const table = new BoundsTable(payload.bounds);
    const rand = lcg(77);
    const fields = Object.keys(FIELD_PATHS).filter(
      (f) => f !== "preview_scale",
    );

    for (let step = 0; step < 200; step += 1) {
      const roll = rand();
      if (roll < 0.7) {
        const field = fields[Math.floor(rand() * fields.length)] ?? "P4";
        const path = FIELD_PATHS[field] ?? "";
        const b = table.get(path) ?? { min: 0, max: 1 };
        const span = b.max - b.min;
        const value = b.min + (rand() * 2 - 0.5) * span;
        const ok = panel.setField(field, value);
        expect(ok).toBe(value >= b.min && value <= b.max);
      } else if (roll < 0.8) {
        panel.refresh();
      } else {
        await vi.advanceTimersByTimeAsync(Math.floor(rand() * 700));
      }
    }
    await vi.advanceTimersByTimeAsync(2000);

    expect(api.renderCalls.length).toBeGreaterThan(0);
    for (const body of api.renderCalls) {
      for (const path of Object.values(FIELD_PATHS)) {
        const value = lookup(body, path);
        if (typeof value === "number") {
          expect(table.check(path, value)).toBeNull();
        }
      }
    }

    const seqs = events.previews.map((p) => p.seq);
    for (let i = 1; i < seqs.length; i += 1) {
      expect(seqs[i]).toBeGreaterThan(seqs[i - 1] ?? Infinity);
    }
  });
});
