/** Shared test fixtures: a service payload and controllable render stubs. */

import type {
  PresetsPayload,
  RenderClient,
  RenderResult,
  SceneDict,
} from "../src/api.js";

export function defaultScene(): SceneDict {
  return {
    cloud_params: {
      method: "channel_lerp",
      P3: 1.0,
      P4: 0.85,
      C_type: 0.5,
      C_wispy: 0.248,
      C_billowy: 0.016,
      b_tiling_km: 30.0,
      e_tiling_km: 3.8,
      erosion_strength: 0.4,
      wind_kmps: [0.008, 0.002, 0.0],
      sigma_max: 30.0,
    },
    phase_model: { tthg: { g1: 0.85, g2: -0.3, w: 0.7 } },
    sun: {
      direction: [0.8351643400220907, 0.14726200647147308, 0.5299192642332049],
      irradiance: [20.0, 19.0, 17.5],
    },
    exposure: 1.0,
    albedo: 0.95,
  };
}

function withP4(p4: number): SceneDict {
  const scene = defaultScene();
  (scene.cloud_params as SceneDict).P4 = p4;
  return scene;
}

function withPhase(model: SceneDict): SceneDict {
  const scene = defaultScene();
  scene.phase_model = model;
  return scene;
}

export function fixturePayload(): PresetsPayload {
  return {
    presets: [
      {
        name: "default",
        description: "reference scene",
        count: 1,
        scenes: [defaultScene()],
      },
      {
        name: "fig1_ab",
        description: "matched phase pair",
        count: 2,
        scenes: [
          withPhase({ tthg: { g1: 0.8675, g2: -0.555, w: 0.9876 } }),
          withPhase({ hgd: { d: 0.8 } }),
        ],
      },
      {
        name: "fig3_sweep",
        description: "coverage sweep",
        count: 3,
        scenes: [withP4(0.0), withP4(0.4), withP4(1.2)],
      },
    ],
    bounds: {
      "cloud_params.P3": { min: 0.0, max: 10.0 },
      "cloud_params.P4": { min: 0.0, max: 1.5 },
      "cloud_params.C_type": { min: 0.0, max: 1.0 },
      "cloud_params.C_wispy": { min: 0.0, max: 1.0 },
      "cloud_params.C_billowy": { min: 0.0, max: 1.0 },
      "cloud_params.b_tiling_km": { min: 0.1, max: 1000.0 },
      "cloud_params.e_tiling_km": { min: 0.1, max: 1000.0 },
      "cloud_params.erosion_strength": { min: 0.0, max: 1.0 },
      "phase_model.tthg.g1": { min: -0.99, max: 0.99 },
      "phase_model.tthg.g2": { min: -0.99, max: 0.99 },
      "phase_model.tthg.w": { min: 0.0, max: 1.0 },
      "phase_model.hgd.d": { min: 0.01, max: 50.0 },
      "sun.elevation_deg": { min: -10.0, max: 90.0 },
      "sun.azimuth_deg": { min: -360.0, max: 360.0 },
      exposure: { min: 0.01, max: 32.0 },
      preview_scale: { min: 1, max: 8 },
    },
    defaults: defaultScene(),
  };
}

export function pngResult(tag: number): RenderResult {
  return {
    png: new Uint8Array([0x89, 0x50, tag & 0xff]),
    renderTimeMs: 10 * tag,
    extinctionSamples: 1000 + tag,
  };
}

export interface PendingCall {
  body: SceneDict;
  resolve(result: RenderResult): void;
  reject(err: unknown): void;
}

/** Render client whose responses the test resolves by hand. */
export class StubClient implements RenderClient {
  renderCalls: SceneDict[] = [];
  diffCalls: { left: SceneDict; right: SceneDict; gain: number }[] = [];
  pending: PendingCall[] = [];
  /** When set, render() resolves immediately with a tagged result. */
  autoResolve = false;

  private tag = 0;

  presets(): Promise<PresetsPayload> {
    return Promise.resolve(fixturePayload());
  }

  render(overrides: SceneDict): Promise<RenderResult> {
    this.renderCalls.push(overrides);
    if (this.autoResolve) return Promise.resolve(pngResult(++this.tag));
    return new Promise((resolve, reject) => {
      this.pending.push({ body: overrides, resolve, reject });
    });
  }

  diff(
    left: SceneDict,
    right: SceneDict,
    gain: number,
  ): Promise<RenderResult> {
    this.diffCalls.push({ left, right, gain });
    if (this.autoResolve) return Promise.resolve(pngResult(++this.tag));
    return new Promise((resolve, reject) => {
      this.pending.push({ body: { left, right, gain }, resolve, reject });
    });
  }

  /** Resolve the oldest outstanding call. */
  settle(result?: RenderResult): void {
    const call = this.pending.shift();
    if (!call) throw new Error("no pending call to settle");
    call.resolve(result ?? pngResult(++this.tag));
  }

  fail(err: unknown): void {
    const call = this.pending.shift();
    if (!call) throw new Error("no pending call to fail");
    call.reject(err);
  }
}

/** Deterministic 32-bit LCG for seeded random sweeps. */
export function lcg(seed: number): () => number {
  let s = seed >>> 0;
  return () => {
    s = (Math.imul(s, 1664525) + 1013904223) >>> 0;
    return s / 2 ** 32;
  };
}
