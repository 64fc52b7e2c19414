/** Panel state: the artist-facing subset of a scene, plus preview scale. */

import type { SceneDict } from "./api.js";

export type PhaseState =
  | { kind: "tthg"; g1: number; g2: number; w: number }
  | { kind: "hgd"; d: number };

export interface ParamPanelState {
  P3: number;
  P4: number;
  C_type: number;
  C_wispy: number;
  C_billowy: number;
  b_tiling_km: number;
  e_tiling_km: number;
  erosion_strength: number;
  wind_kmps: [number, number, number];
  phase: PhaseState;
  sun_elevation_deg: number;
  sun_azimuth_deg: number;
  exposure: number;
  preview_scale: number;
}

/** Scalar panel fields mapped to the server's dotted validation paths. */
export const FIELD_PATHS: Record<string, string> = {
  P3: "cloud_params.P3",
  P4: "cloud_params.P4",
  C_type: "cloud_params.C_type",
  C_wispy: "cloud_params.C_wispy",
  C_billowy: "cloud_params.C_billowy",
  b_tiling_km: "cloud_params.b_tiling_km",
  e_tiling_km: "cloud_params.e_tiling_km",
  erosion_strength: "cloud_params.erosion_strength",
  "phase.g1": "phase_model.tthg.g1",
  "phase.g2": "phase_model.tthg.g2",
  "phase.w": "phase_model.tthg.w",
  "phase.d": "phase_model.hgd.d",
  sun_elevation_deg: "sun.elevation_deg",
  sun_azimuth_deg: "sun.azimuth_deg",
  exposure: "exposure",
  preview_scale: "preview_scale",
};

const SERVER_PATHS: Record<string, string> = Object.fromEntries(
  Object.entries(FIELD_PATHS).map(([field, path]) => [path, field]),
);

/** Panel field for a server validation path, if the panel edits it. */
export function fieldForPath(path: string): string | null {
  return SERVER_PATHS[path] ?? null;
}

const DEG = 180 / Math.PI;

function num(value: unknown, fallback: number): number {
  return typeof value === "number" && Number.isFinite(value)
    ? value
    : fallback;
}

function sunAngles(sun: unknown): { elevation: number; azimuth: number } {
  const s = (sun ?? {}) as SceneDict;
  if (typeof s.elevation_deg === "number") {
    return {
      elevation: s.elevation_deg,
      azimuth: num(s.azimuth_deg, 0),
    };
  }
  const dir = s.direction;
  if (Array.isArray(dir) && dir.length === 3) {
    const [x, y, z] = dir as [number, number, number];
    return {
      elevation: Math.asin(Math.max(-1, Math.min(1, z))) * DEG,
      azimuth: Math.atan2(y, x) * DEG,
    };
  }
  return { elevation: 90, azimuth: 0 };
}

function phaseState(model: unknown): PhaseState {
  const m = (model ?? {}) as SceneDict;
  const hgd = m.hgd as SceneDict | undefined;
  if (hgd) return { kind: "hgd", d: num(hgd.d, 1) };
  const tthg = (m.tthg ?? {}) as SceneDict;
  return {
    kind: "tthg",
    g1: num(tthg.g1, 0.85),
    g2: num(tthg.g2, -0.3),
    w: num(tthg.w, 0.7),
  };
}

/** Build panel state from a serialized scene (preset or defaults). */
export function stateFromScene(
  scene: SceneDict,
  previewScale = 2,
): ParamPanelState {
  const cp = (scene.cloud_params ?? {}) as SceneDict;
  const sun = sunAngles(scene.sun);
  const wind = Array.isArray(cp.wind_kmps)
    ? (cp.wind_kmps as number[])
    : [0, 0, 0];
  return {
    P3: num(cp.P3, 1),
    P4: num(cp.P4, 0.85),
    C_type: num(cp.C_type, 0.5),
    C_wispy: num(cp.C_wispy, 0.248),
    C_billowy: num(cp.C_billowy, 0.016),
    b_tiling_km: num(cp.b_tiling_km, 30),
    e_tiling_km: num(cp.e_tiling_km, 3.8),
    erosion_strength: num(cp.erosion_strength, 0.4),
    wind_kmps: [num(wind[0], 0), num(wind[1], 0), num(wind[2], 0)],
    phase: phaseState(scene.phase_model),
    sun_elevation_deg: sun.elevation,
    sun_azimuth_deg: sun.azimuth,
    exposure: num(scene.exposure, 1),
    preview_scale: previewScale,
  };
}

/** Serialize panel state to POST /render overrides at the given scale. */
export function renderOverrides(
  state: ParamPanelState,
  previewScale: number,
): SceneDict {
  const phase =
    state.phase.kind === "tthg"
      ? { tthg: { g1: state.phase.g1, g2: state.phase.g2, w: state.phase.w } }
      : { hgd: { d: state.phase.d } };
  return {
    cloud_params: {
      P3: state.P3,
      P4: state.P4,
      C_type: state.C_type,
      C_wispy: state.C_wispy,
      C_billowy: state.C_billowy,
      b_tiling_km: state.b_tiling_km,
      e_tiling_km: state.e_tiling_km,
      erosion_strength: state.erosion_strength,
      wind_kmps: [...state.wind_kmps],
    },
    phase_model: phase,
    sun: {
      elevation_deg: state.sun_elevation_deg,
      azimuth_deg: state.sun_azimuth_deg,
    },
    exposure: state.exposure,
    preview_scale: previewScale,
  };
}
