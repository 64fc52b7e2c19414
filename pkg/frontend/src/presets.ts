/** Preset browser: loads named parameter sets into the panel. */

import type { PresetRow, PresetsPayload, SceneDict } from "./api.js";

export interface PresetTarget {
  applyScene(scene: SceneDict): void;
}

export interface BrowserEvents {
  onToast(message: string): void;
  /** Variant labels for multi-scene presets (sweeps, A/B pairs). */
  onVariants(labels: string[]): void;
}

function variantLabel(scene: SceneDict, index: number): string {
  const cp = (scene.cloud_params ?? {}) as SceneDict;
  if (typeof cp.P4 === "number") return `P4=${cp.P4}`;
  return `#${index + 1}`;
}

function variantLabels(row: PresetRow): string[] {
  if (row.count < 2) return [];
  const labels = row.scenes.map(variantLabel);
  if (new Set(labels).size === labels.length) return labels;
  const phases = row.scenes.map((s) =>
    Object.keys((s.phase_model ?? {}) as SceneDict).join(""),
  );
  if (new Set(phases).size === phases.length) return phases;
  return row.scenes.map((_, i) => `#${i + 1}`);
}

export class PresetBrowser {
  private readonly rows: Map<string, PresetRow>;
  private active: PresetRow | null = null;

  constructor(
    payload: PresetsPayload,
    private readonly target: PresetTarget,
    private readonly events: BrowserEvents,
  ) {
    this.rows = new Map(payload.presets.map((row) => [row.name, row]));
  }

  names(): string[] {
    return [...this.rows.keys()];
  }

  row(name: string): PresetRow | undefined {
    return this.rows.get(name);
  }

  /**
   * Load a preset's first scene into the panel. Unknown names leave the
   * panel untouched and surface a toast.
   */
  select(name: string): boolean {
    const row = this.rows.get(name);
    if (row === undefined) {
      this.events.onToast(
        `unknown preset "${name}"; available: ${this.names().join(", ")}`,
      );
      return false;
    }
    const scene = row.scenes[0];
    if (scene === undefined) {
      this.events.onToast(`preset "${name}" has no scenes`);
      return false;
    }
    this.active = row;
    this.events.onVariants(variantLabels(row));
    this.target.applyScene(scene);
    return true;
  }

  /** Switch among the active preset's variants (sweep steps, A/B sides). */
  selectVariant(index: number): boolean {
    const scene = this.active?.scenes[index];
    if (scene === undefined) {
      this.events.onToast(`no preset variant #${index + 1}`);
      return false;
    }
    this.target.applyScene(scene);
    return true;
  }
}
