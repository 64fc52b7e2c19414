/**
 * A/B phase-model comparison: renders both sides, then requests the
 * server-side disparity image amplified by the current gain.
 */

import type { PresetRow, RenderClient, RenderResult } from "./api.js";
import type { ParamPanelState } from "./state.js";
import { renderOverrides, stateFromScene } from "./state.js";

export interface CompareView {
  left: RenderResult;
  right: RenderResult;
  diff: RenderResult;
  /** Render-time badge; the disparity response's header value. */
  renderTimeMs: number;
}

export interface CompareEvents {
  onResult(view: CompareView): void;
  onError(err: unknown): void;
}

export class AbCompare {
  left: ParamPanelState;
  right: ParamPanelState;
  gain = 4;
  scale = 4;

  private sides: { left: RenderResult; right: RenderResult } | null = null;
  private running = false;

  constructor(
    private readonly api: RenderClient,
    defaults: Parameters<typeof stateFromScene>[0],
    private readonly events: CompareEvents,
  ) {
    this.left = stateFromScene(defaults);
    this.right = stateFromScene(defaults);
  }

  /** Load a comparison preset: first scene left, last scene right. */
  loadPreset(row: PresetRow): Promise<void> {
    const first = row.scenes[0];
    const last = row.scenes[row.scenes.length - 1];
    if (first === undefined || last === undefined) {
      this.events.onError(new Error(`preset ${row.name} has no scenes`));
      return Promise.resolve();
    }
    this.left = stateFromScene(first);
    this.right = stateFromScene(last);
    return this.run();
  }

  /** Render left and right, then fetch the disparity at current gain. */
  async run(): Promise<void> {
    if (this.running) return;
    this.running = true;
    try {
      const leftBody = renderOverrides(this.left, this.scale);
      const rightBody = renderOverrides(this.right, this.scale);
      const left = await this.api.render(leftBody);
      const right = await this.api.render(rightBody);
      this.sides = { left, right };
      const diff = await this.api.diff(leftBody, rightBody, this.gain);
      this.events.onResult({
        left,
        right,
        diff,
        renderTimeMs: diff.renderTimeMs,
      });
    } catch (err) {
      this.events.onError(err);
    } finally {
      this.running = false;
    }
  }

  /** Change gain: refreshes the disparity only, sides stay cached. */
  async setGain(gain: number): Promise<void> {
    this.gain = gain;
    if (this.sides === null) {
      await this.run();
      return;
    }
    try {
      const diff = await this.api.diff(
        renderOverrides(this.left, this.scale),
        renderOverrides(this.right, this.scale),
        this.gain,
      );
      this.events.onResult({
        ...this.sides,
        diff,
        renderTimeMs: diff.renderTimeMs,
      });
    } catch (err) {
      this.events.onError(err);
    }
  }
}
