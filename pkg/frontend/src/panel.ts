/**
 * Parameter panel controller: validated edits in, scheduled previews out.
 *
 * Edits are validated against the bounds published by the service before
 * any request is made; rejected values leave the state untouched and
 * surface an inline error on the offending control.
 */

import type { RenderClient, RenderResult, SceneDict } from "./api.js";
import { ServiceError, ServiceUnreachable } from "./api.js";
import { BoundsTable } from "./bounds.js";
import type { ParamPanelState, PhaseState } from "./state.js";
import {
  FIELD_PATHS,
  fieldForPath,
  renderOverrides,
  stateFromScene,
} from "./state.js";
import type { PreviewKind, TimerHost } from "./scheduler.js";
import { PreviewScheduler } from "./scheduler.js";

export const COARSE_SCALE = 8;

export interface PanelEvents {
  onPreview(result: RenderResult, seq: number): void;
  /** message === null clears the field's inline error. */
  onFieldError(field: string, message: string | null): void;
  onBanner(kind: "retry" | "error", message: string): void;
}

export class PanelController {
  state: ParamPanelState;
  readonly bounds: BoundsTable;
  private readonly scheduler: PreviewScheduler;

  constructor(
    api: RenderClient,
    payload: { bounds: Record<string, { min: number; max: number }>; defaults: SceneDict },
    private readonly events: PanelEvents,
    timers?: TimerHost,
  ) {
    this.state = stateFromScene(payload.defaults);
    this.bounds = new BoundsTable(payload.bounds);
    this.scheduler = new PreviewScheduler({
      issue: (body) => api.render(body),
      body: (kind) => this.overridesFor(kind),
      onDisplay: (result, seq) => events.onPreview(result, seq),
      onError: (err) => this.routeError(err),
      ...(timers ? { timers } : {}),
    });
  }

  get displayedSeq(): number {
    return this.scheduler.displayedSeq;
  }

  private overridesFor(kind: PreviewKind): SceneDict {
    const scale =
      kind === "coarse" ? COARSE_SCALE : this.state.preview_scale;
    return renderOverrides(this.state, scale);
  }

  /**
   * Apply one scalar control edit. Returns true when the value was
   * accepted and a preview was scheduled.
   */
  setField(field: string, value: number): boolean {
    const path = FIELD_PATHS[field];
    if (path === undefined) throw new Error(`unknown panel field ${field}`);
    const message = this.bounds.check(path, value);
    if (message !== null) {
      this.events.onFieldError(field, message);
      return false;
    }
    this.events.onFieldError(field, null);
    this.assign(field, value);
    this.scheduler.edit();
    return true;
  }

  /** Wind has no published bounds; any finite component is accepted. */
  setWind(axis: 0 | 1 | 2, value: number): boolean {
    const field = `wind_${"xyz"[axis]}`;
    if (!Number.isFinite(value)) {
      this.events.onFieldError(field, "wind component must be a finite number");
      return false;
    }
    this.events.onFieldError(field, null);
    const wind: [number, number, number] = [...this.state.wind_kmps];
    wind[axis] = value;
    this.state = { ...this.state, wind_kmps: wind };
    this.scheduler.edit();
    return true;
  }

  /** Switch phase family, seeding the new family's parameters. */
  setPhaseKind(kind: PhaseState["kind"]): void {
    if (this.state.phase.kind === kind) return;
    const phase: PhaseState =
      kind === "tthg"
        ? { kind: "tthg", g1: 0.85, g2: -0.3, w: 0.7 }
        : { kind: "hgd", d: 4.5 };
    this.state = { ...this.state, phase };
    this.scheduler.edit();
  }

  /** Replace the whole panel state from a preset scene; one preview. */
  applyScene(scene: SceneDict): void {
    this.state = stateFromScene(scene, this.state.preview_scale);
    this.scheduler.requestNow("fine");
  }

  /** Re-render at the current preview scale without changing state. */
  refresh(): void {
    this.scheduler.requestNow("fine");
  }

  dispose(): void {
    this.scheduler.dispose();
  }

  private assign(field: string, value: number): void {
    if (field.startsWith("phase.")) {
      const param = field.slice("phase.".length);
      this.state = {
        ...this.state,
        phase: { ...this.state.phase, [param]: value } as PhaseState,
      };
    } else {
      this.state = { ...this.state, [field]: value };
    }
  }

  private routeError(err: unknown): void {
    if (err instanceof ServiceUnreachable) {
      this.events.onBanner("retry", err.message);
      return;
    }
    if (err instanceof ServiceError && err.fieldPath !== null) {
      const field = fieldForPath(err.fieldPath);
      if (field !== null) {
        this.events.onFieldError(field, err.message);
        return;
      }
    }
    const message = err instanceof Error ? err.message : String(err);
    this.events.onBanner("error", message);
  }
}
