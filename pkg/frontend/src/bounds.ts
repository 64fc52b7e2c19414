/** Client-side validation mirroring the bounds published by the service. */

import type { Bounds } from "./api.js";

export class BoundsTable {
  constructor(private readonly table: Record<string, Bounds>) {}

  get(path: string): Bounds | undefined {
    return this.table[path];
  }

  /**
   * Validate a candidate value for a server path.
   *
   * Returns an error message, or null when acceptable. Paths without a
   * published bound only require a finite number.
   */
  check(path: string, value: number): string | null {
    if (!Number.isFinite(value)) {
      return `${path}: value must be a finite number`;
    }
    const b = this.table[path];
    if (b === undefined) return null;
    if (value < b.min) {
      return `${path}: value ${value} below minimum ${b.min}`;
    }
    if (value > b.max) {
      return `${path}: value ${value} above maximum ${b.max}`;
    }
    return null;
  }
}
