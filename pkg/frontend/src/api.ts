/** Typed client for the render service HTTP API. */

export interface Bounds {
  min: number;
  max: number;
}

/** Partial scene overrides in the service's JSON vocabulary. */
export type SceneDict = { [key: string]: unknown };

export interface PresetRow {
  name: string;
  description: string;
  count: number;
  scenes: SceneDict[];
}

export interface PresetsPayload {
  presets: PresetRow[];
  bounds: Record<string, Bounds>;
  defaults: SceneDict;
}

export interface RenderResult {
  png: Uint8Array;
  renderTimeMs: number;
  extinctionSamples: number | null;
}

/** The service refused the request; fieldPath is set for validation 400s. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly fieldPath: string | null,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

/** The service could not be reached at all (network-level failure). */
export class ServiceUnreachable extends Error {
  constructor(cause: unknown) {
    super(`render service unreachable: ${String(cause)}`);
    this.name = "ServiceUnreachable";
  }
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

/** The service surface the controllers depend on. */
export interface RenderClient {
  presets(): Promise<PresetsPayload>;
  render(overrides: SceneDict): Promise<RenderResult>;
  diff(left: SceneDict, right: SceneDict, gain: number): Promise<RenderResult>;
}

// Validation messages start with the offending dotted field path, e.g.
// "cloud_params.P4: value 99 above maximum 1.5".
const FIELD_PATH = /^([A-Za-z_][\w.\[\]]*):\s/;

function fieldPathOf(message: string): string | null {
  const m = FIELD_PATH.exec(message);
  return m ? (m[1] ?? null) : null;
}

async function raiseServiceError(resp: Response): Promise<never> {
  let message = `HTTP ${resp.status}`;
  try {
    const body = (await resp.json()) as { error?: unknown };
    if (typeof body.error === "string") message = body.error;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ServiceError(resp.status, fieldPathOf(message), message);
}

async function imageResult(resp: Response): Promise<RenderResult> {
  const png = new Uint8Array(await resp.arrayBuffer());
  const time = Number.parseFloat(resp.headers.get("X-Render-Time-Ms") ?? "");
  const ext = resp.headers.get("X-Extinction-Samples");
  return {
    png,
    renderTimeMs: Number.isFinite(time) ? time : 0,
    extinctionSamples: ext === null ? null : Number.parseInt(ext, 10),
  };
}

export class RenderApi implements RenderClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (cause) {
      throw new ServiceUnreachable(cause);
    }
    if (!resp.ok) await raiseServiceError(resp);
    return resp;
  }

  private post(path: string, body: unknown): Promise<Response> {
    return this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async presets(): Promise<PresetsPayload> {
    const resp = await this.request("/presets");
    return (await resp.json()) as PresetsPayload;
  }

  async render(overrides: SceneDict): Promise<RenderResult> {
    return imageResult(await this.post("/render", overrides));
  }

  async diff(
    left: SceneDict,
    right: SceneDict,
    gain: number,
  ): Promise<RenderResult> {
    return imageResult(await this.post("/diff", { left, right, gain }));
  }
}
