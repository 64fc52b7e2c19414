/**
 * Browser entry point: binds the controllers to the page.
 *
 * The service origin defaults to http://127.0.0.1:8787 and can be
 * overridden with ?service=http://host:port.
 */

import type { PresetsPayload, RenderResult } from "./api.js";
import { RenderApi } from "./api.js";
import { AbCompare } from "./compare.js";
import { COARSE_SCALE, PanelController } from "./panel.js";
import { PresetBrowser } from "./presets.js";
import { FIELD_PATHS } from "./state.js";

const SLIDER_FIELDS: [string, string][] = [
  ["P3", "P3 density scale"],
  ["P4", "P4 coverage"],
  ["C_type", "C type"],
  ["C_wispy", "C wispy"],
  ["C_billowy", "C billowy"],
  ["b_tiling_km", "base tiling (km)"],
  ["e_tiling_km", "erosion tiling (km)"],
  ["erosion_strength", "erosion strength"],
  ["sun_elevation_deg", "sun elevation (deg)"],
  ["sun_azimuth_deg", "sun azimuth (deg)"],
  ["exposure", "exposure"],
  ["preview_scale", "preview scale"],
];

const PHASE_FIELDS: Record<string, [string, string][]> = {
  tthg: [
    ["phase.g1", "g1 forward"],
    ["phase.g2", "g2 backward"],
    ["phase.w", "lobe weight"],
  ],
  hgd: [["phase.d", "droplet diameter (um)"]],
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function showPng(img: HTMLImageElement, result: RenderResult): void {
  const url = URL.createObjectURL(
    new Blob([result.png.slice().buffer], { type: "image/png" }),
  );
  const old = img.src;
  img.src = url;
  if (old.startsWith("blob:")) URL.revokeObjectURL(old);
}

function serviceUrl(): string {
  const param = new URLSearchParams(location.search).get("service");
  return param ?? "http://127.0.0.1:8787";
}

interface ControlRefs {
  input: HTMLInputElement;
  error: HTMLElement;
}

function buildApp(api: RenderApi, payload: PresetsPayload): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.textContent = "";

  const banner = el("div", "banner hidden");
  const toast = el("div", "toast hidden");
  root.append(banner, toast);

  const layout = el("div", "layout");
  const viewCol = el("div", "view-col");
  const panelCol = el("div", "panel-col");
  layout.append(viewCol, panelCol);
  root.append(layout);

  const preview = el("img", "preview");
  preview.alt = "cloud preview";
  const status = el("div", "status", "frame 0");
  viewCol.append(el("h2", "", "Preview"), preview, status);

  const controls = new Map<string, ControlRefs>();
  let toastTimer: number | undefined;

  const events = {
    onPreview(result: RenderResult, seq: number) {
      showPng(preview, result);
      status.textContent =
        `frame ${seq} - ${result.renderTimeMs.toFixed(1)} ms` +
        (result.extinctionSamples !== null
          ? ` - ${result.extinctionSamples.toLocaleString()} samples`
          : "");
    },
    onFieldError(field: string, message: string | null) {
      const refs = controls.get(field);
      if (!refs) return;
      refs.error.textContent = message ?? "";
      refs.input.classList.toggle("invalid", message !== null);
    },
    onBanner(kind: "retry" | "error", message: string) {
      banner.classList.remove("hidden");
      banner.textContent = "";
      banner.append(el("span", "", message + " "));
      if (kind === "retry") {
        const retry = el("button", "", "Retry");
        retry.addEventListener("click", () => {
          banner.classList.add("hidden");
          panel.refresh();
        });
        banner.append(retry);
      } else {
        const close = el("button", "", "Dismiss");
        close.addEventListener("click", () => banner.classList.add("hidden"));
        banner.append(close);
      }
    },
  };

  const panel = new PanelController(api, payload, events);

  function bindNumeric(
    container: HTMLElement,
    field: string,
    label: string,
  ): void {
    const path = FIELD_PATHS[field];
    const bound = path !== undefined ? panel.bounds.get(path) : undefined;
    const roww = el("div", "control");
    roww.append(el("label", "", label));
    const slider = el("input");
    slider.type = "range";
    const box = el("input", "value-box");
    box.type = "number";
    const error = el("div", "field-error");

    const current = (): number => {
      if (field.startsWith("phase.")) {
        const phase = panel.state.phase as unknown as Record<string, number>;
        return phase[field.slice("phase.".length)] ?? 0;
      }
      return (panel.state as unknown as Record<string, number>)[field] ?? 0;
    };

    if (bound) {
      const span = bound.max - bound.min;
      slider.min = String(bound.min);
      slider.max = String(bound.max);
      slider.step = field === "preview_scale" ? "1" : String(span / 200);
      box.min = String(bound.min);
      box.max = String(bound.max);
    }
    slider.value = String(current());
    box.value = String(current());

    const push = (raw: string): void => {
      const value = Number(raw);
      if (panel.setField(field, value)) {
        slider.value = raw;
        box.value = raw;
      }
    };
    slider.addEventListener("input", () => push(slider.value));
    box.addEventListener("change", () => push(box.value));

    roww.append(slider, box, error);
    container.append(roww);
    controls.set(field, { input: box, error });
  }

  // Preset browser.
  const presetRow = el("div", "control");
  presetRow.append(el("label", "", "preset"));
  const presetSelect = el("select");
  const variantBox = el("div", "variants");
  presetRow.append(presetSelect, variantBox);
  panelCol.append(el("h2", "", "Parameters"), presetRow);

  const browser = new PresetBrowser(payload, panel, {
    onToast(message) {
      toast.textContent = message;
      toast.classList.remove("hidden");
      clearTimeout(toastTimer);
      toastTimer = window.setTimeout(
        () => toast.classList.add("hidden"),
        4000,
      );
    },
    onVariants(labels) {
      variantBox.textContent = "";
      labels.forEach((labelText, i) => {
        const b = el("button", "", labelText);
        b.addEventListener("click", () => {
          browser.selectVariant(i);
          syncControls();
        });
        variantBox.append(b);
      });
    },
  });

  for (const name of browser.names()) {
    const opt = el("option", "", name);
    opt.value = name;
    presetSelect.append(opt);
  }
  presetSelect.addEventListener("change", () => {
    browser.select(presetSelect.value);
    syncControls();
  });

  const sliderBox = el("div");
  panelCol.append(sliderBox);
  for (const [field, label] of SLIDER_FIELDS) {
    bindNumeric(sliderBox, field, label);
  }

  // Phase family switch plus per-family parameters.
  const phaseBox = el("div", "phase-box");
  panelCol.append(el("h3", "", "Phase model"), phaseBox);

  function rebuildPhase(): void {
    phaseBox.textContent = "";
    for (const kind of ["tthg", "hgd"] as const) {
      const b = el(
        "button",
        panel.state.phase.kind === kind ? "active" : "",
        kind,
      );
      b.addEventListener("click", () => {
        panel.setPhaseKind(kind);
        rebuildPhase();
      });
      phaseBox.append(b);
    }
    for (const [field, label] of PHASE_FIELDS[panel.state.phase.kind] ?? []) {
      bindNumeric(phaseBox, field, label);
    }
  }

  // Wind vector: free numeric entries.
  const windBox = el("div", "control");
  windBox.append(el("label", "", "wind (km/s)"));
  (["x", "y", "z"] as const).forEach((axisName, axis) => {
    const box = el("input", "value-box");
    box.type = "number";
    box.step = "0.001";
    box.value = String(panel.state.wind_kmps[axis]);
    box.addEventListener("change", () =>
      panel.setWind(axis as 0 | 1 | 2, Number(box.value)),
    );
    windBox.append(box);
    controls.set(`wind_${axisName}`, { input: box, error: el("div") });
  });
  panelCol.append(windBox);

  function syncControls(): void {
    for (const [field, refs] of controls) {
      if (field.startsWith("wind_")) continue;
      let value: number | undefined;
      if (field.startsWith("phase.")) {
        const phase = panel.state.phase as unknown as Record<string, number>;
        value = phase[field.slice("phase.".length)];
      } else {
        value = (panel.state as unknown as Record<string, number>)[field];
      }
      if (value !== undefined) refs.input.value = String(value);
    }
    rebuildPhase();
  }

  // A/B comparison section.
  const abCol = el("div", "ab-col");
  const leftImg = el("img", "ab-img");
  const rightImg = el("img", "ab-img");
  const diffImg = el("img", "ab-img");
  const badge = el("div", "status", "");
  const fig1Button = el("button", "", "Load fig1_ab comparison");
  const gain = el("input");
  gain.type = "range";
  gain.min = "1";
  gain.max = "32";
  gain.value = "4";
  abCol.append(
    el("h2", "", "A/B phase comparison"),
    fig1Button,
    el("label", "", "disparity gain"),
    gain,
    leftImg,
    rightImg,
    diffImg,
    badge,
  );
  layout.append(abCol);

  const compare = new AbCompare(api, payload.defaults, {
    onResult(view) {
      showPng(leftImg, view.left);
      showPng(rightImg, view.right);
      showPng(diffImg, view.diff);
      badge.textContent = `render time ${view.renderTimeMs} ms`;
    },
    onError(err) {
      events.onBanner("error", err instanceof Error ? err.message : String(err));
    },
  });
  fig1Button.addEventListener("click", () => {
    const row = browser.row("fig1_ab");
    if (row) void compare.loadPreset(row);
  });
  gain.addEventListener("change", () => void compare.setGain(Number(gain.value)));

  rebuildPhase();
  syncControls();
  panel.refresh();
  void COARSE_SCALE;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  const api = new RenderApi(serviceUrl());
  try {
    const payload = await api.presets();
    buildApp(api, payload);
  } catch (err) {
    if (!root) return;
    root.textContent = "";
    const banner = el("div", "banner");
    banner.append(
      el("span", "", `service unreachable at ${serviceUrl()} `),
      el("span", "", err instanceof Error ? err.message : String(err)),
    );
    const retry = el("button", "", "Retry");
    retry.addEventListener("click", () => void boot());
    banner.append(retry);
    root.append(banner);
  }
}

void boot();
