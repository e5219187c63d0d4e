/**
 * DOM wiring for the split-window annotation page: exemplar scale on the
 * left, the current individual's photos on the right, keyboard-driven
 * labeling (1-9, 0 for tone 10, Enter to submit).
 */

import { ApiClient } from "./api.js";
import { buildExemplarPanel, PaletteError } from "./palette.js";
import { AnnotationSession } from "./session.js";
import type { UiState } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function annotatorId(): string {
  const params = new URLSearchParams(window.location.search);
  const fromUrl = params.get("annotator");
  if (fromUrl) {
    window.localStorage.setItem("annotator_id", fromUrl);
    return fromUrl;
  }
  const stored = window.localStorage.getItem("annotator_id");
  if (stored) {
    return stored;
  }
  const entered = window.prompt("Annotator id:") || "anonymous";
  window.localStorage.setItem("annotator_id", entered);
  return entered;
}

function showFatal(message: string): void {
  const overlay = el<HTMLDivElement>("fatal");
  overlay.textContent = message;
  overlay.classList.remove("hidden");
}

async function renderExemplarPanel(api: ApiClient): Promise<void> {
  const res = await api.fetchExemplars();
  const model = buildExemplarPanel(res.swatches, res.exemplar_images,
                                   res.guidance ?? "");
  el<HTMLParagraphElement>("guidance").textContent = model.guidance;
  const list = el<HTMLDivElement>("swatches");
  list.replaceChildren();
  for (const tone of model.tones) {
    const row = document.createElement("div");
    row.className = "tone-row";
    const swatch = document.createElement("div");
    swatch.className = "swatch";
    swatch.style.backgroundColor = tone.hex;
    swatch.textContent = String(tone.mst);
    row.appendChild(swatch);
    const thumbs = document.createElement("div");
    thumbs.className = "thumbs";
    if (tone.missingExemplars) {
      const note = document.createElement("span");
      note.className = "missing";
      note.textContent = "no example photos";
      thumbs.appendChild(note);
    } else {
      for (const url of tone.thumbnails) {
        const img = document.createElement("img");
        img.src = url;
        img.alt = `MST ${tone.mst} example`;
        thumbs.appendChild(img);
      }
    }
    row.appendChild(thumbs);
    list.appendChild(row);
  }
}

function render(state: UiState): void {
  el<HTMLSpanElement>("progress").textContent =
    `${state.progress.completed} / ${state.progress.assigned} individuals`;
  const notice = el<HTMLDivElement>("notice");
  notice.textContent = state.notice ?? "";
  notice.classList.toggle("hidden", state.notice === null);

  const grid = el<HTMLDivElement>("images");
  const status = el<HTMLDivElement>("status");
  if (state.phase === "done") {
    grid.replaceChildren();
    status.textContent = "All individuals labeled. Thank you.";
    return;
  }
  if (state.phase === "loading") {
    status.textContent = "Loading next individual...";
    return;
  }
  status.textContent = state.individualId
    ? `Individual ${state.individualId} - pick the closest tone`
    : "";
  const current = grid.getAttribute("data-individual");
  if (current !== state.individualId) {
    grid.replaceChildren();
    for (const url of state.imageUrls) {
      const img = document.createElement("img");
      img.src = url;
      img.alt = `photo of ${state.individualId}`;
      grid.appendChild(img);
    }
    grid.setAttribute("data-individual", state.individualId ?? "");
  }
  for (const button of document.querySelectorAll<HTMLButtonElement>(".pick")) {
    const tone = Number(button.dataset.tone);
    button.classList.toggle("selected", state.selected === tone);
  }
  const submit = el<HTMLButtonElement>("submit");
  submit.disabled = state.selected === null || state.pendingSubmit ||
    state.phase !== "labeling";
}

async function boot(): Promise<void> {
  const api = new ApiClient();
  try {
    await renderExemplarPanel(api);
  } catch (err) {
    if (err instanceof PaletteError) {
      showFatal(`Cannot start: ${err.message}`);
      return;
    }
    showFatal(`Cannot reach the annotation backend: ${String(err)}`);
    return;
  }

  const session = new AnnotationSession(api, annotatorId(), render);

  const picks = el<HTMLDivElement>("picker");
  for (let tone = 1; tone <= 10; tone += 1) {
    const button = document.createElement("button");
    button.className = "pick";
    button.dataset.tone = String(tone);
    button.textContent = `${tone}`;
    button.addEventListener("click", () => {
      session.select(tone);
    });
    picks.appendChild(button);
  }
  el<HTMLButtonElement>("submit").addEventListener("click", () => {
    void session.submit();
  });
  document.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLInputElement) {
      return;
    }
    void session.handleKey(event.key);
  });

  await session.start();
}

void boot();
