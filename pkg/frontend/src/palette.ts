/**
 * Exemplar panel model: the ten MST swatches in scale order, each paired
 * with its example photos. A broken palette is a blocking error - the
 * annotator must never label without the reference scale on screen.
 */

import type { Swatch } from "./api.js";

export class PaletteError extends Error {}

export interface ExemplarTone {
  mst: number;
  hex: string;
  thumbnails: string[];
  missingExemplars: boolean;
}

export interface ExemplarPanelModel {
  tones: ExemplarTone[];
  guidance: string;
}

const HEX_PATTERN = /^#[0-9a-fA-F]{6}$/;

/** Returns the swatches sorted 1..10, or throws PaletteError. */
export function validatePalette(swatches: Swatch[]): Swatch[] {
  if (!Array.isArray(swatches)) {
    throw new PaletteError("palette missing");
  }
  const sorted = [...swatches].sort((a, b) => a.mst - b.mst);
  const tones = sorted.map((s) => s.mst);
  const expected = Array.from({ length: 10 }, (_, i) => i + 1);
  if (tones.length !== 10 || tones.some((t, i) => t !== expected[i])) {
    throw new PaletteError(
      `palette must contain MST tones 1..10 exactly once, got [${tones}]`,
    );
  }
  for (const swatch of sorted) {
    if (!HEX_PATTERN.test(swatch.hex)) {
      throw new PaletteError(`bad swatch color for tone ${swatch.mst}: ${swatch.hex}`);
    }
  }
  return sorted;
}

export function buildExemplarPanel(
  swatches: Swatch[],
  exemplarImages: Record<string, string[]>,
  guidance = "",
): ExemplarPanelModel {
  const ordered = validatePalette(swatches);
  const tones = ordered.map((swatch) => {
    const thumbnails = exemplarImages[String(swatch.mst)] ?? [];
    return {
      mst: swatch.mst,
      hex: swatch.hex,
      thumbnails,
      missingExemplars: thumbnails.length === 0,
    };
  });
  return { tones, guidance };
}
