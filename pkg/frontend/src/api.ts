/**
 * Typed client for the annotation backend REST API.
 *
 * Endpoints:
 *   GET  /api/individuals/next?annotator=ID -> 200 {individual_id, image_urls[]} | 204
 *   GET  /api/exemplars                     -> {swatches, exemplar_images, guidance}
 *   POST /api/labels                        -> 201 | 409 duplicate | 422 invalid
 *   GET  /api/progress?annotator=ID         -> {assigned, completed}
 */

export interface NextIndividual {
  individual_id: string;
  image_urls: string[];
}

export interface Swatch {
  mst: number;
  hex: string;
}

export interface ExemplarsResponse {
  swatches: Swatch[];
  exemplar_images: Record<string, string[]>;
  guidance?: string;
}

export interface Progress {
  assigned: number;
  completed: number;
}

export type SubmitOutcome = "created" | "duplicate" | "invalid";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export const MST_MIN = 1;
export const MST_MAX = 10;

export function isValidLabel(label: number): boolean {
  return Number.isInteger(label) && label >= MST_MIN && label <= MST_MAX;
}

export class ApiClient {
  private fetchFn: FetchLike;
  private base: string;

  constructor(fetchFn?: FetchLike, base = "") {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
    this.base = base;
  }

  async fetchNext(annotator: string): Promise<NextIndividual | null> {
    const res = await this.fetchFn(
      `${this.base}/api/individuals/next?annotator=${encodeURIComponent(annotator)}`,
    );
    if (res.status === 204) {
      return null;
    }
    if (!res.ok) {
      throw new Error(`next individual failed: ${res.status}`);
    }
    return (await res.json()) as NextIndividual;
  }

  async fetchExemplars(): Promise<ExemplarsResponse> {
    const res = await this.fetchFn(`${this.base}/api/exemplars`);
    if (!res.ok) {
      throw new Error(`exemplars failed: ${res.status}`);
    }
    return (await res.json()) as ExemplarsResponse;
  }

  /**
   * Submit one label. Mirrors the server-side validation client-side:
   * a label outside 1..10 never leaves the browser.
   */
  async submitLabel(
    individualId: string,
    annotator: string,
    label: number,
  ): Promise<SubmitOutcome> {
    if (!isValidLabel(label)) {
      throw new Error(`label ${label} outside ${MST_MIN}..${MST_MAX}; not sent`);
    }
    const res = await this.fetchFn(`${this.base}/api/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        individual_id: individualId,
        annotator_id: annotator,
        label,
      }),
    });
    if (res.status === 201) {
      return "created";
    }
    if (res.status === 409) {
      return "duplicate";
    }
    if (res.status === 422) {
      return "invalid";
    }
    throw new Error(`label submission failed: ${res.status}`);
  }

  async fetchProgress(annotator: string): Promise<Progress> {
    const res = await this.fetchFn(
      `${this.base}/api/progress?annotator=${encodeURIComponent(annotator)}`,
    );
    if (!res.ok) {
      throw new Error(`progress failed: ${res.status}`);
    }
    return (await res.json()) as Progress;
  }
}
