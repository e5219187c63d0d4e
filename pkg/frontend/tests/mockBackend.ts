/**
 * In-memory stand-in for the annotation backend, faithful to the documented
 * REST contract: disjoint assignment with checkout, 201/409/422 label
 * semantics, JSONL sink lines, 204 on exhaustion.
 */

import type { FetchLike, Swatch } from "../src/api.js";

export const DEFAULT_PALETTE: Swatch[] = Array.from({ length: 10 }, (_, i) => ({
  mst: i + 1,
  hex: `#${(i + 1).toString(16).padStart(2, "0")}0000`,
}));

interface LabelLine {
  individual_id: string;
  annotator_id: string;
  label: number;
  timestamp: number;
}

export class MockBackend {
  pool: string[];
  palette: Swatch[];
  exemplarImages: Record<string, string[]>;
  guidance: string;
  sink: string[] = [];
  failNetwork = false;
  private completed = new Map<string, Set<string>>();
  private checkedOut = new Map<string, string>();

  constructor(pool: string[], palette: Swatch[] = DEFAULT_PALETTE) {
    this.pool = pool;
    this.palette = palette;
    this.exemplarImages = {};
    for (const swatch of palette) {
      this.exemplarImages[String(swatch.mst)] = [];
    }
    this.guidance = "Judge only the skin.";
  }

  sinkRecords(): LabelLine[] {
    return this.sink.map((line) => JSON.parse(line) as LabelLine);
  }

  currentAssignment(annotator: string): string | null {
    for (const [ind, holder] of this.checkedOut) {
      if (holder === annotator) {
        return ind;
      }
    }
    return null;
  }

  private doneFor(annotator: string): Set<string> {
    let done = this.completed.get(annotator);
    if (done === undefined) {
      done = new Set();
      this.completed.set(annotator, done);
    }
    return done;
  }

  private next(annotator: string): string | null {
    const held = this.currentAssignment(annotator);
    if (held !== null) {
      return held;
    }
    const done = this.doneFor(annotator);
    let fallback: string | null = null;
    for (const ind of this.pool) {
      if (done.has(ind)) {
        continue;
      }
      if (this.checkedOut.has(ind)) {
        fallback = fallback ?? ind;
        continue;
      }
      this.checkedOut.set(ind, annotator);
      return ind;
    }
    return fallback;
  }

  private submit(body: LabelLine): number {
    if (
      typeof body.label !== "number" ||
      !Number.isInteger(body.label) ||
      body.label < 1 ||
      body.label > 10
    ) {
      return 422;
    }
    if (!this.pool.includes(body.individual_id)) {
      return 422;
    }
    const done = this.doneFor(body.annotator_id);
    if (done.has(body.individual_id)) {
      return 409;
    }
    this.sink.push(
      JSON.stringify({
        individual_id: body.individual_id,
        annotator_id: body.annotator_id,
        label: body.label,
        timestamp: 0,
      }),
    );
    done.add(body.individual_id);
    if (this.checkedOut.get(body.individual_id) === body.annotator_id) {
      this.checkedOut.delete(body.individual_id);
    }
    return 201;
  }

  fetchLike(): FetchLike {
    return async (input: string, init?: RequestInit): Promise<Response> => {
      if (this.failNetwork) {
        throw new TypeError("network down");
      }
      const url = new URL(input, "http://test.local");
      if (url.pathname === "/api/individuals/next") {
        const annotator = url.searchParams.get("annotator") ?? "";
        const ind = this.next(annotator);
        if (ind === null) {
          return new Response(null, { status: 204 });
        }
        return Response.json({
          individual_id: ind,
          image_urls: [`/api/images/${ind}_img0`, `/api/images/${ind}_img1`],
        });
      }
      if (url.pathname === "/api/exemplars") {
        return Response.json({
          swatches: this.palette,
          exemplar_images: this.exemplarImages,
          guidance: this.guidance,
        });
      }
      if (url.pathname === "/api/labels" && init?.method === "POST") {
        const body = JSON.parse(String(init.body)) as LabelLine;
        const status = this.submit(body);
        return status === 201
          ? Response.json({ status: "created" }, { status })
          : Response.json({ detail: "rejected" }, { status });
      }
      if (url.pathname === "/api/progress") {
        const annotator = url.searchParams.get("annotator") ?? "";
        const done = this.doneFor(annotator);
        return Response.json({ assigned: this.pool.length, completed: done.size });
      }
      return new Response("not found", { status: 404 });
    };
  }
}
