import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotationSession } from "../src/session.js";
import { MockBackend } from "./mockBackend.js";

function sessionFor(backend: MockBackend, annotator: string): AnnotationSession {
  return new AnnotationSession(new ApiClient(backend.fetchLike()), annotator);
}

describe("annotation round-trip", () => {
  it("fetch next -> press 4 -> Enter appends exactly one valid record", async () => {
    const backend = new MockBackend(["p1", "p2", "p3"]);
    const session = sessionFor(backend, "a1");
    await session.start();
    expect(session.state.phase).toBe("labeling");
    const onScreen = session.state.individualId;

    await session.handleKey("4");
    expect(session.state.selected).toBe(4);
    await session.handleKey("Enter");

    const records = backend.sinkRecords();
    expect(records).toHaveLength(1);
    expect(records[0]).toMatchObject({
      individual_id: onScreen,
      annotator_id: "a1",
      label: 4,
    });
    expect(Number.isInteger(records[0].timestamp)).toBe(true);
    // the UI advanced to a different individual
    expect(session.state.individualId).not.toBe(onScreen);
  });

  it("Enter without a selection sends nothing", async () => {
    const backend = new MockBackend(["p1"]);
    const session = sessionFor(backend, "a1");
    await session.start();
    await session.handleKey("Enter");
    expect(backend.sinkRecords()).toHaveLength(0);
    expect(session.state.phase).toBe("labeling");
  });

  it("key 0 selects tone 10 and submits it", async () => {
    const backend = new MockBackend(["p1"]);
    const session = sessionFor(backend, "a1");
    await session.start();
    await session.handleKey("0");
    await session.handleKey("Enter");
    expect(backend.sinkRecords()[0].label).toBe(10);
  });

  it("the client refuses to send labels outside 1..10", async () => {
    const backend = new MockBackend(["p1"]);
    const api = new ApiClient(backend.fetchLike());
    await expect(api.submitLabel("p1", "a1", 11)).rejects.toThrow(/not sent/);
    expect(backend.sinkRecords()).toHaveLength(0);
    // the raw endpoint itself answers 422 for an out-of-range label
    const res = await backend.fetchLike()("/api/labels", {
      method: "POST",
      body: JSON.stringify({ individual_id: "p1", annotator_id: "a1", label: 11 }),
    });
    expect(res.status).toBe(422);
    expect(backend.sinkRecords()).toHaveLength(0);
  });

  it("shows the duplicate notice and keeps the individual on 409", async () => {
    const backend = new MockBackend(["p1", "p2"]);
    const session = sessionFor(backend, "a1");
    await session.start();
    const first = session.state.individualId as string;
    // a previous session already labeled this individual
    await backend.fetchLike()("/api/labels", {
      method: "POST",
      body: JSON.stringify({ individual_id: first, annotator_id: "a1", label: 2 }),
    });
    await session.handleKey("5");
    await session.handleKey("Enter");
    expect(session.state.individualId).toBe(first);
    expect(session.state.notice).toMatch(/duplicate/i);
    expect(backend.sinkRecords()).toHaveLength(1);
  });

  it("survives a network failure without losing state", async () => {
    const backend = new MockBackend(["p1", "p2"]);
    const session = sessionFor(backend, "a1");
    await session.start();
    const current = session.state.individualId;
    await session.handleKey("6");
    backend.failNetwork = true;
    await session.handleKey("Enter");
    expect(session.state.individualId).toBe(current);
    expect(session.state.selected).toBe(6);
    expect(session.state.notice).toMatch(/retry/i);
    backend.failNetwork = false;
    await session.handleKey("Enter"); // retry succeeds
    expect(backend.sinkRecords()).toHaveLength(1);
  });

  it("reaches the terminal state after labeling the whole pool", async () => {
    const backend = new MockBackend(["p1", "p2", "p3"]);
    const session = sessionFor(backend, "a1");
    await session.start();
    for (let i = 0; i < 3; i += 1) {
      await session.handleKey("7");
      await session.handleKey("Enter");
    }
    expect(session.state.phase).toBe("done");
    expect(session.state.progress.completed).toBe(3);
    expect(session.state.tally[7]).toBe(3);
    expect(backend.sinkRecords()).toHaveLength(3);
  });
});

describe("two concurrent annotators", () => {
  it("never see the same individual while both are mid-pool", async () => {
    const pool = Array.from({ length: 12 }, (_, i) => `p${i}`);
    const backend = new MockBackend(pool);
    const alpha = sessionFor(backend, "alpha");
    const beta = sessionFor(backend, "beta");
    await alpha.start();
    await beta.start();

    for (let round = 0; round < pool.length; round += 1) {
      const a = alpha.state.individualId;
      const b = beta.state.individualId;
      if (a !== null && b !== null) {
        expect(a).not.toBe(b);
      }
      if (alpha.state.phase === "labeling") {
        await alpha.handleKey("3");
        await alpha.handleKey("Enter");
      }
      if (beta.state.phase === "labeling") {
        await beta.handleKey("8");
        await beta.handleKey("Enter");
      }
    }
    // every individual was labeled once by each annotator
    const records = backend.sinkRecords();
    expect(records).toHaveLength(2 * pool.length);
    const byAnnotator = new Map<string, Set<string>>();
    for (const rec of records) {
      const seen = byAnnotator.get(rec.annotator_id) ?? new Set();
      expect(seen.has(rec.individual_id)).toBe(false);
      seen.add(rec.individual_id);
      byAnnotator.set(rec.annotator_id, seen);
    }
    expect(byAnnotator.get("alpha")?.size).toBe(pool.length);
    expect(byAnnotator.get("beta")?.size).toBe(pool.length);
  });

  it("a page refresh resumes without re-serving committed individuals", async () => {
    const backend = new MockBackend(["p1", "p2"]);
    const session = sessionFor(backend, "a1");
    await session.start();
    const first = session.state.individualId as string;
    await session.handleKey("2");
    await session.handleKey("Enter");

    const reloaded = sessionFor(backend, "a1");
    await reloaded.start();
    expect(reloaded.state.progress.completed).toBe(1);
    expect(reloaded.state.individualId).not.toBe(first);
    expect(backend.sinkRecords()).toHaveLength(1); // nothing lost or duplicated
  });
});
