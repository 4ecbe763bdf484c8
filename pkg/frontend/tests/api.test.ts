import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("ApiClient error handling", () => {
  it("raises ApiError carrying the server's code and detail", async () => {
    const client = new ApiClient("http://test", async () =>
      jsonResponse(409, { code: "conflict", message: "NotSplittable", detail: "leaf node" }),
    );
    const err = await client.summaryGraph("sess-0").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe("conflict");
    expect(err.detail).toBe("leaf node");
  });

  it("survives non-JSON error bodies", async () => {
    const client = new ApiClient("http://test", async () =>
      new Response("gateway exploded", { status: 502, statusText: "Bad Gateway" }),
    );
    const err = await client.health().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(502);
    expect(err.code).toBe("internal");
  });

  it("strips trailing slashes from the base url", async () => {
    const urls: string[] = [];
    const client = new ApiClient("http://test///", async (url) => {
      urls.push(url);
      return jsonResponse(200, { status: "ok" });
    });
    await client.health();
    expect(urls).toEqual(["http://test/health"]);
  });
});

describe("ApiClient command queue", () => {
  it("keeps at most one command in flight per session", async () => {
    let inFlight = 0;
    let maxInFlight = 0;
    const client = new ApiClient("http://test", async () => {
      inFlight++;
      maxInFlight = Math.max(maxInFlight, inFlight);
      await new Promise((r) => setTimeout(r, 5));
      inFlight--;
      return jsonResponse(200, { nodes: [], edges: [] });
    });
    await Promise.all([
      client.runCommand("s", { op: "collapse", node: 1 }),
      client.runCommand("s", { op: "collapse", node: 2 }),
      client.runCommand("s", { op: "collapse", node: 3 }),
    ]);
    expect(maxInFlight).toBe(1);
  });

  it("does not serialize commands across different sessions", async () => {
    let inFlight = 0;
    let maxInFlight = 0;
    const client = new ApiClient("http://test", async () => {
      inFlight++;
      maxInFlight = Math.max(maxInFlight, inFlight);
      await new Promise((r) => setTimeout(r, 5));
      inFlight--;
      return jsonResponse(200, { nodes: [], edges: [] });
    });
    await Promise.all([
      client.runCommand("a", { op: "collapse", node: 1 }),
      client.runCommand("b", { op: "collapse", node: 1 }),
    ]);
    expect(maxInFlight).toBe(2);
  });

  it("recovers after a failed command", async () => {
    let calls = 0;
    const client = new ApiClient("http://test", async () => {
      calls++;
      if (calls === 1) {
        return jsonResponse(409, { code: "conflict", message: "nope", detail: "" });
      }
      return jsonResponse(200, { nodes: [], edges: [] });
    });
    await expect(client.runCommand("s", { op: "collapse", node: 1 })).rejects.toThrow();
    const ok = await client.runCommand("s", { op: "collapse", node: 2 });
    expect(ok.nodes).toEqual([]);
  });
});
