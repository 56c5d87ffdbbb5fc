import { describe, expect, it } from "vitest";

import { PortalClient } from "../src/api.js";
import { Explorer } from "../src/controller.js";
import {
  BASE,
  CA,
  STATION_1,
  observationUri,
  stubPortal,
} from "./stub_portal.js";

function explorerWithStub() {
  const portal = stubPortal();
  const banners: (string | null)[] = [];
  const explorer = new Explorer(new PortalClient(portal.fetch, BASE), {
    onBanner: (message) => banners.push(message),
  });
  return { explorer, portal, banners };
}

describe("loading the fixture station", () => {
  it("renders one focus node plus 13 neighbors", async () => {
    const { explorer } = explorerWithStub();
    await explorer.loadEntity(STATION_1);

    expect(explorer.graph.focus).toBe(STATION_1);
    expect(explorer.graph.nodes.size).toBe(14);

    const kinds = { station: 0, observation: 0, literal: 0, external: 0 };
    for (const node of explorer.graph.nodes.values()) {
      kinds[node.kind] += 1;
    }
    expect(kinds).toEqual({ station: 1, observation: 10, literal: 3, external: 0 });
    expect(explorer.graph.edges.size).toBe(13);
  });

  it("marks the focus expanded and labels it from the description", () => {
    const { explorer } = explorerWithStub();
    return explorer.loadEntity(STATION_1).then(() => {
      const focus = explorer.graph.nodes.get(STATION_1)!;
      expect(focus.expanded).toBe(true);
      expect(focus.label).toBe("TEST STATION ONE");
    });
  });

  it("is idempotent on re-load", async () => {
    const { explorer } = explorerWithStub();
    await explorer.loadEntity(STATION_1);
    const nodesBefore = new Set(explorer.graph.nodes.keys());
    const edgesBefore = new Set(explorer.graph.edges.keys());

    await explorer.loadEntity(STATION_1);
    expect(new Set(explorer.graph.nodes.keys())).toEqual(nodesBefore);
    expect(new Set(explorer.graph.edges.keys())).toEqual(edgesBefore);
  });

  it("shows an unknown IRI as a lone node with zero edges", async () => {
    const { explorer } = explorerWithStub();
    await explorer.loadEntity(`${BASE}/station/NOPE`);
    expect(explorer.graph.nodes.size).toBe(1);
    expect(explorer.graph.edges.size).toBe(0);
  });

  it("reports network failure in the banner and leaves state alone", async () => {
    const banners: (string | null)[] = [];
    const failingFetch = () => Promise.reject(new Error("connection refused"));
    const explorer = new Explorer(new PortalClient(failingFetch, BASE), {
      onBanner: (message) => banners.push(message),
    });
    await explorer.loadEntity(STATION_1);
    expect(explorer.graph.nodes.size).toBe(0);
    expect(explorer.graph.focus).toBeNull();
    expect(banners.at(-1)).toContain("unreachable");
  });
});

describe("expanding an observation", () => {
  it("adds its three literal leaves without duplicating the station edge", async () => {
    const { explorer } = explorerWithStub();
    await explorer.loadEntity(STATION_1);
    const target = observationUri("2021-06-01", "TMAX");

    await explorer.expandNode(target);

    expect(explorer.graph.nodes.size).toBe(17);
    expect(explorer.graph.edges.size).toBe(16);
    const stationEdges = Array.from(explorer.graph.edges.values()).filter(
      (edge) =>
        edge.source === target &&
        edge.predicate === `${CA}hasStation` &&
        edge.target === STATION_1,
    );
    expect(stationEdges).toHaveLength(1);
    expect(explorer.graph.nodes.get(target)!.expanded).toBe(true);
    expect(explorer.graph.focus).toBe(STATION_1);
  });

  it("does nothing when the node is already expanded", async () => {
    const { explorer, portal } = explorerWithStub();
    await explorer.loadEntity(STATION_1);
    const target = observationUri("2021-06-01", "TMAX");
    await explorer.expandNode(target);
    const callsAfterExpand = portal.calls.length;

    await explorer.expandNode(target);
    expect(portal.calls.length).toBe(callsAfterExpand);
  });

  it("refuses to expand a literal leaf", async () => {
    const { explorer, portal } = explorerWithStub();
    await explorer.loadEntity(STATION_1);
    const literalNode = Array.from(explorer.graph.nodes.values()).find(
      (node) => node.kind === "literal",
    )!;
    expect(literalNode.expandable).toBe(false);
    const callsBefore = portal.calls.length;

    await explorer.expandNode(literalNode.id);
    expect(portal.calls.length).toBe(callsBefore);
  });

  it("only ever grows the node and edge sets", async () => {
    const { explorer } = explorerWithStub();
    await explorer.loadEntity(STATION_1);
    let nodeCount = explorer.graph.nodes.size;
    let edgeCount = explorer.graph.edges.size;

    for (const [date, datatype] of [
      ["2021-06-01", "TMAX"],
      ["2021-06-02", "TMIN"],
      ["2021-06-01", "TMAX"],
      ["2021-06-03", "PRCP"],
    ]) {
      await explorer.expandNode(observationUri(date, datatype));
      expect(explorer.graph.nodes.size).toBeGreaterThanOrEqual(nodeCount);
      expect(explorer.graph.edges.size).toBeGreaterThanOrEqual(edgeCount);
      nodeCount = explorer.graph.nodes.size;
      edgeCount = explorer.graph.edges.size;
    }
  });
});

describe("query panel", () => {
  const STATIONS_QUERY = `PREFIX ca: <${BASE}/ontology/ca#>
SELECT ?station ?label WHERE { ?station a ca:Station . }`;

  it("renders a two-row table for the stations query", async () => {
    const { explorer } = explorerWithStub();
    await explorer.runQuery(STATIONS_QUERY);

    expect(explorer.queryPanel.error).toBeNull();
    expect(explorer.queryPanel.vars).toEqual(["station", "label"]);
    expect(explorer.queryPanel.rows).toHaveLength(2);
    expect(explorer.queryPanel.rows[0]["station"].value).toBe(STATION_1);
  });

  it("clicking a result IRI loads that entity into the graph", async () => {
    const { explorer, portal } = explorerWithStub();
    await explorer.runQuery(STATIONS_QUERY);
    const clicked = explorer.queryPanel.rows[0]["station"].value;

    await explorer.openResultTerm(clicked);

    expect(explorer.graph.focus).toBe(STATION_1);
    expect(explorer.graph.nodes.size).toBe(14);
    const describeCalls = portal.calls.filter((call) => call.url.includes("/describe"));
    expect(describeCalls).toHaveLength(1);
    expect(describeCalls[0].url).toContain(encodeURIComponent(clicked));
  });

  it("keeps previous results when a malformed query fails", async () => {
    const { explorer } = explorerWithStub();
    await explorer.runQuery(STATIONS_QUERY);
    await explorer.runQuery("garbage");

    expect(explorer.queryPanel.error).toContain("line 1, column 1");
    expect(explorer.queryPanel.rows).toHaveLength(2);
  });

  it("represents an empty result set as zero rows without error", async () => {
    const { explorer } = explorerWithStub();
    await explorer.runQuery("SELECT ?s WHERE { ?s <p> <o> . }");
    expect(explorer.queryPanel.error).toBeNull();
    expect(explorer.queryPanel.rows).toHaveLength(0);
    expect(explorer.queryPanel.ran).toBe(true);
  });
});

describe("endpoint discipline", () => {
  it("touches only /describe and /sparql", async () => {
    const { explorer, portal } = explorerWithStub();
    await explorer.loadEntity(STATION_1);
    await explorer.expandNode(observationUri("2021-06-02", "PRCP"));
    await explorer.runQuery("SELECT ?s WHERE { ?s a ca:Station . }");

    for (const call of portal.calls) {
      const path = new URL(call.url, BASE).pathname;
      expect(["/describe", "/sparql"]).toContain(path);
    }
  });
});
