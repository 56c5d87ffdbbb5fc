import { describe, expect, it } from "vitest";

import { computeLayout } from "../src/layout.js";
import type { GraphEdge, GraphNode } from "../src/state.js";

function node(id: string): GraphNode {
  return {
    id,
    iri: id,
    label: id,
    kind: "external",
    expanded: false,
    expandable: true,
    hiddenInbound: 0,
  };
}

const OPTIONS = { width: 800, height: 600 };

describe("computeLayout", () => {
  it("is deterministic for the same inputs", () => {
    const nodes = ["a", "b", "c", "d"].map(node);
    const edges: GraphEdge[] = [
      { source: "a", predicate: "p", target: "b" },
      { source: "a", predicate: "p", target: "c" },
    ];
    const first = computeLayout(nodes, edges, OPTIONS);
    const second = computeLayout(nodes, edges, OPTIONS);
    expect(first).toEqual(second);
  });

  it("keeps every node inside the viewport", () => {
    const nodes = Array.from({ length: 30 }, (_, index) => node(`n${index}`));
    const edges: GraphEdge[] = nodes.slice(1).map((target) => ({
      source: "n0",
      predicate: "p",
      target: target.id,
    }));
    const positions = computeLayout(nodes, edges, OPTIONS);
    for (const point of positions.values()) {
      expect(point.x).toBeGreaterThanOrEqual(0);
      expect(point.x).toBeLessThanOrEqual(OPTIONS.width);
      expect(point.y).toBeGreaterThanOrEqual(0);
      expect(point.y).toBeLessThanOrEqual(OPTIONS.height);
    }
  });

  it("separates distinct nodes", () => {
    const nodes = ["a", "b", "c"].map(node);
    const positions = computeLayout(nodes, [], OPTIONS);
    const points = Array.from(positions.values());
    for (let i = 0; i < points.length; i += 1) {
      for (let j = i + 1; j < points.length; j += 1) {
        const dx = points[i].x - points[j].x;
        const dy = points[i].y - points[j].y;
        expect(Math.sqrt(dx * dx + dy * dy)).toBeGreaterThan(10);
      }
    }
  });

  it("centers a single node", () => {
    const positions = computeLayout([node("only")], [], OPTIONS);
    expect(positions.get("only")).toEqual({ x: 400, y: 300 });
  });

  it("reuses previous positions for existing nodes as the starting point", () => {
    const nodes = ["a", "b"].map(node);
    const previous = new Map([["a", { x: 100, y: 100 }]]);
    const positions = computeLayout(nodes, [], { ...OPTIONS, iterations: 0 }, previous);
    expect(positions.get("a")).toEqual({ x: 100, y: 100 });
    expect(positions.has("b")).toBe(true);
  });
});
