// Small force-directed layout: pairwise repulsion, spring attraction along
// edges, gentle centering pull. Positions are deterministic for a given
// node set because the seed comes from hashing node ids.

import type { GraphEdge, GraphNode } from "./state.js";

export interface Point {
  x: number;
  y: number;
}

export interface LayoutOptions {
  width: number;
  height: number;
  iterations?: number;
  springLength?: number;
}

function hashString(text: string): number {
  let hash = 2166136261;
  for (let index = 0; index < text.length; index += 1) {
    hash ^= text.charCodeAt(index);
    hash = Math.imul(hash, 16777619);
  }
  return hash >>> 0;
}

export function computeLayout(
  nodes: Iterable<GraphNode>,
  edges: Iterable<GraphEdge>,
  options: LayoutOptions,
  previous?: Map<string, Point>,
): Map<string, Point> {
  const { width, height } = options;
  const iterations = options.iterations ?? 150;
  const springLength = options.springLength ?? 120;
  const centerX = width / 2;
  const centerY = height / 2;

  const ids: string[] = [];
  const position = new Map<string, Point>();
  for (const node of nodes) {
    ids.push(node.id);
    const kept = previous?.get(node.id);
    if (kept) {
      position.set(node.id, { x: kept.x, y: kept.y });
    } else {
      // place new nodes on a circle at an id-determined angle
      const angle = (hashString(node.id) % 3600) / 3600 * 2 * Math.PI;
      const radius = Math.min(width, height) * 0.35;
      position.set(node.id, {
        x: centerX + radius * Math.cos(angle),
        y: centerY + radius * Math.sin(angle),
      });
    }
  }
  if (ids.length === 0) {
    return position;
  }
  if (ids.length === 1) {
    position.set(ids[0], { x: centerX, y: centerY });
    return position;
  }

  const edgeList = Array.from(edges);
  const repulsion = springLength * springLength * 2;
  let temperature = Math.min(width, height) / 10;
  const cooling = 0.95;

  for (let step = 0; step < iterations; step += 1) {
    const force = new Map<string, Point>();
    for (const id of ids) {
      force.set(id, { x: 0, y: 0 });
    }

    for (let a = 0; a < ids.length; a += 1) {
      for (let b = a + 1; b < ids.length; b += 1) {
        const pa = position.get(ids[a])!;
        const pb = position.get(ids[b])!;
        let dx = pa.x - pb.x;
        let dy = pa.y - pb.y;
        let distSq = dx * dx + dy * dy;
        if (distSq < 0.01) {
          // nudge coincident nodes apart deterministically
          dx = 0.1 * ((a % 3) - 1) || 0.1;
          dy = 0.1 * ((b % 3) - 1) || -0.1;
          distSq = dx * dx + dy * dy;
        }
        const dist = Math.sqrt(distSq);
        const push = repulsion / distSq;
        const fa = force.get(ids[a])!;
        const fb = force.get(ids[b])!;
        fa.x += (dx / dist) * push;
        fa.y += (dy / dist) * push;
        fb.x -= (dx / dist) * push;
        fb.y -= (dy / dist) * push;
      }
    }

    for (const edge of edgeList) {
      const ps = position.get(edge.source);
      const pt = position.get(edge.target);
      if (!ps || !pt) {
        continue;
      }
      const dx = pt.x - ps.x;
      const dy = pt.y - ps.y;
      const dist = Math.max(Math.sqrt(dx * dx + dy * dy), 0.1);
      const pull = (dist - springLength) * 0.08;
      const fs = force.get(edge.source)!;
      const ft = force.get(edge.target)!;
      fs.x += (dx / dist) * pull;
      fs.y += (dy / dist) * pull;
      ft.x -= (dx / dist) * pull;
      ft.y -= (dy / dist) * pull;
    }

    for (const id of ids) {
      const point = position.get(id)!;
      const fid = force.get(id)!;
      fid.x += (centerX - point.x) * 0.01;
      fid.y += (centerY - point.y) * 0.01;
      const magnitude = Math.sqrt(fid.x * fid.x + fid.y * fid.y);
      if (magnitude > 0) {
        const limited = Math.min(magnitude, temperature);
        point.x += (fid.x / magnitude) * limited;
        point.y += (fid.y / magnitude) * limited;
      }
      const margin = 20;
      point.x = Math.min(Math.max(point.x, margin), width - margin);
      point.y = Math.min(Math.max(point.y, margin), height - margin);
    }
    temperature = Math.max(temperature * cooling, 0.5);
  }

  return position;
}
