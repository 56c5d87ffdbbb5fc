// SVG and table rendering. This module is the only one that touches the
// DOM; everything it draws comes from GraphViewState/QueryPanelState.

import type { TermJson } from "./api.js";
import { computeLayout, Point } from "./layout.js";
import type { GraphViewState, NodeKind, QueryPanelState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const NODE_RADIUS: Record<NodeKind, number> = {
  station: 26,
  observation: 18,
  literal: 12,
  external: 14,
};

function shortPredicate(predicate: string): string {
  const cut = Math.max(predicate.lastIndexOf("#"), predicate.lastIndexOf("/"));
  return cut >= 0 ? predicate.slice(cut + 1) : predicate;
}

function truncate(text: string, limit: number): string {
  return text.length > limit ? `${text.slice(0, limit - 1)}…` : text;
}

export interface GraphHandlers {
  onNodeClick: (id: string) => void;
}

export class GraphRenderer {
  private svg: SVGSVGElement;
  private positions = new Map<string, Point>();

  constructor(svg: SVGSVGElement) {
    this.svg = svg;
  }

  render(state: GraphViewState, handlers: GraphHandlers): void {
    const width = this.svg.clientWidth || 900;
    const height = this.svg.clientHeight || 600;
    this.positions = computeLayout(
      state.nodes.values(),
      state.edges.values(),
      { width, height },
      this.positions,
    );

    while (this.svg.firstChild) {
      this.svg.removeChild(this.svg.firstChild);
    }

    const edgeLayer = document.createElementNS(SVG_NS, "g");
    for (const edge of state.edges.values()) {
      const from = this.positions.get(edge.source);
      const to = this.positions.get(edge.target);
      if (!from || !to) {
        continue;
      }
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(from.x));
      line.setAttribute("y1", String(from.y));
      line.setAttribute("x2", String(to.x));
      line.setAttribute("y2", String(to.y));
      line.setAttribute("class", "edge");
      edgeLayer.appendChild(line);

      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String((from.x + to.x) / 2));
      label.setAttribute("y", String((from.y + to.y) / 2 - 4));
      label.setAttribute("class", "edge-label");
      label.textContent = shortPredicate(edge.predicate);
      edgeLayer.appendChild(label);
    }
    this.svg.appendChild(edgeLayer);

    const nodeLayer = document.createElementNS(SVG_NS, "g");
    for (const node of state.nodes.values()) {
      const point = this.positions.get(node.id);
      if (!point) {
        continue;
      }
      const group = document.createElementNS(SVG_NS, "g");
      const classes = ["node", `node-${node.kind}`];
      if (node.id === state.focus) {
        classes.push("node-focus");
      }
      if (node.expandable && !node.expanded) {
        classes.push("node-expandable");
      }
      group.setAttribute("class", classes.join(" "));

      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(point.x));
      circle.setAttribute("cy", String(point.y));
      circle.setAttribute("r", String(NODE_RADIUS[node.kind]));
      group.appendChild(circle);

      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(point.x));
      label.setAttribute("y", String(point.y + NODE_RADIUS[node.kind] + 12));
      label.setAttribute("class", "node-label");
      label.textContent = truncate(node.label, 28);
      group.appendChild(label);

      if (node.hiddenInbound > 0) {
        const more = document.createElementNS(SVG_NS, "text");
        more.setAttribute("x", String(point.x));
        more.setAttribute("y", String(point.y - NODE_RADIUS[node.kind] - 6));
        more.setAttribute("class", "node-more");
        more.textContent = `+${node.hiddenInbound} more`;
        group.appendChild(more);
      }

      if (node.iri) {
        group.addEventListener("click", () => handlers.onNodeClick(node.id));
      }
      nodeLayer.appendChild(group);
    }
    this.svg.appendChild(nodeLayer);
  }
}

export function renderBanner(element: HTMLElement, message: string | null): void {
  element.textContent = message ?? "";
  element.classList.toggle("hidden", message === null);
}

export function renderResults(
  container: HTMLElement,
  panel: QueryPanelState,
  onIriClick: (uri: string) => void,
): void {
  container.textContent = "";

  if (panel.error) {
    const error = document.createElement("p");
    error.className = "query-error";
    error.textContent = panel.error;
    container.appendChild(error);
  }
  if (!panel.ran) {
    return;
  }

  if (panel.rows.length === 0) {
    const empty = document.createElement("p");
    empty.className = "query-empty";
    empty.textContent = "0 rows";
    container.appendChild(empty);
    return;
  }

  const table = document.createElement("table");
  const head = table.createTHead().insertRow();
  for (const variable of panel.vars) {
    const cell = document.createElement("th");
    cell.textContent = `?${variable}`;
    head.appendChild(cell);
  }
  const body = table.createTBody();
  for (const row of panel.rows) {
    const tr = body.insertRow();
    for (const variable of panel.vars) {
      const cell = tr.insertCell();
      const term = row[variable];
      if (!term) {
        cell.textContent = "";
      } else if (term.type === "uri") {
        const link = document.createElement("a");
        link.href = "#";
        link.textContent = term.value;
        link.addEventListener("click", (event) => {
          event.preventDefault();
          onIriClick(term.value);
        });
        cell.appendChild(link);
      } else {
        cell.textContent = termText(term);
      }
    }
  }
  container.appendChild(table);

  if (panel.truncated) {
    const note = document.createElement("p");
    note.className = "query-truncated";
    note.textContent = "results truncated by the server";
    container.appendChild(note);
  }
}

function termText(term: TermJson): string {
  if (term.type === "bnode") {
    return `_:${term.value}`;
  }
  return term["xml:lang"] ? `${term.value}@${term["xml:lang"]}` : term.value;
}
