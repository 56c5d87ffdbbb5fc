// Graph view state and the merge rules that grow it.
//
// Invariants: at most one node per IRI, edges always reference existing
// nodes, and merging a description never removes anything. rdf:type links
// are folded into the node's kind instead of drawn as edges.

import type { DescribeResponse, TermJson } from "./api.js";

export type NodeKind = "station" | "observation" | "literal" | "external";

export interface GraphNode {
  id: string;
  /** Absolute IRI for entity nodes; literals have no IRI. */
  iri: string | null;
  label: string;
  kind: NodeKind;
  expanded: boolean;
  expandable: boolean;
  /** How many inbound links the portal reports beyond the ones shown. */
  hiddenInbound: number;
}

export interface GraphEdge {
  source: string;
  predicate: string;
  target: string;
}

export interface GraphViewState {
  nodes: Map<string, GraphNode>;
  edges: Map<string, GraphEdge>;
  focus: string | null;
}

export function emptyState(): GraphViewState {
  return { nodes: new Map(), edges: new Map(), focus: null };
}

const RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

export function kindForIri(iri: string): NodeKind {
  const path = stripOrigin(iri);
  if (path.startsWith("/station/")) {
    return "station";
  }
  if (path.startsWith("/obs/")) {
    return "observation";
  }
  return "external";
}

function stripOrigin(iri: string): string {
  const schemeEnd = iri.indexOf("://");
  if (schemeEnd < 0) {
    return iri;
  }
  const pathStart = iri.indexOf("/", schemeEnd + 3);
  return pathStart < 0 ? "" : iri.slice(pathStart);
}

/** Last path segment, percent-decoded, as a fallback display name. */
export function labelForIri(iri: string): string {
  const path = stripOrigin(iri);
  const segments = path.split("/").filter((part) => part.length > 0);
  const tail = segments.length > 0 ? segments[segments.length - 1] : iri;
  try {
    return decodeURIComponent(tail);
  } catch {
    return tail;
  }
}

function literalLabel(term: TermJson): string {
  return term["xml:lang"] ? `${term.value}@${term["xml:lang"]}` : term.value;
}

// Literal leaves are keyed by owner+predicate+value so re-merging the same
// description lands on the same node instead of sprouting duplicates.
function literalNodeId(owner: string, predicate: string, term: TermJson): string {
  return `lit|${owner}|${predicate}|${term.datatype ?? ""}|${term["xml:lang"] ?? ""}|${term.value}`;
}

function edgeKey(edge: GraphEdge): string {
  return `${edge.source}|${edge.predicate}|${edge.target}`;
}

function ensureEntityNode(
  state: GraphViewState,
  iri: string,
  expandable: boolean,
): GraphNode {
  let node = state.nodes.get(iri);
  if (!node) {
    node = {
      id: iri,
      iri,
      label: labelForIri(iri),
      kind: kindForIri(iri),
      expanded: false,
      expandable,
      hiddenInbound: 0,
    };
    state.nodes.set(iri, node);
  } else if (expandable && !node.expandable) {
    node.expandable = true;
  }
  return node;
}

function ensureLiteralNode(
  state: GraphViewState,
  owner: string,
  predicate: string,
  term: TermJson,
): GraphNode {
  const id = literalNodeId(owner, predicate, term);
  let node = state.nodes.get(id);
  if (!node) {
    node = {
      id,
      iri: null,
      label: literalLabel(term),
      kind: "literal",
      expanded: false,
      expandable: false,
      hiddenInbound: 0,
    };
    state.nodes.set(id, node);
  }
  return node;
}

function addEdge(state: GraphViewState, edge: GraphEdge): void {
  const key = edgeKey(edge);
  if (!state.edges.has(key)) {
    state.edges.set(key, edge);
  }
}

/**
 * Fold one /describe response into the view. The described entity becomes
 * (or stays) a node marked expanded; every non-type neighbor becomes a node
 * joined by one edge. Safe to call repeatedly with the same payload.
 */
export function mergeDescription(
  state: GraphViewState,
  description: DescribeResponse,
): GraphViewState {
  const subject = ensureEntityNode(state, description.subject, true);
  subject.expanded = true;
  if (description.label) {
    subject.label = description.label;
  }
  subject.hiddenInbound = Math.max(
    0,
    description.inbound_total - description.inbound.length,
  );

  for (const entry of description.outbound) {
    if (entry.predicate === RDF_TYPE) {
      continue;
    }
    let target: GraphNode;
    if (entry.object.type === "literal") {
      target = ensureLiteralNode(state, description.subject, entry.predicate, entry.object);
    } else {
      target = ensureEntityNode(state, entry.object.value, entry.expandable);
    }
    addEdge(state, {
      source: subject.id,
      predicate: entry.predicate,
      target: target.id,
    });
  }

  for (const entry of description.inbound) {
    if (entry.subject.type === "literal") {
      continue;
    }
    const source = ensureEntityNode(state, entry.subject.value, entry.expandable);
    addEdge(state, {
      source: source.id,
      predicate: entry.predicate,
      target: subject.id,
    });
  }

  return state;
}

export interface QueryPanelState {
  queryText: string;
  vars: string[];
  rows: Record<string, TermJson>[];
  truncated: boolean;
  error: string | null;
  ran: boolean;
}

export function emptyQueryPanel(): QueryPanelState {
  return { queryText: "", vars: [], rows: [], truncated: false, error: null, ran: false };
}
