// Orchestration between the portal client and the view state. Rendering is
// injected as a callback so this layer stays testable without a DOM.

import { PortalClient, QueryError } from "./api.js";
import {
  GraphViewState,
  QueryPanelState,
  emptyQueryPanel,
  emptyState,
  mergeDescription,
} from "./state.js";

export interface ExplorerEvents {
  onGraphChange?: (state: GraphViewState) => void;
  onQueryChange?: (state: QueryPanelState) => void;
  onBanner?: (message: string | null) => void;
}

export class Explorer {
  readonly graph: GraphViewState;
  readonly queryPanel: QueryPanelState;
  private client: PortalClient;
  private events: ExplorerEvents;
  private describeSequence = 0;
  private inFlight = new Map<string, number>();

  constructor(client: PortalClient, events: ExplorerEvents = {}) {
    this.client = client;
    this.events = events;
    this.graph = emptyState();
    this.queryPanel = emptyQueryPanel();
  }

  /** Fetch an entity and make it the focus. */
  async loadEntity(uri: string): Promise<void> {
    await this.describe(uri, true);
  }

  /** Merge an entity's neighborhood without moving the focus. */
  async expandNode(uri: string): Promise<void> {
    const node = this.graph.nodes.get(uri);
    if (node && (!node.expandable || node.expanded)) {
      return;
    }
    await this.describe(uri, false);
  }

  private async describe(uri: string, refocus: boolean): Promise<void> {
    // One in-flight describe per node; a newer request supersedes the
    // response of an older one for the same URI.
    const ticket = ++this.describeSequence;
    this.inFlight.set(uri, ticket);
    try {
      const description = await this.client.describe(uri);
      if (this.inFlight.get(uri) !== ticket) {
        return;
      }
      mergeDescription(this.graph, description);
      if (refocus) {
        this.graph.focus = description.subject;
      }
      this.events.onBanner?.(null);
      this.events.onGraphChange?.(this.graph);
    } catch (err) {
      if (this.inFlight.get(uri) === ticket) {
        this.events.onBanner?.(String(err instanceof Error ? err.message : err));
      }
    } finally {
      if (this.inFlight.get(uri) === ticket) {
        this.inFlight.delete(uri);
      }
    }
  }

  /** Run the console query; on failure keep the previous results visible. */
  async runQuery(queryText: string): Promise<void> {
    this.queryPanel.queryText = queryText;
    try {
      const results = await this.client.query(queryText);
      this.queryPanel.vars = results.head.vars;
      this.queryPanel.rows = results.results.bindings;
      this.queryPanel.truncated = results.truncated;
      this.queryPanel.error = null;
      this.queryPanel.ran = true;
    } catch (err) {
      if (err instanceof QueryError) {
        this.queryPanel.error = err.message;
      } else {
        this.queryPanel.error = String(err instanceof Error ? err.message : err);
      }
    }
    this.events.onQueryChange?.(this.queryPanel);
  }

  /** A click on a URI cell in the results table jumps the graph there. */
  async openResultTerm(uri: string): Promise<void> {
    await this.loadEntity(uri);
  }
}
