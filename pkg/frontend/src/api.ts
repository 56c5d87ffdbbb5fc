// HTTP client for the two portal endpoints the explorer is allowed to touch:
// GET /describe?uri=... and POST /sparql.

export interface TermJson {
  type: "uri" | "literal" | "bnode";
  value: string;
  datatype?: string;
  "xml:lang"?: string;
}

export interface OutboundEntry {
  predicate: string;
  object: TermJson;
  expandable: boolean;
}

export interface InboundEntry {
  subject: TermJson;
  predicate: string;
  expandable: boolean;
}

export interface DescribeResponse {
  subject: string;
  label: string | null;
  outbound: OutboundEntry[];
  inbound: InboundEntry[];
  inbound_total: number;
}

export interface SparqlResults {
  head: { vars: string[] };
  results: { bindings: Record<string, TermJson>[] };
  truncated: boolean;
}

/** Raised for SPARQL 400s; carries the server's positioned message. */
export class QueryError extends Error {}

/** Raised when either endpoint is unreachable or returns an unexpected status. */
export class PortalError extends Error {}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class PortalClient {
  private fetchImpl: FetchLike;
  private base: string;

  constructor(fetchImpl?: FetchLike, base = "") {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
    this.base = base.replace(/\/$/, "");
  }

  async describe(uri: string): Promise<DescribeResponse> {
    const url = `${this.base}/describe?uri=${encodeURIComponent(uri)}`;
    let response: Response;
    try {
      response = await this.fetchImpl(url);
    } catch (err) {
      throw new PortalError(`portal unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      throw new PortalError(`describe failed with status ${response.status}`);
    }
    return (await response.json()) as DescribeResponse;
  }

  async query(queryText: string): Promise<SparqlResults> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.base}/sparql`, {
        method: "POST",
        headers: {
          "Content-Type": "application/sparql-query",
          Accept: "application/sparql-results+json",
        },
        body: queryText,
      });
    } catch (err) {
      throw new PortalError(`portal unreachable: ${String(err)}`);
    }
    if (response.status === 400) {
      const detail = await response.text();
      throw new QueryError(extractErrorMessage(detail));
    }
    if (!response.ok) {
      throw new PortalError(`query failed with status ${response.status}`);
    }
    return (await response.json()) as SparqlResults;
  }
}

// 400 bodies are JSON like {"detail": "query error: line 1, column 8: ..."};
// fall back to the raw text when they are not.
function extractErrorMessage(body: string): string {
  try {
    const parsed = JSON.parse(body) as Record<string, unknown>;
    const detail = parsed["detail"] ?? parsed["error"];
    if (typeof detail === "string") {
      return detail;
    }
  } catch {
    // not JSON; use the body as-is
  }
  return body;
}
