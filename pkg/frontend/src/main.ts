// Entry point: wires the controller to the page and reads the ?focus=
// deep link so entity pages can hand off into the explorer.

import { PortalClient } from "./api.js";
import { Explorer } from "./controller.js";
import { GraphRenderer, renderBanner, renderResults } from "./render.js";

const DEFAULT_QUERY = `PREFIX ca: <${window.location.origin}/ontology/ca#>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
SELECT ?station ?label WHERE {
  ?station a ca:Station .
  ?station rdfs:label ?label .
} ORDER BY ?station`;

function requireElement<T extends Element>(selector: string): T {
  const element = document.querySelector<T>(selector);
  if (!element) {
    throw new Error(`missing page element: ${selector}`);
  }
  return element;
}

function start(): void {
  const svg = requireElement<SVGSVGElement>("#graph");
  const banner = requireElement<HTMLElement>("#banner");
  const results = requireElement<HTMLElement>("#results");
  const queryInput = requireElement<HTMLTextAreaElement>("#query-text");
  const runButton = requireElement<HTMLButtonElement>("#run-query");

  const graphRenderer = new GraphRenderer(svg);
  const explorer: Explorer = new Explorer(new PortalClient(), {
    onGraphChange: (state) =>
      graphRenderer.render(state, {
        onNodeClick: (id) => void explorer.expandNode(id),
      }),
    onQueryChange: (panel) =>
      renderResults(results, panel, (uri) => void explorer.openResultTerm(uri)),
    onBanner: (message) => renderBanner(banner, message),
  });

  queryInput.value = DEFAULT_QUERY;
  runButton.addEventListener("click", () => void explorer.runQuery(queryInput.value));
  queryInput.addEventListener("keydown", (event) => {
    if ((event.ctrlKey || event.metaKey) && event.key === "Enter") {
      void explorer.runQuery(queryInput.value);
    }
  });

  const focus = new URLSearchParams(window.location.search).get("focus");
  if (focus) {
    void explorer.loadEntity(focus);
  }
}

start();
