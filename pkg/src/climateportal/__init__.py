"""Linked-data portal for daily climate summaries.

Ingests NOAA Climate Data Online records, maps them to RDF, and serves
them through a SPARQL-subset endpoint, dereferenceable entity URIs, and a
browser-based graph explorer.
"""

__version__ = "0.1.0"
