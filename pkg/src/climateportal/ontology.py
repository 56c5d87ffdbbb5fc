"""Climate vocabulary, schema triples, and the record-to-RDF mapping.

The vocabulary hangs off the portal base IRI (namespace
``{base}/ontology/ca#``), entity URIs are minted deterministically under
the same base, and every mapped triple therefore dereferences through the
portal itself.
"""

from __future__ import annotations

from urllib.parse import quote

from climateportal.rdf.graph import Graph, Triple
from climateportal.rdf.terms import (
    RDF,
    RDF_PROPERTY,
    RDF_TYPE,
    RDFS,
    RDFS_CLASS,
    RDFS_DOMAIN,
    RDFS_LABEL,
    RDFS_RANGE,
    WGS84,
    WGS84_LAT,
    WGS84_LONG,
    XSD,
    XSD_DATE,
    XSD_DECIMAL,
    XSD_STRING,
    Iri,
    Literal,
    decimal_literal,
    date_literal,
)
from climateportal.records import ObservationRecord, RecordError, StationRecord, require_station_id

DEFAULT_BASE = "http://localhost:8000"


def _base_value(base) -> str:
    value = base.value if isinstance(base, Iri) else base
    return value.rstrip("/")


class CaVocabulary:
    """IRIs of the climate schema: two classes and five properties."""

    def __init__(self, namespace) -> None:
        self.namespace = namespace if isinstance(namespace, Iri) else Iri(namespace)
        ns = self.namespace.value
        self.station_class = Iri(ns + "Station")
        self.observation_class = Iri(ns + "Observation")
        self.has_station = Iri(ns + "hasStation")
        self.datatype = Iri(ns + "datatype")
        self.date = Iri(ns + "date")
        self.value = Iri(ns + "value")
        self.elevation = Iri(ns + "elevation")

    @classmethod
    def for_base(cls, base) -> "CaVocabulary":
        return cls(_base_value(base) + "/ontology/ca#")


def station_uri(base, station_id: str) -> Iri:
    """Mint the station entity IRI: {base}/station/{encoded id}."""
    require_station_id("station_id", station_id)
    return Iri(f"{_base_value(base)}/station/{quote(station_id, safe='')}")


def observation_uri(base, station_id: str, date, datatype_id: str) -> Iri:
    """Mint the observation IRI: {base}/obs/{encoded id}/{date}/{datatype}."""
    require_station_id("station_id", station_id)
    if not datatype_id:
        raise RecordError("datatype_id", "must be non-empty")
    return Iri(
        f"{_base_value(base)}/obs/{quote(station_id, safe='')}"
        f"/{date.isoformat()}/{quote(datatype_id, safe='')}"
    )


def map_station(record: StationRecord, base) -> list[Triple]:
    """Station entity triples: type, label, coordinates, optional elevation."""
    vocab = CaVocabulary.for_base(base)
    subject = station_uri(base, record.id)
    triples = [
        Triple(subject, Iri(RDF_TYPE), vocab.station_class),
        Triple(subject, Iri(RDFS_LABEL), Literal(record.name)),
        Triple(subject, Iri(WGS84_LAT), decimal_literal(record.latitude)),
        Triple(subject, Iri(WGS84_LONG), decimal_literal(record.longitude)),
    ]
    if record.elevation is not None:
        triples.append(Triple(subject, vocab.elevation, decimal_literal(record.elevation)))
    return triples


def map_observation(record: ObservationRecord, base) -> list[Triple]:
    """Observation entity triples: always exactly five."""
    vocab = CaVocabulary.for_base(base)
    subject = observation_uri(base, record.station_id, record.date, record.datatype_id)
    return [
        Triple(subject, Iri(RDF_TYPE), vocab.observation_class),
        Triple(subject, vocab.has_station, station_uri(base, record.station_id)),
        Triple(subject, vocab.datatype, Literal(record.datatype_id)),
        Triple(subject, vocab.date, date_literal(record.date)),
        Triple(subject, vocab.value, decimal_literal(record.value)),
    ]


def schema_triples(vocab: CaVocabulary) -> Graph:
    """The fixed T-box: class and property declarations with domain/range."""
    rdf_type = Iri(RDF_TYPE)
    graph = Graph()
    graph.insert(Triple(vocab.station_class, rdf_type, Iri(RDFS_CLASS)))
    graph.insert(Triple(vocab.observation_class, rdf_type, Iri(RDFS_CLASS)))
    declarations = [
        (vocab.has_station, vocab.observation_class, vocab.station_class),
        (vocab.datatype, vocab.observation_class, Iri(XSD_STRING)),
        (vocab.date, vocab.observation_class, Iri(XSD_DATE)),
        (vocab.value, vocab.observation_class, Iri(XSD_DECIMAL)),
        (vocab.elevation, vocab.station_class, Iri(XSD_DECIMAL)),
    ]
    for prop, domain, range_ in declarations:
        graph.insert(Triple(prop, rdf_type, Iri(RDF_PROPERTY)))
        graph.insert(Triple(prop, Iri(RDFS_DOMAIN), domain))
        graph.insert(Triple(prop, Iri(RDFS_RANGE), range_))
    return graph


def default_prefix_map(vocab: CaVocabulary) -> dict[str, str]:
    """Prefixes used when serializing portal graphs as Turtle."""
    return {
        "rdf": RDF,
        "rdfs": RDFS,
        "xsd": XSD,
        "geo": WGS84,
        "ca": vocab.namespace.value,
    }
