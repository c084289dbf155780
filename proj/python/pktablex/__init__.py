"""Pharmacokinetic parameter extraction from tables in XML/HTML articles."""

from ._pktablex import (  # noqa: F401
    CaptionFacts,
    DegenerateTable,
    DenseGrid,
    FatalError,
    HeaderBoundary,
    LayoutClass,
    MalformedDocument,
    Ontology,
    ParsedValue,
    PkRecord,
    RawCell,
    RawTable,
    SentenceDoc,
    classify,
    detect_header_boundary,
    extract_records,
    extract_sentences,
    find_tables,
    mine_caption,
    normalize,
    parse_value,
    run,
    serialize_header,
    transpose,
    validate_grid,
)
