#ifndef PKTABLEX_RETRIEVAL_H_
#define PKTABLEX_RETRIEVAL_H_

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pktablex/diagnostics.h"
#include "pktablex/grid.h"
#include "pktablex/layout.h"
#include "pktablex/ontology.h"
#include "pktablex/table_ingest.h"

namespace pktablex {

inline constexpr std::string_view kSentenceSeparator = " || ";

struct SentenceDoc {
  std::string table_id;
  std::vector<std::string> sentences;
  // Grid position each sentence was read from: the row label cell for row
  // readings, the data cell for merged readings.
  std::vector<std::pair<int, int>> coords;
  std::string joined;

  void add(std::string sentence, int row, int col);
};

// Splits a joined SentenceDoc string back into sentences.
std::vector<std::string> split_joined(std::string_view joined);

struct PkRecord {
  std::string doc_id;
  std::string table_id;
  std::string parameter_canonical;
  std::string parameter_raw;
  std::optional<std::string> unit;
  ParsedValue value;
  std::optional<Dose> dose;
  std::optional<std::string> route;
  std::optional<std::string> matrix;
  std::optional<std::string> animal;
  std::optional<std::string> drug;
  LayoutCase layout_case = LayoutCase::kCommon;
  int row_index = 0;
  int col_index = 0;
  std::string sentence;
};

// Header cells column by column, top to bottom, joined by single spaces.
std::string serialize_header(const DenseGrid& grid, const HeaderBoundary& boundary);

// One sentence per body row: the row's cells, the serialized header, a
// period, then the drug when one was mined.
SentenceDoc extract_sentences_common(const DenseGrid& grid, const HeaderBoundary& boundary,
                                     const CaptionFacts& facts);

// The common reading applied to the transposed grid; one sentence per data
// column. Coordinates refer to `grid`, not its transpose.
SentenceDoc extract_sentences_transposed(const DenseGrid& grid,
                                         const HeaderBoundary& boundary,
                                         const CaptionFacts& facts);

// Collapses the header rows into one synthesized row: each column's distinct
// header texts, top to bottom. Body rows are kept as they are. `raw` is only
// consulted for the caption and id, spans being already replicated in `grid`.
DenseGrid expand_merged_header(const RawTable& raw, const DenseGrid& grid,
                               const HeaderBoundary& boundary);

// One sentence per (body row, data column) of an expanded grid, row-major.
// With `transposed` set the grid is the transpose of the source table and
// coordinates are swapped back.
SentenceDoc extract_sentences_merged(const DenseGrid& expanded, const HeaderBoundary& boundary,
                                     const CaptionFacts& facts, const Ontology& ontology,
                                     bool transposed = false);

// Dispatches on the layout case. Coordinates refer to `grid`.
SentenceDoc extract_sentences(const RawTable& raw, const DenseGrid& grid,
                              const HeaderBoundary& boundary, LayoutCase layout,
                              const CaptionFacts& facts, const Ontology& ontology);

// Structured records. Expects the normalized grid with its header rows
// intact: parameters are matched against each header row's text separately
// so that "Clearance (l/h)" under a dose banner is still found.
std::vector<PkRecord> extract_records_advanced(const DenseGrid& grid,
                                               const HeaderBoundary& boundary,
                                               const CaptionFacts& facts,
                                               const Ontology& ontology,
                                               const std::optional<std::set<std::string>>& wanted,
                                               Diagnostics* diag = nullptr);

// Count of leading columns holding no numeric cell, at least 1.
int leading_label_columns(const DenseGrid& grid);

}  // namespace pktablex

#endif  // PKTABLEX_RETRIEVAL_H_
