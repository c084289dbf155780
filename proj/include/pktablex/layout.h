#ifndef PKTABLEX_LAYOUT_H_
#define PKTABLEX_LAYOUT_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pktablex/grid.h"
#include "pktablex/ontology.h"
#include "pktablex/table_ingest.h"

namespace pktablex {

enum class LayoutCase { kCommon, kTransposed, kMergedHeader, kMergedIndex };

// "common", "transposed", "merged-header", "merged-index".
const char* to_string(LayoutCase c);
std::optional<LayoutCase> parse_layout_case(std::string_view s);

struct LayoutClass {
  LayoutCase layout = LayoutCase::kCommon;
  bool had_header_spans = false;
  bool had_index_spans = false;

  bool operator==(const LayoutClass&) const = default;
};

struct HeaderBoundary {
  int header_rows = 1;
  int index_cols = 1;

  bool operator==(const HeaderBoundary&) const = default;
};

// Raised for tables too small to carry a header and a body.
class DegenerateTable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Header rows come from markup when declared, else the leading run of rows
// without any numeric cell. A second index column is assumed only when
// column 1 is headed "Units".
HeaderBoundary detect_header_boundary(const DenseGrid& grid, const Ontology& ontology);

// Span flags come from the raw table; orientation from ontology hit counts
// in the index column versus the first header row.
LayoutClass classify(const RawTable& raw, const DenseGrid& grid,
                     const HeaderBoundary& boundary, const Ontology& ontology);

// Number of ontology hits among index-column cells below the header, and
// among first-row cells right of the index columns.
struct OrientationHits {
  int index_column = 0;
  int header_row = 0;
};
OrientationHits count_orientation_hits(const DenseGrid& grid, const HeaderBoundary& boundary,
                                       const Ontology& ontology);

}  // namespace pktablex

#endif  // PKTABLEX_LAYOUT_H_
