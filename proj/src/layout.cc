#include "pktablex/layout.h"

#include <algorithm>

#include "pktablex/text.h"

namespace pktablex {

namespace {

bool row_has_number(const DenseGrid& grid, int r) {
  return std::any_of(grid.cells[r].begin(), grid.cells[r].end(), [](const std::string& s) {
    return s != kNaN && parse_value(s).is_numeric();
  });
}

}  // namespace

const char* to_string(LayoutCase c) {
  switch (c) {
    case LayoutCase::kCommon: return "common";
    case LayoutCase::kTransposed: return "transposed";
    case LayoutCase::kMergedHeader: return "merged-header";
    case LayoutCase::kMergedIndex: return "merged-index";
  }
  return "";
}

std::optional<LayoutCase> parse_layout_case(std::string_view s) {
  for (auto c : {LayoutCase::kCommon, LayoutCase::kTransposed, LayoutCase::kMergedHeader,
                 LayoutCase::kMergedIndex}) {
    if (iequals(s, to_string(c))) return c;
  }
  return std::nullopt;
}

HeaderBoundary detect_header_boundary(const DenseGrid& grid, const Ontology& ontology) {
  if (grid.n_rows < 2 || grid.n_cols < 2) {
    throw DegenerateTable("table " + grid.table_id + " is " + std::to_string(grid.n_rows) +
                          "x" + std::to_string(grid.n_cols) + "; need at least 2x2");
  }
  HeaderBoundary b;
  if (grid.header_row_count > 0) {
    if (grid.header_row_count >= grid.n_rows) {
      throw DegenerateTable("table " + grid.table_id + " has no body rows");
    }
    b.header_rows = grid.header_row_count;
  } else {
    int run = 0;
    while (run < grid.n_rows && !row_has_number(grid, run)) ++run;
    b.header_rows = std::clamp(run, 1, grid.n_rows - 1);
  }
  if (grid.n_cols > 2) {
    for (int r = 0; r < b.header_rows; ++r) {
      if (ontology.is_units_header(grid.at(r, 1))) {
        b.index_cols = 2;
        break;
      }
    }
  }
  return b;
}

OrientationHits count_orientation_hits(const DenseGrid& grid, const HeaderBoundary& boundary,
                                       const Ontology& ontology) {
  OrientationHits h;
  for (int r = boundary.header_rows; r < grid.n_rows; ++r) {
    if (ontology.match_parameter(grid.at(r, 0))) ++h.index_column;
  }
  for (int c = boundary.index_cols; c < grid.n_cols; ++c) {
    if (ontology.match_parameter(grid.at(0, c))) ++h.header_row;
  }
  return h;
}

LayoutClass classify(const RawTable& raw, const DenseGrid& grid,
                     const HeaderBoundary& boundary, const Ontology& ontology) {
  LayoutClass lc;
  const size_t header_rows = std::min<size_t>(boundary.header_rows, raw.row_count());
  for (size_t r = 0; r < header_rows; ++r) {
    for (const RawCell& cell : raw.row(r)) {
      if (cell.col_end > cell.col_start) lc.had_header_spans = true;
    }
  }
  // Only body rows: a row-spanning corner cell in the header ("Parameter"
  // over two header rows) says nothing about the index column.
  for (size_t r = header_rows; r < raw.row_count(); ++r) {
    for (const RawCell& cell : raw.row(r)) {
      if (cell.col_start == 0 && cell.extra_rows > 0) lc.had_index_spans = true;
    }
  }
  if (lc.had_header_spans) {
    lc.layout = LayoutCase::kMergedHeader;
  } else if (lc.had_index_spans) {
    lc.layout = LayoutCase::kMergedIndex;
  } else {
    const auto hits = count_orientation_hits(grid, boundary, ontology);
    lc.layout = hits.index_column >= hits.header_row ? LayoutCase::kCommon
                                                     : LayoutCase::kTransposed;
  }
  return lc;
}

}  // namespace pktablex
