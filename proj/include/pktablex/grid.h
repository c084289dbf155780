#ifndef PKTABLEX_GRID_H_
#define PKTABLEX_GRID_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "pktablex/diagnostics.h"
#include "pktablex/table_ingest.h"

namespace pktablex {

// Rectangular, span-free table. Every position holds text; positions that no
// cell covered hold "NaN".
struct DenseGrid {
  std::vector<std::vector<std::string>> cells;  // row-major
  int n_rows = 0;
  int n_cols = 0;
  int header_row_count = 0;
  std::string caption;
  std::string table_id;

  const std::string& at(int row, int col) const { return cells[row][col]; }

  bool operator==(const DenseGrid&) const = default;
};

// Expands every span by replicating the cell text over the rectangle it
// covers. When two cells claim a position the earlier one in document order
// keeps it. Row spans running past the last row are clamped.
DenseGrid normalize(const RawTable& table, Diagnostics* diag = nullptr);

// Human-readable descriptions of broken DenseGrid invariants; empty when the
// grid is well formed.
std::vector<std::string> validate_grid(const DenseGrid& grid);

// Rows become columns. The header row count is reset to 0 because markup
// header sections do not survive a transpose.
DenseGrid transpose(const DenseGrid& grid);

// A span-free RawTable whose normalization reproduces `grid`.
RawTable to_raw_table(const DenseGrid& grid);

// Debug dump: one tab-separated line per row, header rows prefixed with '#'.
void dump_grid(std::ostream& out, const DenseGrid& grid, const std::string& doc_id);

}  // namespace pktablex

#endif  // PKTABLEX_GRID_H_
