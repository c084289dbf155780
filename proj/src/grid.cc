#include "pktablex/grid.h"

#include <algorithm>
#include <ostream>

#include "pktablex/text.h"

namespace pktablex {

DenseGrid normalize(const RawTable& table, Diagnostics* diag) {
  DenseGrid g;
  g.caption = table.caption;
  g.table_id = table.table_id;
  g.n_rows = static_cast<int>(table.row_count());
  g.n_cols = std::max(table.declared_cols, 1);
  g.header_row_count = static_cast<int>(table.header_rows.size());

  // Painting pass; `owned` marks positions already claimed by some cell, which
  // may carry empty text and still win the position.
  std::vector<std::vector<std::string>> cells(
      g.n_rows, std::vector<std::string>(g.n_cols));
  std::vector<std::vector<char>> owned(g.n_rows, std::vector<char>(g.n_cols, 0));

  for (int r = 0; r < g.n_rows; ++r) {
    for (const RawCell& cell : table.row(r)) {
      const int c0 = std::clamp(cell.col_start, 0, g.n_cols - 1);
      const int c1 = std::clamp(cell.col_end, c0, g.n_cols - 1);
      int last_row = r + std::max(cell.extra_rows, 0);
      if (last_row >= g.n_rows) {
        warn(diag, "row span of '" + cell.text + "' at row " + std::to_string(r + 1) +
                       " runs past the table bottom; clamped");
        last_row = g.n_rows - 1;
      }
      bool collided = false;
      for (int rr = r; rr <= last_row; ++rr) {
        for (int cc = c0; cc <= c1; ++cc) {
          if (owned[rr][cc]) {
            collided = true;
            continue;
          }
          owned[rr][cc] = 1;
          cells[rr][cc] = cell.text;
        }
      }
      if (collided) {
        warn(diag, "span collision: '" + cell.text + "' at row " + std::to_string(r + 1) +
                       " overlaps an earlier cell; earlier cell kept");
      }
    }
  }
  for (auto& row : cells) {
    for (auto& s : row) {
      if (s.empty()) s = std::string(kNaN);
    }
  }
  g.cells = std::move(cells);
  return g;
}

std::vector<std::string> validate_grid(const DenseGrid& grid) {
  std::vector<std::string> v;
  if (grid.n_rows <= 0) v.push_back("n_rows must be positive");
  if (grid.n_cols <= 0) v.push_back("n_cols must be positive");
  if (static_cast<int>(grid.cells.size()) != grid.n_rows) {
    v.push_back("row count " + std::to_string(grid.cells.size()) +
                " differs from n_rows " + std::to_string(grid.n_rows));
  }
  if (grid.header_row_count < 0 || grid.header_row_count > grid.n_rows) {
    v.push_back("header_row_count " + std::to_string(grid.header_row_count) +
                " outside [0, n_rows]");
  }
  for (size_t r = 0; r < grid.cells.size(); ++r) {
    const auto& row = grid.cells[r];
    if (static_cast<int>(row.size()) != grid.n_cols) {
      v.push_back("row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                  " cells, expected " + std::to_string(grid.n_cols));
    }
    for (size_t c = 0; c < row.size(); ++c) {
      if (row[c].empty()) {
        v.push_back("empty cell at (" + std::to_string(r) + ", " + std::to_string(c) + ")");
      }
    }
  }
  return v;
}

DenseGrid transpose(const DenseGrid& grid) {
  DenseGrid t;
  t.caption = grid.caption;
  t.table_id = grid.table_id;
  t.n_rows = grid.n_cols;
  t.n_cols = grid.n_rows;
  t.header_row_count = 0;
  t.cells.assign(t.n_rows, std::vector<std::string>(t.n_cols));
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) t.cells[c][r] = grid.cells[r][c];
  }
  return t;
}

RawTable to_raw_table(const DenseGrid& grid) {
  RawTable t;
  t.table_id = grid.table_id;
  t.caption = grid.caption;
  t.declared_cols = grid.n_cols;
  for (int r = 0; r < grid.n_rows; ++r) {
    const bool header = r < grid.header_row_count;
    RawRow row;
    for (int c = 0; c < grid.n_cols; ++c) {
      row.push_back(RawCell{grid.cells[r][c], c, c, 0, header});
    }
    (header ? t.header_rows : t.body_rows).push_back(std::move(row));
  }
  return t;
}

void dump_grid(std::ostream& out, const DenseGrid& grid, const std::string& doc_id) {
  out << "=== " << doc_id << '\t' << grid.table_id << '\n';
  for (int r = 0; r < grid.n_rows; ++r) {
    if (r < grid.header_row_count) out << '#';
    out << join(grid.cells[r], "\t") << '\n';
  }
  out << '\n';
}

}  // namespace pktablex
