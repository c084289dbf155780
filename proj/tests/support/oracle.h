// Test-only reference implementations. Nothing here calls into the library
// code under test except for the plain data types.
#ifndef PKTABLEX_TESTS_ORACLE_H_
#define PKTABLEX_TESTS_ORACLE_H_

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pktablex/table_ingest.h"

namespace oracle {

inline std::string fixture(const std::string& rel) {
  return std::string(PKTABLEX_FIXTURE_DIR) + "/" + rel;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string read_fixture(const std::string& rel) { return slurp(fixture(rel)); }

// Golden files end with one newline that is not part of the content.
inline std::string read_golden(const std::string& rel) {
  std::string s = read_fixture(rel);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

// Pull-style expander: every position asks which cell, earliest in document
// order, covers it. The library pushes cells onto positions instead.
inline std::vector<std::vector<std::string>> paint(const pktablex::RawTable& t) {
  const int rows = static_cast<int>(t.row_count());
  const int cols = std::max(t.declared_cols, 1);
  struct Rect {
    int r0, r1, c0, c1;
    std::string text;
  };
  std::vector<Rect> rects;
  for (int r = 0; r < rows; ++r) {
    for (const auto& cell : t.row(r)) {
      Rect x;
      x.r0 = r;
      x.r1 = std::min(r + std::max(cell.extra_rows, 0), rows - 1);
      x.c0 = std::clamp(cell.col_start, 0, cols - 1);
      x.c1 = std::clamp(cell.col_end, x.c0, cols - 1);
      x.text = cell.text;
      rects.push_back(x);
    }
  }
  std::vector<std::vector<std::string>> g(rows, std::vector<std::string>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      std::string v = "NaN";
      for (const auto& x : rects) {
        if (r >= x.r0 && r <= x.r1 && c >= x.c0 && c <= x.c1) {
          if (!x.text.empty()) v = x.text;
          break;
        }
      }
      g[r][c] = v;
    }
  }
  return g;
}

// Random span tables up to max_dim x max_dim. With `disjoint` set, cells never
// overlap, never run past the bottom and never carry empty text, so area
// arithmetic holds exactly.
inline pktablex::RawTable random_table(std::mt19937& rng, int max_dim, bool disjoint) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  pktablex::RawTable t;
  const int rows = pick(1, max_dim);
  const int cols = pick(1, max_dim);
  t.declared_cols = cols;
  t.table_id = "rand";
  std::vector<std::vector<char>> taken(rows, std::vector<char>(cols, 0));
  int header = disjoint ? 0 : pick(0, rows);
  int serial = 0;
  for (int r = 0; r < rows; ++r) {
    pktablex::RawRow row;
    int c = 0;
    while (c < cols) {
      if (disjoint && taken[r][c]) {
        ++c;
        continue;
      }
      if (pick(0, 5) == 0) {  // leave a hole
        ++c;
        continue;
      }
      int w = pick(1, std::min(3, cols - c));
      int h = pick(0, 2);
      if (disjoint) {
        int ww = 1;
        while (ww < w && !taken[r][c + ww]) ++ww;
        w = ww;
        h = std::min(h, rows - 1 - r);
        bool free = true;
        for (int rr = r; rr <= r + h && free; ++rr) {
          for (int cc = c; cc < c + w; ++cc) free = free && !taken[rr][cc];
        }
        if (!free) h = 0;
        for (int rr = r; rr <= r + h; ++rr) {
          for (int cc = c; cc < c + w; ++cc) taken[rr][cc] = 1;
        }
      }
      pktablex::RawCell cell;
      cell.col_start = c;
      cell.col_end = c + w - 1;
      cell.extra_rows = h;
      cell.text = (!disjoint && pick(0, 7) == 0) ? "" : "v" + std::to_string(serial++);
      cell.is_header = r < header;
      row.push_back(cell);
      c += w;
    }
    (r < header ? t.header_rows : t.body_rows).push_back(std::move(row));
  }
  return t;
}

}  // namespace oracle

#endif  // PKTABLEX_TESTS_ORACLE_H_
