#ifndef PKTABLEX_TABLE_INGEST_H_
#define PKTABLEX_TABLE_INGEST_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pktablex/diagnostics.h"
#include "pktablex/markup.h"

namespace pktablex {

enum class SourceKind { kXml, kHtml };

const char* to_string(SourceKind kind);

// One table cell as written in markup. Columns are 0-based and inclusive;
// `extra_rows` counts rows spanned below the cell's own row.
struct RawCell {
  std::string text;
  int col_start = 0;
  int col_end = 0;
  int extra_rows = 0;
  bool is_header = false;

  bool operator==(const RawCell&) const = default;
};

using RawRow = std::vector<RawCell>;

struct RawTable {
  std::string table_id;
  std::string caption;
  int declared_cols = 1;
  std::vector<RawRow> header_rows;
  std::vector<RawRow> body_rows;
  SourceKind source_kind = SourceKind::kXml;

  size_t row_count() const { return header_rows.size() + body_rows.size(); }
  // Row `i` counting header rows first.
  const RawRow& row(size_t i) const {
    return i < header_rows.size() ? header_rows[i] : body_rows[i - header_rows.size()];
  }

  bool operator==(const RawTable&) const = default;
};

struct SpanAttributeNames {
  std::string col_start = "namest";
  std::string col_end = "nameend";
  std::string extra_rows = "morerows";
};

// Element and attribute names that locate tables inside a provider's markup.
// Names without a namespace prefix also match prefixed elements with the same
// local name ("table" matches <ce:table>). Matching is case-insensitive.
struct TagProfile {
  std::vector<std::string> table_tags;
  std::vector<std::string> caption_tags;
  std::vector<std::string> group_tags;
  std::vector<std::string> row_tags;
  std::vector<std::string> header_section_tags;
  std::vector<std::string> body_section_tags;
  std::vector<std::string> cell_tags;
  SpanAttributeNames span_attrs;

  // Elsevier/CALS names plus generic fallbacks.
  static TagProfile defaults();

  // Throws ConfigError when a list is empty or holds an empty name.
  void validate(const std::string& source = "<tag profile>") const;
};

// Reads a profile file of "role = name, name, ..." lines. Roles: table,
// caption, group, row, header_section, body_section, cell, col_start,
// col_end, extra_rows. Roles not given keep their default lists.
TagProfile load_tag_profile(const std::filesystem::path& path);
TagProfile parse_tag_profile(std::string_view text, const std::string& source);

// Every table in `document`, in document order. Throws MalformedDocument when
// the bytes cannot be parsed.
std::vector<RawTable> find_tables(std::string_view document, SourceKind kind,
                                  const TagProfile& profile,
                                  Diagnostics* diag = nullptr);

// Parses one CALS group (tgroup) of the table rooted at `table`. When the
// table has no group element the table element itself is treated as one.
RawTable parse_cals_table(const Document& doc, NodeId table,
                          const TagProfile& profile, Diagnostics* diag = nullptr,
                          size_t group_index = 0);

// Parses an HTML-model table (tr/td/th with colspan/rowspan).
RawTable parse_html_table(const Document& doc, NodeId table,
                          Diagnostics* diag = nullptr);

}  // namespace pktablex

#endif  // PKTABLEX_TABLE_INGEST_H_
