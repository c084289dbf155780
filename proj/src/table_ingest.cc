#include "pktablex/table_ingest.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <regex>

#include "pktablex/config_text.h"
#include "pktablex/text.h"

namespace pktablex {

const char* to_string(SourceKind kind) {
  return kind == SourceKind::kXml ? "xml" : "html";
}

namespace {

bool tag_matches(const Node& n, const std::vector<std::string>& names) {
  if (n.kind != Node::Kind::kElement) return false;
  for (const auto& want : names) {
    if (want.find(':') != std::string::npos) {
      if (n.name == want) return true;
    } else if (n.local_name == want) {
      return true;
    }
  }
  return false;
}

std::optional<int> parse_int(std::string_view s) {
  const std::string t = trim(s);
  int v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) return std::nullopt;
  return v;
}

// Cell as declared in markup, before column placement.
struct CellSpec {
  std::string text;
  std::optional<int> start;
  std::optional<int> end;
  int width = 1;
  int extra_rows = 0;
  bool is_header = false;
};

using SpecRow = std::vector<CellSpec>;

// Places cells on columns, skipping positions held by row spans from rows
// above, then fixes the table width.
void layout_rows(const std::vector<SpecRow>& rows, size_t n_header,
                 std::optional<int> declared, Diagnostics* diag, RawTable& out) {
  std::vector<int> occupied_until;
  auto occupied = [&](int c, int r) {
    return c < static_cast<int>(occupied_until.size()) && occupied_until[c] >= r;
  };
  std::vector<RawRow> placed;
  placed.reserve(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    const int row = static_cast<int>(r);
    RawRow out_row;
    int cursor = 0;
    for (const CellSpec& spec : rows[r]) {
      int start = 0;
      if (spec.start) {
        start = *spec.start;
      } else {
        while (occupied(cursor, row)) ++cursor;
        start = cursor;
      }
      int end = spec.end ? *spec.end : start + std::max(spec.width, 1) - 1;
      if (start < 0) start = 0;
      if (end < start) {
        warn(diag, "inconsistent span: column end before start in row " +
                       std::to_string(r + 1) + "; clamped to one column");
        end = start;
      }
      const int extra = std::max(spec.extra_rows, 0);
      if (static_cast<int>(occupied_until.size()) <= end) {
        occupied_until.resize(end + 1, -1);
      }
      for (int c = start; c <= end; ++c) {
        occupied_until[c] = std::max(occupied_until[c], row + extra);
      }
      cursor = end + 1;
      out_row.push_back(RawCell{spec.text, start, end, extra,
                                spec.is_header || r < n_header});
    }
    placed.push_back(std::move(out_row));
  }

  int width = 0;
  for (const auto& row : placed) {
    for (const auto& c : row) width = std::max(width, c.col_end + 1);
  }
  if (declared && *declared > 0) {
    if (width > *declared) {
      warn(diag, "inconsistent span: cells reach column " + std::to_string(width) +
                     " of a " + std::to_string(*declared) +
                     "-column table; clamped to table width");
      for (auto& row : placed) {
        for (auto& c : row) {
          c.col_end = std::min(c.col_end, *declared - 1);
          c.col_start = std::min(c.col_start, *declared - 1);
        }
      }
    }
    width = *declared;
  }
  out.declared_cols = std::max(width, 1);
  out.header_rows.assign(placed.begin(),
                         placed.begin() + static_cast<long>(std::min(n_header, placed.size())));
  out.body_rows.assign(placed.begin() + static_cast<long>(std::min(n_header, placed.size())),
                       placed.end());
}

// Elements under `id` matching `names`, in document order, without entering
// nested tables.
void collect_descendants(const Document& doc, NodeId id,
                         const std::vector<std::string>& names,
                         const std::vector<std::string>& stop_at,
                         std::vector<NodeId>& out) {
  for (NodeId c : doc.element_children(id)) {
    const Node& n = doc.node(c);
    if (tag_matches(n, names)) {
      out.push_back(c);
      continue;
    }
    if (tag_matches(n, stop_at)) continue;
    collect_descendants(doc, c, names, stop_at, out);
  }
}

std::vector<NodeId> caption_children(const Document& doc, NodeId table,
                                     const std::vector<std::string>& caption_tags) {
  std::vector<NodeId> out;
  for (NodeId c : doc.element_children(table)) {
    if (tag_matches(doc.node(c), caption_tags)) out.push_back(c);
  }
  return out;
}

void fill_caption(const Document& doc, NodeId table,
                  const std::vector<std::string>& caption_tags, RawTable& t,
                  std::string& label) {
  std::vector<std::string> parts;
  for (NodeId c : caption_children(doc, table, caption_tags)) {
    std::string text = doc.text_content(c);
    if (text.empty()) continue;
    if (doc.node(c).local_name == "label" && label.empty()) label = text;
    parts.push_back(std::move(text));
  }
  t.caption = join(parts, " ");
}

struct ColumnNames {
  std::map<std::string, int> columns;
  std::map<std::string, std::pair<std::string, std::string>> spans;

  std::optional<int> resolve(const std::string& name) const {
    if (auto it = columns.find(name); it != columns.end()) return it->second;
    // Fall back to a trailing column number ("c3", "col3", "3").
    size_t k = name.size();
    while (k > 0 && std::isdigit(static_cast<unsigned char>(name[k - 1]))) --k;
    if (k == name.size()) return std::nullopt;
    if (auto n = parse_int(std::string_view(name).substr(k)); n && *n >= 1) {
      return *n - 1;
    }
    return std::nullopt;
  }
};

ColumnNames read_colspecs(const Document& doc, NodeId group) {
  ColumnNames names;
  int ordinal = 0;
  for (NodeId c : doc.element_children(group)) {
    const Node& n = doc.node(c);
    if (n.local_name == "colspec") {
      if (auto num = doc.attribute(c, "colnum"); num && parse_int(*num)) {
        ordinal = *parse_int(*num);
      } else {
        ++ordinal;
      }
      if (auto name = doc.attribute(c, "colname")) {
        names.columns[std::string(*name)] = ordinal - 1;
      }
    } else if (n.local_name == "spanspec") {
      auto sn = doc.attribute(c, "spanname");
      auto st = doc.attribute(c, "namest");
      auto en = doc.attribute(c, "nameend");
      if (sn && st && en) names.spans[std::string(*sn)] = {std::string(*st), std::string(*en)};
    }
  }
  return names;
}

const TagProfile& html_profile() {
  static const TagProfile p = [] {
    TagProfile t = TagProfile::defaults();
    t.row_tags = {"tr"};
    t.cell_tags = {"td", "th"};
    t.header_section_tags = {"thead"};
    t.caption_tags = {"caption", "label"};
    return t;
  }();
  return p;
}

const std::vector<std::string> kNestedTableStops = {"table", "informaltable"};

}  // namespace

TagProfile TagProfile::defaults() {
  TagProfile p;
  p.table_tags = {"ce:table", "table-wrap", "table", "informaltable"};
  p.caption_tags = {"ce:label", "ce:caption", "label", "caption", "title", "figcaption"};
  p.group_tags = {"tgroup"};
  p.row_tags = {"row", "tr"};
  p.header_section_tags = {"thead"};
  p.body_section_tags = {"tbody"};
  p.cell_tags = {"entry", "td", "th"};
  return p;
}

void TagProfile::validate(const std::string& source) const {
  const std::pair<const char*, const std::vector<std::string>*> lists[] = {
      {"table", &table_tags},           {"caption", &caption_tags},
      {"group", &group_tags},           {"row", &row_tags},
      {"header_section", &header_section_tags},
      {"body_section", &body_section_tags},
      {"cell", &cell_tags}};
  for (const auto& [role, list] : lists) {
    if (list->empty()) throw ConfigError(source, 0, std::string("role '") + role + "' has no names");
    for (const auto& n : *list) {
      if (trim(n).empty()) throw ConfigError(source, 0, std::string("role '") + role + "' has an empty name");
    }
  }
  if (span_attrs.col_start.empty() || span_attrs.col_end.empty() ||
      span_attrs.extra_rows.empty()) {
    throw ConfigError(source, 0, "span attribute names must be non-empty");
  }
}

TagProfile parse_tag_profile(std::string_view text, const std::string& source) {
  TagProfile p = TagProfile::defaults();
  for (const auto& e : parse_config_text(text, source)) {
    if (e.key.empty()) throw ConfigError(source, e.line, "expected 'role = names'");
    std::vector<std::string> names;
    for (auto& n : split_list(e.value)) names.push_back(to_lower_ascii(n));
    if (names.empty()) throw ConfigError(source, e.line, "role '" + e.key + "' has no names");
    const std::map<std::string, std::vector<std::string>*> roles = {
        {"table", &p.table_tags},
        {"caption", &p.caption_tags},
        {"group", &p.group_tags},
        {"row", &p.row_tags},
        {"header_section", &p.header_section_tags},
        {"body_section", &p.body_section_tags},
        {"cell", &p.cell_tags}};
    if (auto it = roles.find(e.key); it != roles.end()) {
      *it->second = std::move(names);
    } else if (e.key == "col_start") {
      p.span_attrs.col_start = names.front();
    } else if (e.key == "col_end") {
      p.span_attrs.col_end = names.front();
    } else if (e.key == "extra_rows") {
      p.span_attrs.extra_rows = names.front();
    } else {
      throw ConfigError(source, e.line, "unknown role '" + e.key + "'");
    }
  }
  p.validate(source);
  return p;
}

TagProfile load_tag_profile(const std::filesystem::path& path) {
  return parse_tag_profile(read_file(path), path.string());
}

RawTable parse_cals_table(const Document& doc, NodeId table,
                          const TagProfile& profile, Diagnostics* diag,
                          size_t group_index) {
  RawTable t;
  std::string label;
  fill_caption(doc, table, profile.caption_tags, t, label);
  t.table_id = label;

  std::vector<NodeId> groups;
  collect_descendants(doc, table, profile.group_tags, kNestedTableStops, groups);
  const NodeId group = group_index < groups.size() ? groups[group_index] : table;

  std::optional<int> declared;
  if (auto cols = doc.attribute(group, "cols")) declared = parse_int(*cols);
  const ColumnNames names = read_colspecs(doc, group);

  auto resolve = [&](std::string_view attr_value) -> std::optional<int> {
    const auto col = names.resolve(std::string(attr_value));
    if (!col) warn(diag, "unknown column name '" + std::string(attr_value) + "'");
    return col;
  };

  auto read_row = [&](NodeId row, bool header) {
    SpecRow out;
    std::vector<NodeId> cells;
    collect_descendants(doc, row, profile.cell_tags, kNestedTableStops, cells);
    for (NodeId c : cells) {
      CellSpec spec;
      spec.text = doc.text_content(c);
      spec.is_header = header;
      if (auto v = doc.attribute(c, "colname")) spec.start = resolve(*v);
      if (auto v = doc.attribute(c, profile.span_attrs.col_start)) spec.start = resolve(*v);
      if (auto v = doc.attribute(c, profile.span_attrs.col_end)) spec.end = resolve(*v);
      if (auto v = doc.attribute(c, "spanname")) {
        if (auto it = names.spans.find(std::string(*v)); it != names.spans.end()) {
          spec.start = resolve(it->second.first);
          spec.end = resolve(it->second.second);
        }
      }
      if (spec.end && !spec.start) {
        warn(diag, "column end given without a start; treated as single column");
        spec.end.reset();
      }
      if (auto v = doc.attribute(c, profile.span_attrs.extra_rows)) {
        spec.extra_rows = parse_int(*v).value_or(0);
      }
      out.push_back(std::move(spec));
    }
    return out;
  };

  std::vector<SpecRow> header;
  std::vector<SpecRow> body;
  for (NodeId c : doc.element_children(group)) {
    const Node& n = doc.node(c);
    const bool is_head = tag_matches(n, profile.header_section_tags);
    if (is_head || tag_matches(n, profile.body_section_tags)) {
      std::vector<NodeId> rows;
      collect_descendants(doc, c, profile.row_tags, kNestedTableStops, rows);
      for (NodeId r : rows) (is_head ? header : body).push_back(read_row(r, is_head));
    } else if (tag_matches(n, profile.row_tags)) {
      body.push_back(read_row(c, false));
    }
  }
  const size_t n_header = header.size();
  header.insert(header.end(), std::make_move_iterator(body.begin()),
                std::make_move_iterator(body.end()));
  layout_rows(header, n_header, declared, diag, t);
  return t;
}

RawTable parse_html_table(const Document& doc, NodeId table, Diagnostics* diag) {
  const TagProfile& profile = html_profile();
  RawTable t;
  t.source_kind = SourceKind::kHtml;
  std::string label;
  fill_caption(doc, table, profile.caption_tags, t, label);
  t.table_id = label;

  std::vector<NodeId> rows;
  collect_descendants(doc, table, profile.row_tags, kNestedTableStops, rows);

  std::vector<SpecRow> specs;
  std::vector<bool> in_thead;
  for (NodeId r : rows) {
    bool head = false;
    for (NodeId a = doc.node(r).parent; a != kNoNode && a != table; a = doc.node(a).parent) {
      if (doc.node(a).local_name == "thead") head = true;
    }
    SpecRow row;
    for (NodeId c : doc.element_children(r)) {
      const Node& n = doc.node(c);
      if (n.local_name != "td" && n.local_name != "th") continue;
      CellSpec spec;
      spec.text = doc.text_content(c);
      spec.is_header = head || n.local_name == "th";
      if (auto v = doc.attribute(c, "colspan")) spec.width = std::max(parse_int(*v).value_or(1), 1);
      if (auto v = doc.attribute(c, "rowspan")) spec.extra_rows = std::max(parse_int(*v).value_or(1), 1) - 1;
      row.push_back(std::move(spec));
    }
    specs.push_back(std::move(row));
    in_thead.push_back(head);
  }

  // Header rows come from <thead>; without one, a leading run of all-<th>
  // rows plays that role.
  size_t n_header = 0;
  const bool any_thead = std::find(in_thead.begin(), in_thead.end(), true) != in_thead.end();
  if (any_thead) {
    std::vector<SpecRow> head;
    std::vector<SpecRow> rest;
    for (size_t i = 0; i < specs.size(); ++i) {
      (in_thead[i] ? head : rest).push_back(std::move(specs[i]));
    }
    n_header = head.size();
    head.insert(head.end(), std::make_move_iterator(rest.begin()),
                std::make_move_iterator(rest.end()));
    specs = std::move(head);
  } else {
    while (n_header < specs.size() && !specs[n_header].empty() &&
           std::all_of(specs[n_header].begin(), specs[n_header].end(),
                       [](const CellSpec& c) { return c.is_header; })) {
      ++n_header;
    }
    if (n_header == specs.size()) n_header = 0;
  }
  layout_rows(specs, n_header, std::nullopt, diag, t);
  return t;
}

std::vector<RawTable> find_tables(std::string_view document, SourceKind kind,
                                  const TagProfile& profile, Diagnostics* diag) {
  const Document doc = parse_markup(
      document, kind == SourceKind::kXml ? MarkupMode::kXml : MarkupMode::kHtml);

  std::vector<NodeId> tables;
  collect_descendants(doc, doc.root(), profile.table_tags, {}, tables);

  static const std::regex kTableLabel(R"(^(Table|TABLE)\s+[A-Za-z]?[0-9]+[A-Za-z]?)");
  std::vector<RawTable> out;
  std::map<std::string, int> seen_ids;
  for (size_t k = 0; k < tables.size(); ++k) {
    const NodeId table = tables[k];
    std::vector<NodeId> groups;
    collect_descendants(doc, table, profile.group_tags, kNestedTableStops, groups);
    std::vector<NodeId> html_rows;
    collect_descendants(doc, table, {"tr"}, kNestedTableStops, html_rows);

    std::vector<RawTable> parsed;
    if (!groups.empty()) {
      for (size_t g = 0; g < groups.size(); ++g) {
        parsed.push_back(parse_cals_table(doc, table, profile, diag, g));
      }
    } else if (!html_rows.empty()) {
      parsed.push_back(parse_html_table(doc, table, diag));
      // Profile captions (e.g. <ce:caption>) may wrap an HTML-model table.
      RawTable& t = parsed.back();
      std::string label;
      RawTable with_profile_caption;
      fill_caption(doc, table, profile.caption_tags, with_profile_caption, label);
      if (!with_profile_caption.caption.empty()) t.caption = with_profile_caption.caption;
      if (!label.empty()) t.table_id = label;
    } else {
      parsed.push_back(parse_cals_table(doc, table, profile, diag));
    }

    for (size_t g = 0; g < parsed.size(); ++g) {
      RawTable& t = parsed[g];
      t.source_kind = kind;
      if (t.caption.empty()) {
        // Nearest preceding caption-like sibling at the parent level.
        const NodeId parent = doc.node(table).parent;
        if (parent != kNoNode) {
          NodeId best = kNoNode;
          for (NodeId c : doc.element_children(parent)) {
            if (c == table) break;
            if (tag_matches(doc.node(c), profile.caption_tags)) best = c;
          }
          if (best != kNoNode) t.caption = doc.text_content(best);
        }
      }
      if (t.table_id.empty()) {
        std::smatch m;
        if (std::regex_search(t.caption, m, kTableLabel)) {
          t.table_id = m.str(0);
        } else {
          t.table_id = "table-" + std::to_string(k + 1);
        }
      }
      if (parsed.size() > 1 && g > 0) t.table_id += "-" + std::to_string(g + 1);
      if (const int n = ++seen_ids[t.table_id]; n > 1) {
        t.table_id += "#" + std::to_string(n);
      }
      for (auto& row : t.header_rows) {
        for (auto& c : row) c.is_header = true;
      }
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace pktablex
