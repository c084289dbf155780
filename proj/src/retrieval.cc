#include "pktablex/retrieval.h"

#include <algorithm>

#include "pktablex/text.h"

namespace pktablex {

namespace {

bool is_nan(const std::string& s) { return s == kNaN; }

bool is_number_cell(const std::string& s) { return !is_nan(s) && parse_value(s).is_numeric(); }

std::string drop_parentheses(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c != '(' && c != ')') out.push_back(c);
  }
  return collapse_whitespace(out);
}

std::string strip_token_punct(std::string_view w) {
  size_t b = 0;
  size_t e = w.size();
  auto punct = [](char c) { return std::string_view(",.;:[]").find(c) != std::string_view::npos; };
  while (b < e && punct(w[b])) ++b;
  while (e > b && punct(w[e - 1])) --e;
  return std::string(w.substr(b, e - b));
}

// Column label as it appears inside a merged sentence: parentheses dropped,
// matrix words marked with a leading underscore ("_Plasma").
std::string render_column_label(std::string_view label, const Ontology& ontology) {
  std::vector<std::string> out;
  for (auto& tok : tokenize_words(drop_parentheses(label))) {
    const std::string bare = to_lower_ascii(strip_token_punct(tok));
    const auto& m = ontology.matrices();
    if (!bare.empty() && std::find(m.begin(), m.end(), bare) != m.end()) {
      out.push_back("_" + tok);
    } else {
      out.push_back(std::move(tok));
    }
  }
  return join(out, " ");
}

std::string merged_sentence(const std::string& param_label, const std::optional<std::string>& units_cell,
                            const std::string& value, const std::string& column_label,
                            const CaptionFacts& facts, const Ontology& ontology) {
  auto [name, unit] = split_label_unit(param_label);
  if (!unit && units_cell && !is_nan(*units_cell)) unit = units_cell;
  std::vector<std::string> parts;
  auto push = [&](std::string s) {
    s = collapse_whitespace(s);
    if (!s.empty()) parts.push_back(std::move(s));
  };
  push(name);
  if (unit) push(*unit);
  push(value);
  if (!is_nan(column_label)) push(render_column_label(column_label, ontology));
  if (facts.drug) push(*facts.drug);
  return join(parts, " ") + ".";
}

// Distinct non-placeholder header texts of each column, top to bottom.
std::vector<std::vector<std::string>> header_parts(const DenseGrid& grid, int header_rows) {
  std::vector<std::vector<std::string>> parts(grid.n_cols);
  for (int c = 0; c < grid.n_cols; ++c) {
    for (int r = 0; r < header_rows; ++r) {
      const std::string& s = grid.at(r, c);
      if (is_nan(s)) continue;
      if (std::find(parts[c].begin(), parts[c].end(), s) == parts[c].end()) parts[c].push_back(s);
    }
  }
  return parts;
}

// Rows or columns that report a hypothesis test, not a measurement.
bool is_statistic_label(std::string_view label) {
  static const std::vector<std::string> kTokens = {
      "kruskal", "mann-whitney", "mann–whitney", "wilcoxon", "anova", "t-test",
      "p value", "p-value", "significance"};
  const std::string l = to_lower_ascii(label);
  for (const auto& t : kTokens) {
    if (l.find(t) != std::string::npos) return true;
  }
  return false;
}

// A full-width body row repeating one text ("Losartan dosed at 20 mg") heads
// the rows below it.
bool is_section_row(const DenseGrid& grid, int r) {
  const std::string& first = grid.at(r, 0);
  if (is_nan(first) || grid.n_cols < 2) return false;
  for (int c = 1; c < grid.n_cols; ++c) {
    if (grid.at(r, c) != first) return false;
  }
  return true;
}

bool drug_like_header(std::string_view label) {
  const std::string l = to_lower_ascii(label);
  for (std::string_view w : {"compound", "drug", "substrate", "agent", "treatment", "analyte"}) {
    if (l.find(w) != std::string::npos) return true;
  }
  return false;
}

// "Dog1", "Rat 3", "cow A": an individual animal identifier.
bool names_animal(std::string_view label, const Ontology& ontology) {
  const std::string l = to_lower_ascii(trim(label));
  for (const auto& [token, canon] : ontology.animals()) {
    if (l.size() > token.size() && l.compare(0, token.size(), token) == 0) {
      const char next = l[token.size()];
      if (std::isdigit(static_cast<unsigned char>(next)) || next == ' ' || next == '-' ||
          next == '#') {
        return true;
      }
    }
  }
  return false;
}

// Lexicon-only drug lookup for table labels; the all-caps fallback is meant
// for captions.
std::optional<std::string> label_drug(std::string_view label, const Ontology& ontology) {
  const std::string l = to_lower_ascii(label);
  for (const auto& name : ontology.drug_lexicon()) {
    size_t pos = l.find(name);
    while (pos != std::string::npos) {
      const size_t end = pos + name.size();
      const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(l[pos - 1]));
      const bool right = end >= l.size() || !std::isalnum(static_cast<unsigned char>(l[end]));
      if (left && right) return std::string(label.substr(pos, name.size()));
      pos = l.find(name, pos + 1);
    }
  }
  return std::nullopt;
}

template <typename T>
std::optional<T> first_of(const std::vector<T>& v) {
  if (v.empty()) return std::nullopt;
  return v.front();
}

template <typename T>
std::optional<T> only_of(const std::vector<T>& v) {
  if (v.size() != 1) return std::nullopt;
  return v.front();
}

}  // namespace

void SentenceDoc::add(std::string sentence, int row, int col) {
  if (!sentences.empty()) joined += kSentenceSeparator;
  joined += sentence;
  sentences.push_back(std::move(sentence));
  coords.emplace_back(row, col);
}

std::vector<std::string> split_joined(std::string_view joined) {
  std::vector<std::string> out;
  if (joined.empty()) return out;
  size_t from = 0;
  while (true) {
    const size_t pos = joined.find(kSentenceSeparator, from);
    if (pos == std::string_view::npos) {
      out.emplace_back(joined.substr(from));
      break;
    }
    out.emplace_back(joined.substr(from, pos - from));
    from = pos + kSentenceSeparator.size();
  }
  return out;
}

int leading_label_columns(const DenseGrid& grid) {
  int n = 0;
  while (n < grid.n_cols - 1) {
    bool numeric = false;
    for (int r = 0; r < grid.n_rows && !numeric; ++r) numeric = is_number_cell(grid.at(r, n));
    if (numeric) break;
    ++n;
  }
  return std::max(n, 1);
}

std::string serialize_header(const DenseGrid& grid, const HeaderBoundary& boundary) {
  std::vector<std::string> tokens;
  const int rows = std::min(boundary.header_rows, grid.n_rows);
  for (int c = 0; c < grid.n_cols; ++c) {
    for (int r = 0; r < rows; ++r) tokens.push_back(grid.at(r, c));
  }
  return join(tokens, " ");
}

SentenceDoc extract_sentences_common(const DenseGrid& grid, const HeaderBoundary& boundary,
                                     const CaptionFacts& facts) {
  SentenceDoc doc;
  doc.table_id = grid.table_id;
  const std::string header = serialize_header(grid, boundary);
  for (int r = boundary.header_rows; r < grid.n_rows; ++r) {
    std::string s = join(grid.cells[r], " ") + " " + header + ".";
    if (facts.drug) s += " " + *facts.drug;
    doc.add(std::move(s), r, 0);
  }
  return doc;
}

SentenceDoc extract_sentences_transposed(const DenseGrid& grid,
                                         const HeaderBoundary& boundary,
                                         const CaptionFacts& facts) {
  DenseGrid t = transpose(grid);
  HeaderBoundary tb;
  tb.header_rows = std::clamp(std::max(boundary.index_cols, leading_label_columns(grid)), 1,
                              std::max(t.n_rows - 1, 1));
  tb.index_cols = std::clamp(boundary.header_rows, 1, std::max(t.n_cols - 1, 1));
  SentenceDoc doc = extract_sentences_common(t, tb, facts);
  doc.table_id = grid.table_id;
  for (auto& [r, c] : doc.coords) std::swap(r, c);
  return doc;
}

DenseGrid expand_merged_header(const RawTable& raw, const DenseGrid& grid,
                               const HeaderBoundary& boundary) {
  DenseGrid out;
  out.table_id = grid.table_id.empty() ? raw.table_id : grid.table_id;
  out.caption = grid.caption.empty() ? raw.caption : grid.caption;
  out.n_cols = grid.n_cols;
  const int h = std::clamp(boundary.header_rows, 0, grid.n_rows);
  std::vector<std::string> label(grid.n_cols);
  const auto parts = header_parts(grid, h);
  for (int c = 0; c < grid.n_cols; ++c) {
    label[c] = parts[c].empty() ? std::string(kNaN) : join(parts[c], " ");
  }
  out.cells.push_back(std::move(label));
  for (int r = h; r < grid.n_rows; ++r) out.cells.push_back(grid.cells[r]);
  out.n_rows = static_cast<int>(out.cells.size());
  out.header_row_count = 1;
  return out;
}

SentenceDoc extract_sentences_merged(const DenseGrid& expanded, const HeaderBoundary& boundary,
                                     const CaptionFacts& facts, const Ontology& ontology,
                                     bool transposed) {
  SentenceDoc doc;
  doc.table_id = expanded.table_id;
  const int first_body = std::clamp(boundary.header_rows, 1, expanded.n_rows);
  const int index_cols = std::clamp(boundary.index_cols, 1, expanded.n_cols);
  for (int r = first_body; r < expanded.n_rows; ++r) {
    std::optional<std::string> units;
    if (index_cols >= 2) units = expanded.at(r, 1);
    for (int c = index_cols; c < expanded.n_cols; ++c) {
      const std::string& cell = expanded.at(r, c);
      const std::string value = is_nan(cell) ? cell : parse_value(cell).cleaned;
      std::string s = merged_sentence(expanded.at(r, 0), units, value, expanded.at(0, c), facts,
                                      ontology);
      if (transposed) {
        doc.add(std::move(s), c, r);
      } else {
        doc.add(std::move(s), r, c);
      }
    }
  }
  return doc;
}

SentenceDoc extract_sentences(const RawTable& raw, const DenseGrid& grid,
                              const HeaderBoundary& boundary, LayoutCase layout,
                              const CaptionFacts& facts, const Ontology& ontology) {
  switch (layout) {
    case LayoutCase::kCommon:
      return extract_sentences_common(grid, boundary, facts);
    case LayoutCase::kTransposed:
      return extract_sentences_transposed(grid, boundary, facts);
    case LayoutCase::kMergedHeader: {
      const DenseGrid e = expand_merged_header(raw, grid, boundary);
      SentenceDoc doc = extract_sentences_merged(e, {1, boundary.index_cols}, facts, ontology);
      // Expanded row r sits at grid row r - 1 + header_rows.
      for (auto& [r, c] : doc.coords) r += boundary.header_rows - 1;
      return doc;
    }
    case LayoutCase::kMergedIndex: {
      DenseGrid t = transpose(grid);
      HeaderBoundary tb;
      tb.header_rows = std::clamp(leading_label_columns(grid), 1, std::max(t.n_rows - 1, 1));
      tb.index_cols = std::clamp(boundary.header_rows, 1, std::max(t.n_cols - 1, 1));
      t.header_row_count = tb.header_rows;
      const DenseGrid e = expand_merged_header(raw, t, tb);
      SentenceDoc doc = extract_sentences_merged(e, {1, tb.index_cols}, facts, ontology);
      for (auto& [r, c] : doc.coords) {
        const int tr = r + tb.header_rows - 1;
        r = c;
        c = tr;
      }
      return doc;
    }
  }
  return {};
}

std::vector<PkRecord> extract_records_advanced(const DenseGrid& grid,
                                               const HeaderBoundary& boundary,
                                               const CaptionFacts& facts,
                                               const Ontology& ontology,
                                               const std::optional<std::set<std::string>>& wanted,
                                               Diagnostics* diag) {
  std::vector<PkRecord> out;
  const int H = std::clamp(boundary.header_rows, 0, grid.n_rows);
  const int I = std::clamp(boundary.index_cols, 1, grid.n_cols);
  const auto parts = header_parts(grid, H);

  struct Param {
    std::string canonical;
    std::string raw;
    std::optional<std::string> unit;
  };
  auto match = [&](const std::string& label) -> std::optional<Param> {
    if (is_nan(label)) return std::nullopt;
    auto m = ontology.match_parameter(label);
    if (!m) return std::nullopt;
    return Param{m->canonical, label, m->unit_in_label};
  };

  std::vector<std::optional<Param>> col_param(grid.n_cols);
  int col_hits = 0;
  for (int c = I; c < grid.n_cols; ++c) {
    // The lowest matching header text is the most specific one.
    for (auto it = parts[c].rbegin(); it != parts[c].rend(); ++it) {
      if ((col_param[c] = match(*it))) break;
    }
    if (col_param[c]) ++col_hits;
  }
  std::vector<std::optional<Param>> row_param(grid.n_rows);
  int row_hits = 0;
  for (int r = H; r < grid.n_rows; ++r) {
    if ((row_param[r] = match(grid.at(r, 0)))) ++row_hits;
  }
  if (row_hits == 0 && col_hits == 0) return out;
  const bool params_on_rows = row_hits >= col_hits;

  auto column_label = [&](int c) {
    return parts[c].empty() ? std::string() : join(parts[c], " ");
  };
  // Everything in a row that describes it rather than measures something.
  auto row_context = [&](int r) {
    std::vector<std::string> bits;
    for (int c = 0; c < grid.n_cols; ++c) {
      const std::string& s = grid.at(r, c);
      if (is_nan(s)) continue;
      if (c < I || (!col_param[c] && !is_number_cell(s))) bits.push_back(s);
    }
    return join(bits, " ");
  };

  const bool drug_column = !params_on_rows && !parts[0].empty() &&
                           drug_like_header(join(parts[0], " "));
  std::set<int> warned_rows;
  std::vector<std::string> col_labels(grid.n_cols);
  std::vector<CaptionFacts> col_facts_cache(grid.n_cols);
  std::vector<std::optional<std::string>> col_drugs(grid.n_cols);
  for (int c = I; c < grid.n_cols; ++c) {
    col_labels[c] = column_label(c);
    col_facts_cache[c] = mine_label(col_labels[c], ontology);
    col_drugs[c] = label_drug(col_labels[c], ontology);
  }

  auto wanted_ok = [&](const std::string& canonical) {
    return !wanted || wanted->count(canonical) > 0;
  };

  // "Dose (mg/kg) | 0.3 | 1 | 3" rows give each column its own dose.
  std::vector<std::optional<Dose>> col_dose_row(grid.n_cols);
  if (params_on_rows) {
    for (int r = H; r < grid.n_rows; ++r) {
      if (row_param[r] || !starts_with_icase(grid.at(r, 0), "dose")) continue;
      for (int c = I; c < grid.n_cols; ++c) {
        if (col_dose_row[c] || is_nan(grid.at(r, c))) continue;
        col_dose_row[c] = first_of(mine_label(grid.at(r, 0) + " " + grid.at(r, c), ontology).doses);
      }
    }
  }

  CaptionFacts section;
  std::optional<std::string> section_drug;
  for (int r = H; r < grid.n_rows; ++r) {
    if (is_section_row(grid, r) && !row_param[r]) {
      const CaptionFacts f = mine_label(grid.at(r, 0), ontology);
      if (!f.doses.empty()) {
        section = f;
        section_drug.reset();
      }
      if (!f.matrices.empty()) section.matrices = f.matrices;
      if (f.route) section.route = f.route;
      if (f.animal) section.animal = f.animal;
      if (auto d = label_drug(grid.at(r, 0), ontology)) section_drug = d;
      continue;
    }
    if (is_statistic_label(grid.at(r, 0))) continue;
    if (!params_on_rows && ontology.is_aggregate_label(grid.at(r, 0))) continue;
    if (params_on_rows && !row_param[r]) continue;
    const std::string rlabel = params_on_rows ? grid.at(r, 0) : row_context(r);
    const CaptionFacts row_facts = mine_label(rlabel, ontology);
    const std::optional<std::string> row_drug = label_drug(rlabel, ontology);
    for (int c = I; c < grid.n_cols; ++c) {
      const std::optional<Param>& p = params_on_rows ? row_param[r] : col_param[c];
      if (!p || !wanted_ok(p->canonical)) continue;
      if (params_on_rows && is_statistic_label(col_labels[c])) continue;
      const std::string& cell = grid.at(r, c);
      if (is_nan(cell)) continue;
      ParsedValue v = parse_value(cell);
      if (!v.is_numeric()) continue;

      const std::string& clabel = col_labels[c];
      const CaptionFacts& col_facts = col_facts_cache[c];
      // Facts from the label crossing the parameter axis win over those of
      // the parameter's own label, which win over the caption.
      const CaptionFacts& cross = params_on_rows ? col_facts : row_facts;
      const CaptionFacts& own = params_on_rows ? row_facts : col_facts;

      PkRecord rec;
      rec.table_id = grid.table_id;
      rec.parameter_canonical = p->canonical;
      rec.parameter_raw = p->raw;
      rec.unit = p->unit;
      if (!rec.unit && I >= 2 && params_on_rows && !is_nan(grid.at(r, 1))) rec.unit = grid.at(r, 1);
      rec.row_index = r;
      rec.col_index = c;

      rec.dose = first_of(cross.doses);
      if (!rec.dose) rec.dose = col_dose_row[c];
      if (!rec.dose) rec.dose = first_of(own.doses);
      if (!rec.dose) rec.dose = first_of(section.doses);
      if (!rec.dose) rec.dose = only_of(facts.doses);
      rec.matrix = first_of(cross.matrices);
      if (!rec.matrix) rec.matrix = first_of(own.matrices);
      if (!rec.matrix) rec.matrix = first_of(section.matrices);
      if (!rec.matrix) rec.matrix = only_of(facts.matrices);
      rec.route = cross.route   ? cross.route
                  : own.route   ? own.route
                  : section.route ? section.route
                                  : facts.route;

      if (!params_on_rows && names_animal(grid.at(r, 0), ontology)) {
        rec.animal = grid.at(r, 0);
      } else {
        rec.animal = cross.animal    ? cross.animal
                     : own.animal  ? own.animal
                     : section.animal ? section.animal
                                      : facts.animal;
      }

      if (drug_column) {
        rec.drug = label_drug(grid.at(r, 0), ontology);
        if (!rec.drug && warned_rows.insert(r).second) {
          warn(diag, "table " + grid.table_id + " row " + std::to_string(r) + ": '" +
                         grid.at(r, 0) + "' is not a known drug; drug left empty");
        }
      } else {
        auto d = params_on_rows ? col_drugs[c] : row_drug;
        if (!d) d = params_on_rows ? row_drug : col_drugs[c];
        if (!d) d = section_drug;
        rec.drug = d ? d : facts.drug;
      }

      CaptionFacts sentence_facts;
      sentence_facts.drug = rec.drug;
      rec.sentence = merged_sentence(p->raw, rec.unit, v.cleaned,
                                     params_on_rows ? clabel : rlabel, sentence_facts, ontology);
      rec.value = std::move(v);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace pktablex
