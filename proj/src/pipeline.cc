#include "pktablex/pipeline.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pktablex/config_text.h"
#include "pktablex/grid.h"
#include "pktablex/markup.h"
#include "pktablex/text.h"

namespace pktablex {

namespace fs = std::filesystem;

namespace {

std::optional<SourceKind> kind_for_extension(const fs::path& p) {
  const std::string ext = to_lower_ascii(p.extension().string());
  if (ext == ".xml") return SourceKind::kXml;
  if (ext == ".html" || ext == ".htm" || ext == ".xhtml") return SourceKind::kHtml;
  return std::nullopt;
}

std::string strip_extension(const fs::path& rel) {
  fs::path p = rel;
  p.replace_extension();
  return p.generic_string();
}

std::string opt(const std::optional<std::string>& s) { return s ? *s : std::string(); }

std::string decimal_text(const std::optional<Decimal>& d) { return d ? d->text : std::string(); }

CsvRow sentence_row(const std::string& doc_id, const DenseGrid& grid, LayoutCase layout,
                    const std::string& sentence, int row, int col) {
  CsvRow r;
  r.doc_id = doc_id;
  r.table_id = grid.table_id;
  r.table_caption = grid.caption;
  r.layout_case = to_string(layout);
  r.mode_row = "sentence";
  r.row_index = row;
  r.col_index = col;
  r.sentence = sentence;
  return r;
}

}  // namespace

std::optional<InputFormat> parse_input_format(std::string_view s) {
  if (iequals(s, "auto")) return InputFormat::kAuto;
  if (iequals(s, "xml")) return InputFormat::kXml;
  if (iequals(s, "html")) return InputFormat::kHtml;
  return std::nullopt;
}

std::optional<OutputMode> parse_output_mode(std::string_view s) {
  if (iequals(s, "sentences")) return OutputMode::kSentences;
  if (iequals(s, "records")) return OutputMode::kRecords;
  if (iequals(s, "both")) return OutputMode::kBoth;
  return std::nullopt;
}

void ExtractionReport::merge(const ExtractionReport& o) {
  docs_seen += o.docs_seen;
  docs_failed += o.docs_failed;
  tables_seen += o.tables_seen;
  tables_skipped += o.tables_skipped;
  for (size_t i = 0; i < per_case.size(); ++i) per_case[i] += o.per_case[i];
  records_emitted += o.records_emitted;
  sentences_emitted += o.sentences_emitted;
  grid_violations += o.grid_violations;
  warnings.insert(warnings.end(), o.warnings.begin(), o.warnings.end());
  failed_docs.insert(failed_docs.end(), o.failed_docs.begin(), o.failed_docs.end());
}

std::string ExtractionReport::to_json() const {
  nlohmann::ordered_json j;
  j["docs_seen"] = docs_seen;
  j["docs_failed"] = docs_failed;
  j["tables_seen"] = tables_seen;
  j["tables_skipped"] = tables_skipped;
  nlohmann::ordered_json cases;
  for (auto c : {LayoutCase::kCommon, LayoutCase::kTransposed, LayoutCase::kMergedHeader,
                 LayoutCase::kMergedIndex}) {
    cases[to_string(c)] = case_count(c);
  }
  j["per_case"] = cases;
  j["records_emitted"] = records_emitted;
  j["sentences_emitted"] = sentences_emitted;
  j["grid_violations"] = grid_violations;
  j["failed_docs"] = failed_docs;
  auto w = nlohmann::ordered_json::array();
  for (const auto& x : warnings) {
    w.push_back({{"doc_id", x.doc_id}, {"table_id", x.table_id}, {"message", x.message}});
  }
  j["warnings"] = w;
  return j.dump(2);
}

CsvRow to_csv_row(const PkRecord& rec, const std::string& caption) {
  CsvRow r;
  r.doc_id = rec.doc_id;
  r.table_id = rec.table_id;
  r.table_caption = caption;
  r.layout_case = to_string(rec.layout_case);
  r.mode_row = "record";
  r.parameter_canonical = rec.parameter_canonical;
  r.parameter_raw = rec.parameter_raw;
  r.unit = opt(rec.unit);
  r.value_raw = rec.value.raw;
  r.value_mean = decimal_text(rec.value.mean);
  r.value_spread = decimal_text(rec.value.spread);
  if (rec.dose) {
    r.dose_value = rec.dose->value.text;
    r.dose_unit = rec.dose->unit;
  }
  r.route = opt(rec.route);
  r.matrix = opt(rec.matrix);
  r.animal = opt(rec.animal);
  r.drug = opt(rec.drug);
  r.row_index = rec.row_index;
  r.col_index = rec.col_index;
  r.sentence = rec.sentence;
  return r;
}

Engine Engine::from_config(const RunConfig& config) {
  if (config.parallelism < 1) throw FatalError("--jobs must be at least 1");
  try {
    Engine e{load_ontology(config.ontology_path, config.lexicon_path),
             config.profile_path ? load_tag_profile(*config.profile_path) : TagProfile::defaults()};
    e.profile.validate();
    if (!config.caps_drug_fallback) e.ontology.set_caps_drug_fallback(false);
    if (config.wanted_params) {
      for (const auto& p : *config.wanted_params) {
        if (!e.ontology.has_canonical(p)) {
          throw FatalError("unknown parameter '" + p + "'; known: " +
                           join(e.ontology.canonicals(), ", "));
        }
      }
    }
    return e;
  } catch (const ConfigError& err) {
    throw FatalError(err.what());
  }
}

DocumentResult process_document(const std::string& doc_id, std::string_view bytes,
                                SourceKind kind, const RunConfig& config, const Engine& engine) {
  DocumentResult res;
  ExtractionReport& rep = res.report;
  rep.docs_seen = 1;
  auto fail = [&](const std::string& why) {
    rep.docs_failed = 1;
    rep.failed_docs.push_back(doc_id);
    rep.warnings.push_back({doc_id, "", why});
  };

  Diagnostics ingest_diag;
  std::vector<RawTable> tables;
  try {
    tables = find_tables(bytes, kind, engine.profile, &ingest_diag);
  } catch (const MalformedDocument& e) {
    fail(std::string("malformed document: ") + e.what());
    return res;
  }
  for (auto& w : ingest_diag.warnings) rep.warnings.push_back({doc_id, "", std::move(w)});

  std::ostringstream dump;
  std::optional<std::set<std::string>> wanted;
  if (config.wanted_params) {
    wanted.emplace();
    for (const auto& p : *config.wanted_params) wanted->insert(to_lower_ascii(p));
  }
  for (const RawTable& raw : tables) {
    ++rep.tables_seen;
    Diagnostics diag;
    const DenseGrid grid = normalize(raw, &diag);
    const auto violations = validate_grid(grid);
    rep.grid_violations += static_cast<int>(violations.size());
    for (const auto& v : violations) diag.warn("grid invariant broken: " + v);
    if (config.dump_grids) dump_grid(dump, grid, doc_id);

    auto flush_warnings = [&] {
      for (auto& w : diag.warnings) rep.warnings.push_back({doc_id, raw.table_id, std::move(w)});
      diag.warnings.clear();
    };
    if (config.strict && !violations.empty()) {
      flush_warnings();
      fail("strict mode: table " + raw.table_id + " failed grid validation");
      res.rows.clear();
      rep.records_emitted = rep.sentences_emitted = 0;
      return res;
    }

    HeaderBoundary boundary;
    try {
      boundary = detect_header_boundary(grid, engine.ontology);
    } catch (const DegenerateTable& e) {
      ++rep.tables_skipped;
      diag.warn(std::string("skipped: ") + e.what());
      flush_warnings();
      continue;
    }
    LayoutClass lc = classify(raw, grid, boundary, engine.ontology);
    if (config.force_case) lc.layout = *config.force_case;
    ++rep.per_case[static_cast<size_t>(lc.layout)];

    const CaptionFacts facts = mine_caption(grid.caption, engine.ontology);
    if (!facts.drug) diag.warn("caption names no drug");

    if (config.mode != OutputMode::kRecords) {
      const SentenceDoc doc =
          extract_sentences(raw, grid, boundary, lc.layout, facts, engine.ontology);
      for (size_t i = 0; i < doc.sentences.size(); ++i) {
        res.rows.push_back(sentence_row(doc_id, grid, lc.layout, doc.sentences[i],
                                        doc.coords[i].first, doc.coords[i].second));
      }
      rep.sentences_emitted += static_cast<int>(doc.sentences.size());
    }
    if (config.mode != OutputMode::kSentences) {
      auto records =
          extract_records_advanced(grid, boundary, facts, engine.ontology, wanted, &diag);
      if (records.empty()) diag.warn("no parameter values extracted");
      for (auto& rec : records) {
        rec.doc_id = doc_id;
        rec.layout_case = lc.layout;
        res.rows.push_back(to_csv_row(rec, grid.caption));
      }
      rep.records_emitted += static_cast<int>(records.size());
    }
    flush_warnings();
  }
  res.grid_dump = dump.str();
  return res;
}

std::vector<InputDocument> collect_inputs(const RunConfig& config) {
  std::vector<InputDocument> docs;
  auto add = [&](const fs::path& file, const std::string& doc_id) {
    std::optional<SourceKind> kind = kind_for_extension(file);
    if (config.format == InputFormat::kXml) kind = SourceKind::kXml;
    if (config.format == InputFormat::kHtml) kind = SourceKind::kHtml;
    if (kind) docs.push_back({file, doc_id, *kind});
  };
  for (const auto& input : config.input_paths) {
    std::error_code ec;
    if (fs::is_directory(input, ec)) {
      std::vector<fs::path> files;
      for (auto it = fs::recursive_directory_iterator(input, ec);
           !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (it->is_regular_file() && kind_for_extension(it->path())) files.push_back(it->path());
      }
      if (ec) throw FatalError("cannot read directory " + input.string() + ": " + ec.message());
      for (const auto& f : files) add(f, strip_extension(fs::relative(f, input)));
    } else if (fs::is_regular_file(input, ec)) {
      add(input, strip_extension(input.filename()));
    } else {
      throw FatalError("input not found: " + input.string());
    }
  }
  std::stable_sort(docs.begin(), docs.end(), [](const InputDocument& a, const InputDocument& b) {
    return a.doc_id < b.doc_id;
  });
  return docs;
}

void sort_rows(std::vector<CsvRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const CsvRow& a, const CsvRow& b) {
    if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
    if (a.table_id != b.table_id) {
      if (natural_less(a.table_id, b.table_id)) return true;
      if (natural_less(b.table_id, a.table_id)) return false;
      return a.table_id < b.table_id;
    }
    if (a.row_index != b.row_index) return a.row_index < b.row_index;
    return a.col_index < b.col_index;
  });
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void emit_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  for (size_t i = 0; i < kCsvColumns.size(); ++i) {
    if (i) out << ',';
    out << kCsvColumns[i];
  }
  out << '\n';
  for (const CsvRow& r : rows) {
    const std::string fields[] = {r.doc_id,        r.table_id,
                                  r.table_caption, r.layout_case,
                                  r.mode_row,      r.parameter_canonical,
                                  r.parameter_raw, r.unit,
                                  r.value_raw,     r.value_mean,
                                  r.value_spread,  r.dose_value,
                                  r.dose_unit,     r.route,
                                  r.matrix,        r.animal,
                                  r.drug,          std::to_string(r.row_index),
                                  std::to_string(r.col_index), r.sentence};
    for (size_t i = 0; i < std::size(fields); ++i) {
      if (i) out << ',';
      out << csv_escape(fields[i]);
    }
    out << '\n';
  }
}

void emit_csv(const std::vector<CsvRow>& rows, const RunConfig& config) {
  if (config.output_path == "-") {
    emit_csv(std::cout, rows);
    std::cout.flush();
    if (!std::cout) throw FatalError("failed writing CSV to stdout");
    return;
  }
  std::ofstream out(config.output_path, std::ios::binary | std::ios::trunc);
  if (!out) throw FatalError("cannot open output " + config.output_path.string());
  emit_csv(out, rows);
  out.close();
  if (!out) throw FatalError("failed writing " + config.output_path.string());
}

namespace {

// Runs `work(i)` for i in [0, n) on `jobs` threads. Results are stored by
// index, so completion order never leaks into the output.
template <typename Fn>
void parallel_for(size_t n, int jobs, Fn work) {
  const size_t threads = std::min<size_t>(std::max(jobs, 1), std::max<size_t>(n, 1));
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) work(i);
    });
  }
  for (auto& th : pool) th.join();
}

DocumentResult process_file(const InputDocument& in, const RunConfig& config,
                            const Engine& engine) {
  std::string bytes;
  try {
    bytes = read_file(in.path);
  } catch (const ConfigError& e) {
    DocumentResult res;
    res.report.docs_seen = 1;
    res.report.docs_failed = 1;
    res.report.failed_docs.push_back(in.doc_id);
    res.report.warnings.push_back({in.doc_id, "", e.what()});
    return res;
  }
  return process_document(in.doc_id, bytes, in.kind, config, engine);
}

}  // namespace

ExtractionReport run(const RunConfig& config, std::ostream* dump_stream) {
  const Engine engine = Engine::from_config(config);
  const auto inputs = collect_inputs(config);

  std::vector<DocumentResult> results(inputs.size());
  parallel_for(inputs.size(), config.parallelism,
               [&](size_t i) { results[i] = process_file(inputs[i], config, engine); });

  ExtractionReport report;
  std::vector<CsvRow> rows;
  for (auto& r : results) {
    report.merge(r.report);
    rows.insert(rows.end(), std::make_move_iterator(r.rows.begin()),
                std::make_move_iterator(r.rows.end()));
    if (config.dump_grids && dump_stream) *dump_stream << r.grid_dump;
  }
  sort_rows(rows);
  emit_csv(rows, config);
  if (config.report_path) {
    std::ofstream out(*config.report_path, std::ios::binary | std::ios::trunc);
    if (!out) throw FatalError("cannot open report " + config.report_path->string());
    out << report.to_json() << '\n';
  }
  return report;
}

ExtractionReport validate_inputs(const RunConfig& config) {
  const Engine engine = Engine::from_config(config);
  const auto inputs = collect_inputs(config);
  std::vector<ExtractionReport> parts(inputs.size());
  parallel_for(inputs.size(), config.parallelism, [&](size_t i) {
    ExtractionReport& rep = parts[i];
    const InputDocument& in = inputs[i];
    rep.docs_seen = 1;
    auto fail = [&](const std::string& table, const std::string& why) {
      if (!rep.docs_failed) rep.failed_docs.push_back(in.doc_id);
      rep.docs_failed = 1;
      rep.warnings.push_back({in.doc_id, table, why});
    };
    try {
      Diagnostics diag;
      const auto tables = find_tables(read_file(in.path), in.kind, engine.profile, &diag);
      for (auto& w : diag.warnings) rep.warnings.push_back({in.doc_id, "", std::move(w)});
      for (const auto& raw : tables) {
        ++rep.tables_seen;
        Diagnostics tdiag;
        const DenseGrid grid = normalize(raw, &tdiag);
        for (auto& w : tdiag.warnings) rep.warnings.push_back({in.doc_id, raw.table_id, std::move(w)});
        for (const auto& v : validate_grid(grid)) {
          ++rep.grid_violations;
          fail(raw.table_id, "grid invariant broken: " + v);
        }
      }
    } catch (const MalformedDocument& e) {
      fail("", std::string("malformed document: ") + e.what());
    } catch (const ConfigError& e) {
      fail("", e.what());
    }
  });
  ExtractionReport report;
  for (const auto& p : parts) report.merge(p);
  return report;
}

}  // namespace pktablex
