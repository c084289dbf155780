#ifndef PKTABLEX_PIPELINE_H_
#define PKTABLEX_PIPELINE_H_

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pktablex/layout.h"
#include "pktablex/ontology.h"
#include "pktablex/retrieval.h"
#include "pktablex/table_ingest.h"

namespace pktablex {

enum class InputFormat { kAuto, kXml, kHtml };
enum class OutputMode { kSentences, kRecords, kBoth };

std::optional<InputFormat> parse_input_format(std::string_view s);
std::optional<OutputMode> parse_output_mode(std::string_view s);

// Bad configuration or an unwritable output; the run cannot start or finish.
class FatalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<std::filesystem::path> input_paths;
  InputFormat format = InputFormat::kAuto;
  OutputMode mode = OutputMode::kBoth;
  std::optional<std::set<std::string>> wanted_params;
  std::optional<std::filesystem::path> ontology_path;
  std::optional<std::filesystem::path> lexicon_path;
  std::optional<std::filesystem::path> profile_path;
  std::filesystem::path output_path = "pk_tablex.csv";  // "-" writes to stdout
  std::optional<std::filesystem::path> report_path;
  std::optional<LayoutCase> force_case;
  bool strict = false;
  bool dump_grids = false;
  bool caps_drug_fallback = true;
  int parallelism = 1;
};

struct ReportWarning {
  std::string doc_id;
  std::string table_id;
  std::string message;

  bool operator==(const ReportWarning&) const = default;
};

struct ExtractionReport {
  int docs_seen = 0;
  int docs_failed = 0;
  int tables_seen = 0;
  int tables_skipped = 0;
  std::array<int, 4> per_case{};  // indexed by LayoutCase
  int records_emitted = 0;
  int sentences_emitted = 0;
  int grid_violations = 0;
  std::vector<ReportWarning> warnings;
  std::vector<std::string> failed_docs;

  int case_count(LayoutCase c) const { return per_case[static_cast<size_t>(c)]; }
  // 0 when every document went through, 2 otherwise.
  int exit_code() const { return docs_failed == 0 ? 0 : 2; }
  void merge(const ExtractionReport& other);
  std::string to_json() const;
};

// One output line. Absent values are empty strings.
struct CsvRow {
  std::string doc_id;
  std::string table_id;
  std::string table_caption;
  std::string layout_case;
  std::string mode_row;  // "record" or "sentence"
  std::string parameter_canonical;
  std::string parameter_raw;
  std::string unit;
  std::string value_raw;
  std::string value_mean;
  std::string value_spread;
  std::string dose_value;
  std::string dose_unit;
  std::string route;
  std::string matrix;
  std::string animal;
  std::string drug;
  int row_index = 0;
  int col_index = 0;
  std::string sentence;
};

inline constexpr std::array<std::string_view, 20> kCsvColumns = {
    "doc_id",      "table_id",     "table_caption",  "layout_case", "mode_row",
    "parameter_canonical", "parameter_raw", "unit",  "value_raw",   "value_mean",
    "value_spread", "dose_value",  "dose_unit",      "route",       "matrix",
    "animal",      "drug",         "row_index",      "col_index",   "sentence"};

CsvRow to_csv_row(const PkRecord& record, const std::string& caption);

// Loaded configuration shared by all workers; read-only during a run.
struct Engine {
  Ontology ontology;
  TagProfile profile;

  static Engine from_config(const RunConfig& config);
};

struct DocumentResult {
  std::vector<CsvRow> rows;
  ExtractionReport report;
  std::string grid_dump;
};

// Runs every table of one in-memory document through the pipeline. Never
// throws for bad input: failures land in the result's report.
DocumentResult process_document(const std::string& doc_id, std::string_view bytes,
                                SourceKind kind, const RunConfig& config, const Engine& engine);

// Documents named by the inputs (files, or directories walked recursively for
// .xml/.html/.htm/.xhtml), paired with their ids: the path relative to the
// input directory, without extension. Sorted by id.
struct InputDocument {
  std::filesystem::path path;
  std::string doc_id;
  SourceKind kind = SourceKind::kXml;
};
std::vector<InputDocument> collect_inputs(const RunConfig& config);

// Sorts by (doc_id, table_id in natural order, row, col); ties keep their
// emission order.
void sort_rows(std::vector<CsvRow>& rows);

std::string csv_escape(std::string_view field);
void emit_csv(std::ostream& out, const std::vector<CsvRow>& rows);
void emit_csv(const std::vector<CsvRow>& rows, const RunConfig& config);

// Full batch: ingest, normalize, classify, retrieve, write CSV (and report).
// Throws FatalError for invalid configuration or IO failures on the output.
ExtractionReport run(const RunConfig& config, std::ostream* dump_stream = nullptr);

// Ingest, normalize and validate only; no CSV is written. A document fails
// when it cannot be parsed or one of its grids breaks an invariant.
ExtractionReport validate_inputs(const RunConfig& config);

}  // namespace pktablex

#endif  // PKTABLEX_PIPELINE_H_
