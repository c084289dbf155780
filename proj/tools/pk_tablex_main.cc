#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pktablex/config_text.h"
#include "pktablex/pipeline.h"
#include "pktablex/text.h"

namespace {

using pktablex::RunConfig;

void print_summary(const pktablex::ExtractionReport& r) {
  std::cerr << "docs " << r.docs_seen << " (failed " << r.docs_failed << "), tables "
            << r.tables_seen << " (skipped " << r.tables_skipped << "), common "
            << r.case_count(pktablex::LayoutCase::kCommon) << ", transposed "
            << r.case_count(pktablex::LayoutCase::kTransposed) << ", merged-header "
            << r.case_count(pktablex::LayoutCase::kMergedHeader) << ", merged-index "
            << r.case_count(pktablex::LayoutCase::kMergedIndex) << ", sentences "
            << r.sentences_emitted << ", records " << r.records_emitted << ", warnings "
            << r.warnings.size() << '\n';
  for (const auto& d : r.failed_docs) std::cerr << "failed: " << d << '\n';
}

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extract pharmacokinetic parameters from tables in XML/HTML articles"};
  app.require_subcommand(1);

  RunConfig config;
  config.parallelism = default_jobs();
  std::vector<std::string> inputs;
  std::string format = "auto";
  std::string mode = "both";
  std::string params;
  std::string ontology;
  std::string drugs;
  std::string profile;
  std::string output = config.output_path.string();
  std::string report;
  std::string force_case;
  bool no_caps = false;
  bool verbose = false;

  auto* extract = app.add_subcommand("extract", "Run the full extraction and write CSV");
  extract->add_option("-i,--input", inputs, "Input files or directories")->required();
  extract->add_option("--format", format, "auto, xml or html")->capture_default_str();
  extract->add_option("--mode", mode, "sentences, records or both")->capture_default_str();
  extract->add_option("--params", params, "Comma-separated canonical parameters to keep");
  extract->add_option("--ontology", ontology, "Ontology config file (default $PK_TABLEX_ONTOLOGY)");
  extract->add_option("--drugs", drugs, "Drug lexicon, one name per line");
  extract->add_option("--profile", profile, "Tag profile config file");
  extract->add_option("-o,--output", output, "CSV output path, '-' for stdout")->capture_default_str();
  extract->add_option("--report", report, "Write the run report as JSON");
  extract->add_flag("--dump-grids", config.dump_grids, "Print normalized grids to stderr");
  extract->add_option("--force-case", force_case,
                      "common, transposed, merged-header or merged-index");
  extract->add_flag("--strict", config.strict, "Treat grid validation failures as document failures");
  extract->add_option("-j,--jobs", config.parallelism, "Worker threads")->capture_default_str();
  extract->add_flag("--no-caps-drug-fallback", no_caps, "Do not guess drugs from all-caps caption words");
  extract->add_flag("-v,--verbose", verbose, "List every warning");

  auto* validate = app.add_subcommand("validate", "Ingest, normalize and validate only");
  validate->add_option("-i,--input", inputs, "Input files or directories")->required();
  validate->add_option("--format", format, "auto, xml or html")->capture_default_str();
  validate->add_option("--profile", profile, "Tag profile config file");
  validate->add_option("-j,--jobs", config.parallelism, "Worker threads")->capture_default_str();
  validate->add_flag("-v,--verbose", verbose, "List every warning");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (const auto& in : inputs) config.input_paths.emplace_back(in);
  if (auto f = pktablex::parse_input_format(format)) {
    config.format = *f;
  } else {
    std::cerr << "error: unknown --format '" << format << "'\n";
    return 1;
  }
  if (auto m = pktablex::parse_output_mode(mode)) {
    config.mode = *m;
  } else {
    std::cerr << "error: unknown --mode '" << mode << "'\n";
    return 1;
  }
  if (!force_case.empty()) {
    config.force_case = pktablex::parse_layout_case(force_case);
    if (!config.force_case) {
      std::cerr << "error: unknown --force-case '" << force_case << "'\n";
      return 1;
    }
  }
  if (!params.empty()) {
    config.wanted_params.emplace();
    for (const auto& p : pktablex::split_list(params)) {
      config.wanted_params->insert(pktablex::to_lower_ascii(p));
    }
  }
  if (ontology.empty()) {
    if (const char* env = std::getenv("PK_TABLEX_ONTOLOGY"); env && *env) ontology = env;
  }
  if (!ontology.empty()) config.ontology_path = ontology;
  if (!drugs.empty()) config.lexicon_path = drugs;
  if (!profile.empty()) config.profile_path = profile;
  if (!report.empty()) config.report_path = report;
  config.output_path = output;
  config.caps_drug_fallback = !no_caps;

  try {
    pktablex::ExtractionReport rep = validate->parsed()
                                         ? pktablex::validate_inputs(config)
                                         : pktablex::run(config, &std::cerr);
    if (verbose) {
      for (const auto& w : rep.warnings) {
        std::cerr << "warning: " << w.doc_id;
        if (!w.table_id.empty()) std::cerr << " [" << w.table_id << "]";
        std::cerr << ": " << w.message << '\n';
      }
    }
    print_summary(rep);
    return rep.exit_code();
  } catch (const pktablex::FatalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
