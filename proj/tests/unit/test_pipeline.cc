#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "analyzed.h"
#include "pktablex/pipeline.h"

namespace pktablex {
namespace {

namespace fs = std::filesystem;

class Workdir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("pktablex_pipe_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunConfig config_for(std::vector<fs::path> inputs, const std::string& out = "out.csv") {
    RunConfig c;
    c.input_paths = std::move(inputs);
    c.output_path = dir_ / out;
    return c;
  }
  void copy_in(const std::string& rel, const std::string& as) {
    fs::create_directories((dir_ / "in" / as).parent_path());
    fs::copy_file(oracle::fixture(rel), dir_ / "in" / as, fs::copy_options::overwrite_existing);
  }
  std::string read(const std::string& name) { return oracle::slurp((dir_ / name).string()); }

  fs::path dir_;
};

TEST(Csv, EscapingFollowsRfc4180) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\", ok"), "\"say \"\"hi\"\", ok\"");
  EXPECT_EQ(csv_escape("line\nbreak"), "\"line\nbreak\"");
}

TEST(Csv, HeaderHasFixedColumnOrder) {
  std::ostringstream out;
  emit_csv(out, {});
  EXPECT_EQ(out.str(),
            "doc_id,table_id,table_caption,layout_case,mode_row,parameter_canonical,parameter_raw,"
            "unit,value_raw,value_mean,value_spread,dose_value,dose_unit,route,matrix,animal,drug,"
            "row_index,col_index,sentence\n");
}

TEST(Csv, CarboxylosartanRecordRow) {
  auto a = testutil::analyze(testutil::kCarboxylosartan);
  auto recs = a.records(std::set<std::string>{"clearance"});
  ASSERT_FALSE(recs.empty());
  CsvRow row = to_csv_row(recs[0], a.grid.caption);
  EXPECT_EQ(row.mode_row, "record");
  EXPECT_EQ(row.parameter_canonical, "clearance");
  EXPECT_EQ(row.value_mean, "16");
  EXPECT_EQ(row.unit, "mL/min/kg");
  EXPECT_EQ(row.animal, "Dog1");
  EXPECT_EQ(row.value_spread, "");
}

TEST(Csv, SortIsNaturalOnTableIds) {
  std::vector<CsvRow> rows(4);
  rows[0].doc_id = "b";
  rows[1].doc_id = "a";
  rows[1].table_id = "Table 10";
  rows[2].doc_id = "a";
  rows[2].table_id = "Table 2";
  rows[2].row_index = 3;
  rows[3].doc_id = "a";
  rows[3].table_id = "Table 2";
  rows[3].row_index = 1;
  sort_rows(rows);
  EXPECT_EQ(rows[0].row_index, 1);
  EXPECT_EQ(rows[1].row_index, 3);
  EXPECT_EQ(rows[2].table_id, "Table 10");
  EXPECT_EQ(rows[3].doc_id, "b");
}

TEST(Options, Parsers) {
  EXPECT_EQ(parse_input_format("html"), InputFormat::kHtml);
  EXPECT_EQ(parse_output_mode("records"), OutputMode::kRecords);
  EXPECT_FALSE(parse_output_mode("everything"));
}

TEST(ProcessDocument, SentenceRowsLeaveParameterColumnsEmpty) {
  RunConfig c;
  c.mode = OutputMode::kSentences;
  Engine e = Engine::from_config(c);
  auto res = process_document("mel", oracle::read_fixture(testutil::kMel), SourceKind::kXml, c, e);
  ASSERT_EQ(res.rows.size(), 17u);
  for (const auto& r : res.rows) {
    EXPECT_EQ(r.mode_row, "sentence");
    EXPECT_TRUE(r.parameter_canonical.empty() && r.value_raw.empty() && r.unit.empty());
    EXPECT_FALSE(r.sentence.empty());
    EXPECT_EQ(r.layout_case, "common");
  }
}

TEST(ProcessDocument, MalformedFails) {
  RunConfig c;
  Engine e = Engine::from_config(c);
  auto res = process_document("bad", oracle::read_fixture("malformed/broken.xml"), SourceKind::kXml, c, e);
  EXPECT_EQ(res.report.docs_failed, 1);
  EXPECT_TRUE(res.rows.empty());
}

TEST(Report, ArithmeticHolds) {
  RunConfig c;
  Engine e = Engine::from_config(c);
  ExtractionReport total;
  for (const char* rel : {testutil::kMel, testutil::kEprinomectin, testutil::kCarboxylosartan,
                          "synthetic/three_tables.xml"}) {
    total.merge(process_document(rel, oracle::read_fixture(rel), SourceKind::kXml, c, e).report);
  }
  int per_case = 0;
  for (int n : total.per_case) per_case += n;
  EXPECT_EQ(total.tables_seen, per_case + total.tables_skipped);
  EXPECT_EQ(total.docs_seen, 4);
  EXPECT_EQ(total.tables_seen, 7);
}

TEST(Report, JsonHasCounters) {
  ExtractionReport r;
  r.docs_seen = 2;
  r.warnings.push_back({"d", "t", "m \"q\""});
  const std::string j = r.to_json();
  EXPECT_NE(j.find("\"docs_seen\": 2"), std::string::npos);
  EXPECT_NE(j.find("m \\\"q\\\""), std::string::npos);
}

TEST_F(Workdir, EmptyDirectoryGivesHeaderOnly) {
  fs::create_directories(dir_ / "empty");
  auto rep = run(config_for({dir_ / "empty"}));
  EXPECT_EQ(rep.exit_code(), 0);
  EXPECT_EQ(read("out.csv"), std::string(
      "doc_id,table_id,table_caption,layout_case,mode_row,parameter_canonical,parameter_raw,"
      "unit,value_raw,value_mean,value_spread,dose_value,dose_unit,route,matrix,animal,drug,"
      "row_index,col_index,sentence\n"));
}

TEST_F(Workdir, MalformedDocumentIsContained) {
  copy_in(testutil::kMel, "a/mel.xml");
  copy_in("malformed/broken.xml", "broken.xml");
  copy_in(testutil::kEprinomectin, "epr.xml");
  auto rep = run(config_for({dir_ / "in"}));
  EXPECT_EQ(rep.docs_failed, 1);
  EXPECT_EQ(rep.failed_docs, std::vector<std::string>{"broken"});
  EXPECT_EQ(rep.exit_code(), 2);
  const std::string with_bad = read("out.csv");

  fs::remove(dir_ / "in" / "broken.xml");
  auto rep2 = run(config_for({dir_ / "in"}, "clean.csv"));
  EXPECT_EQ(rep2.exit_code(), 0);
  EXPECT_EQ(read("clean.csv"), with_bad);
  EXPECT_NE(with_bad.find("\na/mel,"), std::string::npos);
}

TEST_F(Workdir, RerunIsByteIdenticalAcrossParallelism) {
  copy_in(testutil::kMel, "mel.xml");
  copy_in(testutil::kImidol, "imidol.xml");
  copy_in(testutil::kCarboxylosartan, "carb.xml");
  RunConfig one = config_for({dir_ / "in"}, "one.csv");
  one.parallelism = 1;
  RunConfig many = config_for({dir_ / "in"}, "many.csv");
  many.parallelism = 8;
  run(one);
  run(many);
  run(config_for({dir_ / "in"}, "again.csv"));
  EXPECT_EQ(read("one.csv"), read("many.csv"));
  EXPECT_EQ(read("one.csv"), read("again.csv"));
}

TEST_F(Workdir, WantedParamsFilterRecords) {
  copy_in(testutil::kImidol, "imidol.xml");
  RunConfig c = config_for({dir_ / "in"});
  c.mode = OutputMode::kRecords;
  c.wanted_params = std::set<std::string>{"clearance"};
  auto rep = run(c);
  EXPECT_EQ(rep.records_emitted, 5);
  EXPECT_EQ(rep.sentences_emitted, 0);
}

TEST_F(Workdir, UnknownWantedParamIsFatal) {
  RunConfig c = config_for({dir_});
  c.wanted_params = std::set<std::string>{"bogus"};
  EXPECT_THROW(run(c), FatalError);
}

TEST_F(Workdir, BadOntologyIsFatal) {
  std::ofstream(dir_ / "bad.cfg") << "[nonsense]\nx = y\n";
  RunConfig c = config_for({dir_});
  c.ontology_path = dir_ / "bad.cfg";
  EXPECT_THROW(run(c), FatalError);
}

TEST_F(Workdir, UnwritableOutputIsFatal) {
  fs::create_directories(dir_ / "empty");
  RunConfig c = config_for({dir_ / "empty"});
  c.output_path = dir_ / "no" / "such" / "dir" / "out.csv";
  EXPECT_THROW(run(c), FatalError);
}

TEST_F(Workdir, StrictModeFailsOnlyOnViolations) {
  copy_in(testutil::kMel, "mel.xml");
  RunConfig c = config_for({dir_ / "in"});
  c.strict = true;
  EXPECT_EQ(run(c).exit_code(), 0);
}

TEST_F(Workdir, ValidateCountsTables) {
  copy_in(testutil::kMel, "mel.xml");
  copy_in("synthetic/three_tables.xml", "three.xml");
  auto rep = validate_inputs(config_for({dir_ / "in"}));
  EXPECT_EQ(rep.docs_seen, 2);
  EXPECT_EQ(rep.tables_seen, 4);
  EXPECT_EQ(rep.docs_failed, 0);
}

TEST_F(Workdir, ReportFileWritten) {
  copy_in(testutil::kMel, "mel.xml");
  RunConfig c = config_for({dir_ / "in"});
  c.report_path = dir_ / "report.json";
  run(c);
  EXPECT_NE(read("report.json").find("\"tables_seen\": 1"), std::string::npos);
}

TEST_F(Workdir, CollectInputsSortsAndStripsExtensions) {
  copy_in(testutil::kMel, "z.xml");
  copy_in("html/mel_goats.html", "sub/a.html");
  std::ofstream(dir_ / "in" / "notes.txt") << "ignored";
  auto docs = collect_inputs(config_for({dir_ / "in"}));
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].doc_id, "sub/a");
  EXPECT_EQ(docs[0].kind, SourceKind::kHtml);
  EXPECT_EQ(docs[1].doc_id, "z");
}

}  // namespace
}  // namespace pktablex
