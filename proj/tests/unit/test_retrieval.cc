#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "analyzed.h"
#include "pktablex/text.h"

namespace pktablex {
namespace {

using testutil::analyze;
using testutil::ontology;

DenseGrid make_grid(std::vector<std::vector<std::string>> cells, int header_rows) {
  DenseGrid g;
  g.n_rows = static_cast<int>(cells.size());
  g.n_cols = static_cast<int>(cells.at(0).size());
  g.cells = std::move(cells);
  g.header_row_count = header_rows;
  g.table_id = "T";
  return g;
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

// Header serialization

TEST(SerializeHeader, MelIsColumnMajor) {
  auto a = analyze(testutil::kMel);
  EXPECT_EQ(serialize_header(a.grid, a.boundary), "Parameter NaN Units NaN IV Mean SD");
}

TEST(SerializeHeader, SingleRow) {
  DenseGrid g = make_grid({{"A", "B", "C"}, {"1", "2", "3"}}, 1);
  EXPECT_EQ(serialize_header(g, {1, 1}), "A B C");
}

TEST(SerializeHeader, TwoRowsTwoColumnsByHand) {
  DenseGrid g = make_grid({{"a1", "b1"}, {"a2", "b2"}, {"1", "2"}}, 2);
  // Column 0 top to bottom, then column 1.
  EXPECT_EQ(serialize_header(g, {2, 1}), "a1 a2 b1 b2");
}

// Common layout

TEST(CommonSentences, MelFirstRow) {
  auto a = analyze(testutil::kMel);
  SentenceDoc d = extract_sentences_common(a.grid, a.boundary, a.facts);
  ASSERT_FALSE(d.sentences.empty());
  EXPECT_EQ(d.sentences[0], "AUC h*ng/mL 26499 ± 4233 Parameter NaN Units NaN IV Mean SD. MEL");
}

TEST(CommonSentences, MelHasSeventeenDrugSuffixedSentences) {
  auto a = analyze(testutil::kMel);
  SentenceDoc d = extract_sentences_common(a.grid, a.boundary, a.facts);
  ASSERT_EQ(d.sentences.size(), 17u);
  for (const auto& s : d.sentences) EXPECT_TRUE(ends_with(s, ". MEL")) << s;
  EXPECT_EQ(d.sentences.back(), "V2 mL/kg 96.61 ± 31.07 Parameter NaN Units NaN IV Mean SD. MEL");
  EXPECT_EQ(split_joined(d.joined), d.sentences);
}

TEST(CommonSentences, HtmlCopyMatchesXml) {
  auto x = analyze(testutil::kMel);
  auto h = analyze("html/mel_goats.html");
  EXPECT_EQ(h.sentences().joined, x.sentences().joined);
}

TEST(CommonSentences, SingleBodyRowHasNoSeparator) {
  DenseGrid g = make_grid({{"Parameter", "Value"}, {"CL", "3"}}, 1);
  SentenceDoc d = extract_sentences_common(g, {1, 1}, CaptionFacts{});
  EXPECT_EQ(d.joined, "CL 3 Parameter Value.");
  EXPECT_EQ(d.joined.find(" || "), std::string::npos);
}

// Transposed layout

TEST(TransposedSentences, DualOfCommonOnMel) {
  auto a = analyze(testutil::kMel);
  DenseGrid t = transpose(a.grid);
  const HeaderBoundary bt = detect_header_boundary(t, ontology());
  SentenceDoc common = extract_sentences_common(a.grid, a.boundary, a.facts);
  SentenceDoc dual = extract_sentences_transposed(t, bt, a.facts);
  EXPECT_EQ(dual.sentences, common.sentences);
}

TEST(TransposedSentences, CarboxylosartanAgainstHandTransposedGrid) {
  auto a = analyze(testutil::kCarboxylosartan);
  SentenceDoc d = extract_sentences_transposed(a.grid, a.boundary, a.facts);
  ASSERT_EQ(d.sentences.size(), static_cast<size_t>(a.grid.n_cols - 1));
  // Oracle: transpose by hand, then read it the common way.
  std::vector<std::vector<std::string>> cells(a.grid.n_cols, std::vector<std::string>(a.grid.n_rows));
  for (int r = 0; r < a.grid.n_rows; ++r) {
    for (int c = 0; c < a.grid.n_cols; ++c) cells[c][r] = a.grid.at(r, c);
  }
  DenseGrid hand = make_grid(cells, 1);
  SentenceDoc oracle = extract_sentences_common(hand, {1, 1}, a.facts);
  EXPECT_EQ(d.sentences, oracle.sentences);
  EXPECT_EQ(d.sentences[4],
            "CL p (mL/min/kg) 16 21 19 ID Dog1 Dog2 Mean. Carboxylosartan");
}

TEST(TransposedSentences, SingleDataColumn) {
  DenseGrid g = make_grid({{"Group", "CL (L/h)"}, {"A", "1"}, {"B", "2"}}, 1);
  SentenceDoc d = extract_sentences_transposed(g, {1, 1}, CaptionFacts{});
  ASSERT_EQ(d.sentences.size(), 1u);
  EXPECT_EQ(d.sentences[0], "CL (L/h) 1 2 Group A B.");
}

// Merged header and merged index

TEST(ExpandMergedHeader, EprinomectinLabels) {
  auto a = analyze(testutil::kEprinomectin);
  DenseGrid e = expand_merged_header(a.raw, a.grid, a.boundary);
  EXPECT_EQ(e.header_row_count, 1);
  const std::vector<std::string> expected = {
      "Dose Parameters", "0.5 mg/kg BW (n = 5) Plasma", "0.5 mg/kg BW (n = 5) Milk",
      "1 mg/kg BW (n = 5) Plasma", "1 mg/kg BW (n = 5) Milk"};
  EXPECT_EQ(e.cells[0], expected);
  EXPECT_EQ(e.n_rows, a.grid.n_rows - 1);
}

TEST(ExpandMergedHeader, SpanFreeHeaderUnchanged) {
  DenseGrid g = make_grid({{"P", "A", "B"}, {"CL", "1", "2"}}, 1);
  RawTable raw = to_raw_table(g);
  EXPECT_EQ(expand_merged_header(raw, g, {1, 1}).cells, g.cells);
}

TEST(ExpandMergedHeader, ParentWidthsThreeTwoOverFiveChildren) {
  RawTable raw;
  raw.declared_cols = 5;
  raw.header_rows = {{{"P", 0, 2, 0, true}, {"Q", 3, 4, 0, true}},
                     {{"a", 0, 0, 0, true}, {"b", 1, 1, 0, true}, {"c", 2, 2, 0, true},
                      {"d", 3, 3, 0, true}, {"e", 4, 4, 0, true}}};
  raw.body_rows = {{{"1", 0, 0, 0, false}, {"2", 1, 1, 0, false}, {"3", 2, 2, 0, false},
                    {"4", 3, 3, 0, false}, {"5", 4, 4, 0, false}}};
  DenseGrid g = normalize(raw);
  DenseGrid e = expand_merged_header(raw, g, {2, 1});
  // Oracle: explicit cartesian pairing of each parent with the children under it.
  std::vector<std::string> expected;
  const std::vector<std::pair<std::string, std::vector<std::string>>> parents = {
      {"P", {"a", "b", "c"}}, {"Q", {"d", "e"}}};
  for (const auto& [p, kids] : parents) {
    for (const auto& k : kids) expected.push_back(p + " " + k);
  }
  EXPECT_EQ(e.cells[0], expected);
}

TEST(MergedSentences, EprinomectinGolden) {
  auto a = analyze(testutil::kEprinomectin);
  SentenceDoc d = a.sentences();
  ASSERT_EQ(d.sentences.size(), 28u);
  EXPECT_EQ(d.sentences[0], "C max ng/ml 15.48 ± 6.64 0.5 mg/kg BW n = 5 _Plasma eprinomectin.");
  EXPECT_EQ(d.joined, oracle::read_golden("golden/eprinomectin_case3.txt"));
  // Tmax rows carry each column's own dose label.
  EXPECT_EQ(d.sentences[6], "T max d 0.5 1 mg/kg BW n = 5 _Plasma eprinomectin.");
}

TEST(MergedSentences, CountIsParameterRowsTimesDataColumns) {
  auto a = analyze(testutil::kImidol);
  EXPECT_EQ(a.layout.layout, LayoutCase::kMergedHeader);
  EXPECT_EQ(a.sentences().sentences.size(), 7u * 5u);
}

TEST(MergedSentences, SingleDataColumnMatchesHandExpansion) {
  RawTable raw;
  raw.declared_cols = 2;
  raw.header_rows = {{{"Parameter", 0, 0, 0, true}, {"Plasma", 1, 1, 0, true}}};
  raw.body_rows = {{{"C max (ng/ml)", 0, 0, 0, false}, {"12 ± 2", 1, 1, 0, false}},
                   {{"MRT (h)", 0, 0, 0, false}, {"4.1", 1, 1, 0, false}}};
  DenseGrid g = normalize(raw);
  CaptionFacts facts;
  facts.drug = "florfenicol";
  SentenceDoc d = extract_sentences_merged(expand_merged_header(raw, g, {1, 1}), {1, 1}, facts,
                                           ontology());
  const std::vector<std::string> expected = {"C max ng/ml 12 ± 2 _Plasma florfenicol.",
                                             "MRT h 4.1 _Plasma florfenicol."};
  EXPECT_EQ(d.sentences, expected);
}

TEST(MergedSentences, MergedIndexTransposesFirst) {
  RawTable raw;
  raw.declared_cols = 3;
  raw.header_rows = {{{"Drug", 0, 0, 0, true}, {"Florfenicol", 1, 2, 0, true}}};
  raw.body_rows = {{{"Dose", 0, 0, 1, false}, {"10 mg/kg", 1, 1, 0, false}, {"20 mg/kg", 2, 2, 0, false}},
                   {{"CL (L/h)", 1, 1, 0, false}, {"2.5", 2, 2, 0, false}}};
  DenseGrid g = normalize(raw);
  SentenceDoc d = extract_sentences(raw, g, {1, 1}, LayoutCase::kMergedIndex, CaptionFacts{}, ontology());
  EXPECT_FALSE(d.sentences.empty());
  for (const auto& [r, c] : d.coords) {
    EXPECT_LT(r, g.n_rows);
    EXPECT_LT(c, g.n_cols);
  }
}

// Records

TEST(Records, ImidolClearance) {
  auto a = analyze(testutil::kImidol);
  auto recs = a.records(std::set<std::string>{"clearance"});
  ASSERT_EQ(recs.size(), 5u);
  const std::vector<std::string> doses = {"10.02", "30.25", "70.55", "320.3", "10.20"};
  const std::vector<std::string> routes = {"PO", "PO", "PO", "PO", "IV"};
  for (size_t i = 0; i < recs.size(); ++i) {
    ASSERT_TRUE(recs[i].dose);
    EXPECT_EQ(recs[i].dose->value.text, doses[i]);
    EXPECT_EQ(recs[i].dose->unit, "mg/kg");
    EXPECT_EQ(recs[i].route, routes[i]);
    EXPECT_EQ(recs[i].animal, "rat");
    EXPECT_TRUE(iequals(recs[i].drug.value_or(""), "imidol"));
    EXPECT_EQ(recs[i].unit, "L h⁻¹ kg⁻¹");
  }
  EXPECT_EQ(recs[0].value.mean->text, "107.7");
  EXPECT_EQ(recs[0].value.spread->text, "11.8");
  EXPECT_EQ(recs[2].value.mean->text, "101.9");
}

TEST(Records, CarboxylosartanDogs) {
  auto a = analyze(testutil::kCarboxylosartan);
  auto recs = a.records(std::set<std::string>{"clearance"});
  // The renal column is labelled "CL r,Dog" and stays out; the Mean row is an aggregate.
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].animal, "Dog1");
  EXPECT_EQ(recs[0].value.mean->value, 16);
  EXPECT_EQ(recs[1].animal, "Dog2");
  EXPECT_EQ(recs[1].value.mean->value, 21);
  for (const auto& r : recs) {
    EXPECT_EQ(r.parameter_raw.rfind("CL p", 0), 0u);
    EXPECT_EQ(r.unit, "mL/min/kg");
    EXPECT_EQ(r.route, "IV");
    // No dose is printed in the table or its caption.
    EXPECT_FALSE(r.dose);
  }
}

TEST(Records, NoOntologyHitsGivesNothing) {
  DenseGrid g = make_grid({{"Day", "Samples"}, {"1", "8"}, {"2", "4"}}, 1);
  EXPECT_TRUE(extract_records_advanced(g, {1, 1}, CaptionFacts{}, ontology(), std::nullopt).empty());
}

TEST(Records, AggregateRowsExcluded) {
  DenseGrid g = make_grid({{"Animal", "CL (L/h)"}, {"Dog1", "1"}, {"Dog2", "2"}, {"Mean", "1.5"},
                           {"SD", "0.7"}, {"median", "1.5"}, {"CV (%)", "40"}},
                          1);
  auto recs = extract_records_advanced(g, {1, 1}, CaptionFacts{}, ontology(), std::nullopt);
  EXPECT_EQ(recs.size(), 2u);
}

TEST(Records, FilterMonotonicity) {
  const std::vector<std::set<std::string>> chain = {
      {}, {"clearance"}, {"clearance", "auc"}, {"clearance", "auc", "cmax", "tmax"}};
  for (const char* rel : {testutil::kImidol, testutil::kEprinomectin, testutil::kMel,
                          testutil::kCarboxylosartan}) {
    auto a = analyze(rel);
    auto key = [](const PkRecord& r) { return std::make_pair(r.row_index, r.col_index); };
    std::vector<std::set<std::pair<int, int>>> sets;
    for (const auto& s : chain) {
      std::set<std::pair<int, int>> k;
      for (const auto& r : a.records(s)) k.insert(key(r));
      sets.push_back(k);
    }
    std::set<std::pair<int, int>> all;
    for (const auto& r : a.records()) all.insert(key(r));
    sets.push_back(all);
    for (size_t i = 1; i < sets.size(); ++i) {
      EXPECT_TRUE(std::includes(sets[i].begin(), sets[i].end(), sets[i - 1].begin(), sets[i - 1].end()))
          << rel << " step " << i;
    }
  }
}

TEST(Records, SoundnessAndCoordinates) {
  for (const auto& entry : std::filesystem::directory_iterator(oracle::fixture("corpus"))) {
    const std::string rel = "corpus/" + entry.path().filename().string();
    const size_t n = find_tables(oracle::read_fixture(rel), SourceKind::kXml, TagProfile::defaults()).size();
    for (size_t i = 0; i < n; ++i) {
      auto a = analyze(rel, i);
      const auto canon = ontology().canonicals();
      for (const auto& r : a.records()) {
        ASSERT_LT(r.row_index, a.grid.n_rows);
        ASSERT_LT(r.col_index, a.grid.n_cols);
        EXPECT_EQ(r.value.raw, a.grid.at(r.row_index, r.col_index)) << rel;
        EXPECT_NE(std::find(canon.begin(), canon.end(), r.parameter_canonical), canon.end());
      }
      SentenceDoc d = a.sentences();
      EXPECT_EQ(split_joined(d.joined), d.sentences) << rel;
    }
  }
}

TEST(Records, EprinomectinMatrixComesFromOwnColumn) {
  auto a = analyze(testutil::kEprinomectin);
  auto recs = a.records();
  ASSERT_FALSE(recs.empty());
  for (const auto& r : recs) {
    const std::string label = a.grid.at(1, r.col_index);
    ASSERT_TRUE(r.matrix) << r.sentence;
    EXPECT_EQ(*r.matrix, to_lower_ascii(label));
    const std::string dose = a.grid.at(0, r.col_index);
    EXPECT_EQ(r.dose->value.text, dose.substr(0, dose.find(' ')));
  }
}

TEST(Records, DoseRowGivesPerColumnDoses) {
  auto a = analyze("corpus/10.1016_j.jchromb.2021.122862.xml");
  auto recs = a.records(std::set<std::string>{"cmax"});
  ASSERT_EQ(recs.size(), 6u);
  const std::vector<std::string> doses = {"0.3", "1", "3", "1", "1", "2"};
  const std::vector<std::string> routes = {"IV", "IV", "IV", "PO", "IM", "IV"};
  const std::vector<std::string> animals = {"rat", "rat", "rat", "dog", "dog", "dog"};
  for (size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].dose->value.text, doses[i]);
    EXPECT_EQ(recs[i].route, routes[i]);
    EXPECT_EQ(recs[i].animal, animals[i]);
  }
}

TEST(Records, SectionRowsSetDrugAndDose) {
  auto a = analyze(testutil::kCarboxylosartan, 1);
  auto recs = a.records(std::set<std::string>{"cmax", "volume of distribution"});
  ASSERT_FALSE(recs.empty());
  for (const auto& r : recs) {
    const std::string drug = to_lower_ascii(r.drug.value_or(""));
    if (r.parameter_canonical == "cmax") {
      EXPECT_EQ(drug, "carboxylosartan");
    }
    ASSERT_TRUE(r.dose);
    EXPECT_EQ(r.dose->unit, "mg");
  }
  // First block: losartan at 20 mg.
  EXPECT_EQ(to_lower_ascii(*recs[0].drug), "losartan");
  EXPECT_EQ(recs[0].dose->value.text, "20");
}

TEST(Records, StatisticRowsAndColumnsYieldNothing) {
  auto subp = analyze(testutil::kSubp);
  for (const auto& r : subp.records()) {
    EXPECT_EQ(subp.grid.at(r.row_index, 0).find("Kruskal"), std::string::npos);
  }
  auto pip = analyze("corpus/10.1016_j.actatropica.2008.05.013.xml");
  for (const auto& r : pip.records()) {
    EXPECT_EQ(pip.grid.at(0, r.col_index).find("Mann"), std::string::npos);
  }
}

// Documented limitations

TEST(Limitations, NumericCompoundIdsLeaveDrugEmptyWithWarning) {
  auto a = analyze(testutil::kCompounds);
  Diagnostics diag;
  auto recs = a.records(std::nullopt, &diag);
  bool saw8 = false;
  for (const auto& r : recs) {
    if (a.grid.at(r.row_index, 0) == "8") {
      saw8 = true;
      EXPECT_FALSE(r.drug);
    }
  }
  EXPECT_TRUE(saw8);
  EXPECT_TRUE(std::any_of(diag.warnings.begin(), diag.warnings.end(),
                          [](const std::string& w) { return w.find("'8'") != std::string::npos; }));
  // The named compound on the last row resolves.
  EXPECT_EQ(recs.back().drug, "Ivacaftor");
}

TEST(Limitations, AbbreviatedDrugMissingFromLexicon) {
  auto a = analyze(testutil::kSubp);
  Diagnostics diag;
  auto recs = a.records(std::nullopt, &diag);
  size_t subp = 0;
  for (const auto& r : recs) {
    if (a.grid.at(r.row_index, 0) == "SuBP") {
      ++subp;
      EXPECT_FALSE(r.drug);
    } else {
      EXPECT_TRUE(iequals(r.drug.value_or(""), "pamidronate"));
    }
  }
  EXPECT_GT(subp, 0u);
  EXPECT_TRUE(std::any_of(diag.warnings.begin(), diag.warnings.end(),
                          [](const std::string& w) { return w.find("'SuBP'") != std::string::npos; }));
}

TEST(Limitations, FreeTextCellUnderClearanceHeader) {
  auto a = analyze(testutil::kCediranib);
  SentenceDoc d = a.sentences();
  auto it = std::find_if(d.sentences.begin(), d.sentences.end(), [](const std::string& s) {
    return s.find("AUC ss = 1058.7") != std::string::npos;
  });
  ASSERT_NE(it, d.sentences.end());
  EXPECT_NE(it->find("Clearance"), std::string::npos);
  for (const auto& r : a.records()) EXPECT_NE(a.grid.at(r.row_index, 0), "Cediranib");
}

TEST(Limitations, BlankCellsAreNotFilledFromAbove) {
  auto a = analyze(testutil::kNonmem);
  EXPECT_EQ(a.grid.at(2, 4), "NaN");
  EXPECT_EQ(a.grid.at(6, 0), "NaN");
  EXPECT_EQ(a.grid.at(8, 0), "NaN");
}

}  // namespace
}  // namespace pktablex
