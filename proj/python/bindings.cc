#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pktablex/grid.h"
#include "pktablex/layout.h"
#include "pktablex/ontology.h"
#include "pktablex/pipeline.h"
#include "pktablex/retrieval.h"
#include "pktablex/table_ingest.h"

namespace py = pybind11;
using namespace pktablex;

namespace {

SourceKind kind_from(const std::string& s) {
  if (s == "xml") return SourceKind::kXml;
  if (s == "html") return SourceKind::kHtml;
  throw py::value_error("kind must be 'xml' or 'html'");
}

std::optional<double> value_of(const std::optional<Decimal>& d) {
  if (!d) return std::nullopt;
  return d->value;
}

}  // namespace

PYBIND11_MODULE(_pktablex, m) {
  m.doc() = "Pharmacokinetic table extraction from XML/HTML articles";

  py::register_exception<MalformedDocument>(m, "MalformedDocument", PyExc_ValueError);
  py::register_exception<FatalError>(m, "FatalError", PyExc_RuntimeError);
  py::register_exception<DegenerateTable>(m, "DegenerateTable", PyExc_ValueError);

  py::class_<RawCell>(m, "RawCell")
      .def_readonly("text", &RawCell::text)
      .def_readonly("col_start", &RawCell::col_start)
      .def_readonly("col_end", &RawCell::col_end)
      .def_readonly("extra_rows", &RawCell::extra_rows)
      .def_readonly("is_header", &RawCell::is_header);

  py::class_<RawTable>(m, "RawTable")
      .def_readonly("table_id", &RawTable::table_id)
      .def_readonly("caption", &RawTable::caption)
      .def_readonly("declared_cols", &RawTable::declared_cols)
      .def_readonly("header_rows", &RawTable::header_rows)
      .def_readonly("body_rows", &RawTable::body_rows)
      .def_property_readonly("source_kind",
                             [](const RawTable& t) { return std::string(to_string(t.source_kind)); });

  py::class_<DenseGrid>(m, "DenseGrid")
      .def_readonly("cells", &DenseGrid::cells)
      .def_readonly("n_rows", &DenseGrid::n_rows)
      .def_readonly("n_cols", &DenseGrid::n_cols)
      .def_readonly("header_row_count", &DenseGrid::header_row_count)
      .def_readonly("caption", &DenseGrid::caption)
      .def_readonly("table_id", &DenseGrid::table_id);

  py::class_<HeaderBoundary>(m, "HeaderBoundary")
      .def_readonly("header_rows", &HeaderBoundary::header_rows)
      .def_readonly("index_cols", &HeaderBoundary::index_cols);

  py::class_<LayoutClass>(m, "LayoutClass")
      .def_property_readonly("case", [](const LayoutClass& l) { return std::string(to_string(l.layout)); })
      .def_readonly("had_header_spans", &LayoutClass::had_header_spans)
      .def_readonly("had_index_spans", &LayoutClass::had_index_spans);

  py::class_<ParsedValue>(m, "ParsedValue")
      .def_readonly("raw", &ParsedValue::raw)
      .def_property_readonly("mean", [](const ParsedValue& v) { return value_of(v.mean); })
      .def_property_readonly("spread", [](const ParsedValue& v) { return value_of(v.spread); })
      .def_property_readonly("range_low", [](const ParsedValue& v) { return value_of(v.range_low); })
      .def_property_readonly("range_high", [](const ParsedValue& v) { return value_of(v.range_high); })
      .def_property_readonly("qualifier",
                             [](const ParsedValue& v) -> std::optional<std::string> {
                               if (!v.qualifier) return std::nullopt;
                               return std::string(to_string(*v.qualifier));
                             })
      .def_readonly("footnotes_stripped", &ParsedValue::footnotes_stripped)
      .def_readonly("cleaned", &ParsedValue::cleaned);

  py::class_<CaptionFacts>(m, "CaptionFacts")
      .def_readonly("drug", &CaptionFacts::drug)
      .def_property_readonly("doses",
                             [](const CaptionFacts& f) {
                               std::vector<std::pair<double, std::string>> out;
                               for (const auto& d : f.doses) out.emplace_back(d.value.value, d.unit);
                               return out;
                             })
      .def_readonly("route", &CaptionFacts::route)
      .def_readonly("animal", &CaptionFacts::animal)
      .def_readonly("matrices", &CaptionFacts::matrices)
      .def_readonly("n_subjects", &CaptionFacts::n_subjects);

  py::class_<SentenceDoc>(m, "SentenceDoc")
      .def_readonly("table_id", &SentenceDoc::table_id)
      .def_readonly("sentences", &SentenceDoc::sentences)
      .def_readonly("coords", &SentenceDoc::coords)
      .def_readonly("joined", &SentenceDoc::joined);

  py::class_<PkRecord>(m, "PkRecord")
      .def_readonly("table_id", &PkRecord::table_id)
      .def_readonly("parameter_canonical", &PkRecord::parameter_canonical)
      .def_readonly("parameter_raw", &PkRecord::parameter_raw)
      .def_readonly("unit", &PkRecord::unit)
      .def_readonly("value", &PkRecord::value)
      .def_property_readonly("dose",
                             [](const PkRecord& r) -> std::optional<std::pair<double, std::string>> {
                               if (!r.dose) return std::nullopt;
                               return std::make_pair(r.dose->value.value, r.dose->unit);
                             })
      .def_readonly("route", &PkRecord::route)
      .def_readonly("matrix", &PkRecord::matrix)
      .def_readonly("animal", &PkRecord::animal)
      .def_readonly("drug", &PkRecord::drug)
      .def_readonly("row_index", &PkRecord::row_index)
      .def_readonly("col_index", &PkRecord::col_index)
      .def_readonly("sentence", &PkRecord::sentence);

  py::class_<Ontology>(m, "Ontology")
      .def_static("defaults", &Ontology::defaults)
      .def_static("load",
                  [](std::optional<std::filesystem::path> ontology,
                     std::optional<std::filesystem::path> lexicon) {
                    try {
                      return load_ontology(ontology, lexicon);
                    } catch (const std::exception& e) {
                      throw py::value_error(e.what());
                    }
                  },
                  py::arg("ontology") = py::none(), py::arg("lexicon") = py::none())
      .def("canonicals", &Ontology::canonicals)
      .def("match_parameter",
           [](const Ontology& o, const std::string& label)
               -> std::optional<std::pair<std::string, std::optional<std::string>>> {
             auto m = o.match_parameter(label);
             if (!m) return std::nullopt;
             return std::make_pair(m->canonical, m->unit_in_label);
           });

  m.def(
      "find_tables",
      [](const std::string& document, const std::string& kind) {
        return find_tables(document, kind_from(kind), TagProfile::defaults());
      },
      py::arg("document"), py::arg("kind") = "xml");
  m.def("normalize", [](const RawTable& t) { return normalize(t); });
  m.def("validate_grid", &validate_grid);
  m.def("transpose", &transpose);
  m.def("detect_header_boundary", &detect_header_boundary);
  m.def("classify", &classify);
  m.def("parse_value", &parse_value);
  m.def("mine_caption", &mine_caption);
  m.def("serialize_header", &serialize_header);
  m.def(
      "extract_sentences",
      [](const RawTable& raw, const Ontology& o, std::optional<std::string> force_case) {
        const DenseGrid g = normalize(raw);
        const HeaderBoundary b = detect_header_boundary(g, o);
        LayoutClass lc = classify(raw, g, b, o);
        if (force_case) {
          auto c = parse_layout_case(*force_case);
          if (!c) throw py::value_error("unknown layout case");
          lc.layout = *c;
        }
        return extract_sentences(raw, g, b, lc.layout, mine_caption(g.caption, o), o);
      },
      py::arg("table"), py::arg("ontology"), py::arg("force_case") = py::none());
  m.def(
      "extract_records",
      [](const RawTable& raw, const Ontology& o, std::optional<std::set<std::string>> wanted) {
        const DenseGrid g = normalize(raw);
        const HeaderBoundary b = detect_header_boundary(g, o);
        return extract_records_advanced(g, b, mine_caption(g.caption, o), o, wanted);
      },
      py::arg("table"), py::arg("ontology"), py::arg("wanted") = py::none());
  m.def(
      "run",
      [](std::vector<std::filesystem::path> inputs, std::filesystem::path output,
         const std::string& mode, std::optional<std::set<std::string>> params, int jobs) {
        RunConfig c;
        c.input_paths = std::move(inputs);
        c.output_path = std::move(output);
        auto m = parse_output_mode(mode);
        if (!m) throw py::value_error("mode must be sentences, records or both");
        c.mode = *m;
        c.wanted_params = std::move(params);
        c.parallelism = jobs;
        const ExtractionReport r = run(c);
        py::dict d;
        d["docs_seen"] = r.docs_seen;
        d["docs_failed"] = r.docs_failed;
        d["tables_seen"] = r.tables_seen;
        d["tables_skipped"] = r.tables_skipped;
        d["records_emitted"] = r.records_emitted;
        d["sentences_emitted"] = r.sentences_emitted;
        d["exit_code"] = r.exit_code();
        return d;
      },
      py::arg("inputs"), py::arg("output"), py::arg("mode") = "both",
      py::arg("params") = py::none(), py::arg("jobs") = 1);
}
