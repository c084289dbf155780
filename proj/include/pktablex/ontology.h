#ifndef PKTABLEX_ONTOLOGY_H_
#define PKTABLEX_ONTOLOGY_H_

#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pktablex {

// A number as written in the source. `text` keeps the original digits
// ("38.10"), `value` is its numeric reading. Equality compares values.
struct Decimal {
  double value = 0.0;
  std::string text;

  bool operator==(const Decimal& o) const { return value == o.value; }
};

// Parses an unsigned or signed plain decimal ("12", "0.5", "-3.25"); nullopt
// for anything else.
std::optional<Decimal> parse_decimal(std::string_view s);

enum class Qualifier { kLessThan, kGreaterThan, kRange, kNonNumeric };

const char* to_string(Qualifier q);

struct ParsedValue {
  std::string raw;
  std::optional<Decimal> mean;
  std::optional<Decimal> spread;
  std::optional<Qualifier> qualifier;
  std::optional<Decimal> range_low;
  std::optional<Decimal> range_high;
  std::string footnotes_stripped;
  // `raw` with whitespace collapsed and footnote markers removed.
  std::string cleaned;

  bool is_numeric() const { return qualifier != Qualifier::kNonNumeric; }
};

struct OntologyEntry {
  std::string canonical;
  // ECMAScript patterns matched case-insensitively against the compact label
  // (lower-cased, spaces and underscores removed), anchored at its start.
  std::vector<std::string> patterns;
  int priority = 0;
};

struct Dose {
  Decimal value;
  std::string unit;

  bool operator==(const Dose&) const = default;
};

struct CaptionFacts {
  std::optional<std::string> drug;
  std::vector<Dose> doses;
  std::optional<std::string> route;
  std::optional<std::string> animal;
  std::vector<std::string> matrices;
  std::optional<int> n_subjects;
};

struct ParameterMatch {
  std::string canonical;
  std::optional<std::string> unit_in_label;
};

// Splits "C max (ng/ml)" into ("C max", "ng/ml"). Only a parenthesized group
// closing the label counts; inside it, text after the last comma is the unit
// ("Cl p, mL/min/kg" gives "mL/min/kg").
std::pair<std::string, std::optional<std::string>> split_label_unit(std::string_view label);

// Parameter dictionary plus the vocabularies used for caption mining.
// Immutable once built; safe to share across threads.
class Ontology {
 public:
  // Built-in dictionary: clearance, AUC, Tmax, Cmax and half-life with their
  // usual alternates, plus volume of distribution, MRT and the elimination
  // rate constant.
  static Ontology defaults();

  const std::vector<OntologyEntry>& entries() const { return entries_; }
  std::vector<std::string> canonicals() const;
  bool has_canonical(std::string_view canonical) const;

  std::optional<ParameterMatch> match_parameter(std::string_view label) const;
  bool is_units_header(std::string_view text) const;

  // Canonical route for a route token ("i.v." -> "IV"), nullopt otherwise.
  std::optional<std::string> route_for(std::string_view token) const;
  bool is_aggregate_label(std::string_view label) const;

  const std::vector<std::pair<std::string, std::string>>& routes() const { return routes_; }
  const std::vector<std::string>& matrices() const { return matrices_; }
  const std::vector<std::pair<std::string, std::string>>& animals() const { return animals_; }
  const std::vector<std::string>& drug_lexicon() const { return drugs_; }
  const std::vector<std::pair<std::string, std::string>>& dose_units() const { return dose_units_; }
  const std::vector<std::string>& aggregate_tokens() const { return aggregates_; }
  bool caps_drug_fallback() const { return caps_drug_fallback_; }

  bool drug_in_lexicon(std::string_view name) const;

  // Mutation is only used while loading.
  void upsert_entry(OntologyEntry entry);
  void add_route(std::string token, std::string canonical);
  void add_matrix(std::string name);
  void add_animal(std::string token, std::string canonical);
  void add_drug(std::string name);
  void add_dose_unit(std::string surface, std::string canonical);
  void add_aggregate(std::string token);
  void set_units_header_pattern(const std::string& pattern);
  void set_caps_drug_fallback(bool enabled) { caps_drug_fallback_ = enabled; }

  // Compiles patterns; throws std::regex_error on a bad pattern.
  void compile();

  // Regex fragment matching any dose unit, longest alternatives first.
  const std::string& dose_unit_alternation() const { return dose_unit_alt_; }
  std::string canonical_dose_unit(std::string_view surface) const;
  // "<numbers> <unit>" and "(<unit>)"; built by compile().
  const std::regex& dose_regex() const { return dose_re_; }
  const std::regex& bare_dose_unit_regex() const { return bare_unit_re_; }

 private:
  struct CompiledPattern {
    size_t entry;
    std::regex re;
  };

  std::vector<OntologyEntry> entries_;
  std::vector<CompiledPattern> compiled_;
  std::string units_header_source_ = "^units?$";
  std::regex units_header_;
  std::vector<std::pair<std::string, std::string>> routes_;
  std::vector<std::string> matrices_;
  std::vector<std::pair<std::string, std::string>> animals_;
  std::vector<std::string> drugs_;  // lower-cased, longest first
  std::vector<std::pair<std::string, std::string>> dose_units_;
  std::vector<std::string> aggregates_;
  std::string dose_unit_alt_;
  std::regex dose_re_;
  std::regex bare_unit_re_;
  bool caps_drug_fallback_ = true;
};

// Loads the built-in defaults and applies the optional ontology config and
// drug lexicon on top. Throws ConfigError with file/line diagnostics.
Ontology load_ontology(const std::optional<std::filesystem::path>& ontology_path,
                       const std::optional<std::filesystem::path>& lexicon_path);

Ontology parse_ontology_config(std::string_view text, const std::string& source,
                               Ontology base);

// Appends names from a one-per-line lexicon ('#' comments allowed).
void parse_drug_lexicon(std::string_view text, Ontology& ontology);

std::optional<ParameterMatch> match_parameter(std::string_view label,
                                              const Ontology& ontology);

// Total: never throws. Unreadable cells come back with qualifier NonNumeric.
ParsedValue parse_value(std::string_view cell);

CaptionFacts mine_caption(std::string_view caption, const Ontology& ontology);

// Caption mining plus the header-label dose form "Dose (mg/kg) 10.02", where
// the number follows a bare unit.
CaptionFacts mine_label(std::string_view label, const Ontology& ontology);

}  // namespace pktablex

#endif  // PKTABLEX_ONTOLOGY_H_
