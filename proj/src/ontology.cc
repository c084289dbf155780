#include "pktablex/ontology.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>

#include "pktablex/config_text.h"
#include "pktablex/text.h"

namespace pktablex {

namespace {

bool is_ascii_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Lower-cased label with spaces and underscores removed, so that "C max",
// "C_max" and "Cmax" coincide.
std::string compact_key(std::string_view label) {
  std::string out;
  for (char c : to_lower_ascii(label)) {
    if (c != ' ' && c != '_') out.push_back(c);
  }
  return out;
}

size_t code_points(std::string_view s) {
  size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

// What may follow a matched pattern: a short subscript-like qualifier such as
// "p", "z", "0-24hr" or "tibia". Comma-qualified subscripts ("r,Dog") denote a
// sub-measure and do not match.
bool acceptable_tail(std::string_view tail) {
  if (code_points(tail) > 8) return false;
  for (char c : tail) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x80 || is_ascii_alnum(c)) continue;
    if (c == '-' || c == '.' || c == '/' || c == '+') continue;
    return false;
  }
  return true;
}

std::string regex_escape(std::string_view s) {
  static const std::string kSpecial = R"(\^$.|?*+()[]{}/)";
  std::string out;
  for (char c : s) {
    if (kSpecial.find(c) != std::string::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

// Occurrences of `needle` (lower-case) in `hay` (lower-case) with word
// boundaries on both sides. `plural_ok` lets "goats" match "goat".
std::vector<std::pair<size_t, size_t>> find_words(std::string_view hay,
                                                  std::string_view needle,
                                                  bool plural_ok = false) {
  std::vector<std::pair<size_t, size_t>> out;
  if (needle.empty()) return out;
  size_t from = 0;
  while (true) {
    const size_t pos = hay.find(needle, from);
    if (pos == std::string_view::npos) break;
    from = pos + 1;
    const bool left_ok = pos == 0 || !is_ascii_alnum(hay[pos - 1]) ||
                         !is_ascii_alnum(needle.front());
    if (!left_ok) continue;
    size_t end = pos + needle.size();
    auto boundary = [&](size_t e) {
      return e >= hay.size() || !is_ascii_alnum(hay[e]) || !is_ascii_alnum(needle.back());
    };
    if (boundary(end)) {
      out.emplace_back(pos, end - pos);
    } else if (plural_ok && hay.compare(end, 2, "es") == 0 && boundary(end + 2)) {
      out.emplace_back(pos, end + 2 - pos);
    } else if (plural_ok && hay[end] == 's' && boundary(end + 1)) {
      out.emplace_back(pos, end + 1 - pos);
    }
  }
  return out;
}

struct WordSpan {
  size_t pos;
  std::string text;
};

std::vector<WordSpan> word_spans(std::string_view s) {
  std::vector<WordSpan> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    const size_t start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) out.push_back({start, std::string(s.substr(start, i - start))});
  }
  return out;
}

std::string strip_punct(std::string_view w) {
  size_t b = 0;
  size_t e = w.size();
  auto punct = [](char c) { return std::string_view("()[]{},.;:'\"").find(c) != std::string_view::npos; };
  while (b < e && punct(w[b])) ++b;
  while (e > b && punct(w[e - 1])) --e;
  return std::string(w.substr(b, e - b));
}

// "after"/"following" ... "administration" windows in a lower-cased caption.
struct AdminPhrase {
  size_t trigger_pos;  // start of "after"
  size_t admin_pos;    // start of "administ..."
};

std::vector<AdminPhrase> admin_phrases(std::string_view lower) {
  static constexpr std::string_view kAdmin[] = {"administ", "inject", "infus", "dosing", "dosed", "given"};
  static constexpr std::string_view kTriggers[] = {"after", "following", "via", "by"};
  std::vector<AdminPhrase> out;
  for (auto admin : kAdmin) {
    size_t from = 0;
    while (true) {
      const size_t a = lower.find(admin, from);
      if (a == std::string_view::npos) break;
      from = a + 1;
      if (a > 0 && is_ascii_alnum(lower[a - 1])) continue;
      size_t best = std::string_view::npos;
      for (auto trig : kTriggers) {
        for (auto [p, len] : find_words(lower.substr(0, a), trig)) {
          if (a - p <= 80 && (best == std::string_view::npos || p > best)) best = p;
        }
      }
      if (best != std::string_view::npos) out.push_back({best, a});
    }
  }
  std::sort(out.begin(), out.end(), [](const AdminPhrase& x, const AdminPhrase& y) {
    return x.admin_pos < y.admin_pos;
  });
  return out;
}

struct RouteHit {
  size_t pos;
  size_t len;
  std::string canonical;
};

std::vector<RouteHit> route_hits(std::string_view lower, const Ontology& ont) {
  std::vector<RouteHit> hits;
  for (const auto& [token, canon] : ont.routes()) {
    for (auto [p, len] : find_words(lower, token)) hits.push_back({p, len, canon});
  }
  std::sort(hits.begin(), hits.end(), [](const RouteHit& a, const RouteHit& b) {
    return a.pos != b.pos ? a.pos < b.pos : a.len > b.len;
  });
  return hits;
}

std::optional<std::string> pick_route(std::string_view lower, const Ontology& ont) {
  const auto hits = route_hits(lower, ont);
  if (hits.empty()) return std::nullopt;
  const auto phrases = admin_phrases(lower);
  // Route named inside an "after ... administration" phrase.
  for (const auto& ph : phrases) {
    for (const auto& h : hits) {
      if (h.pos > ph.trigger_pos && h.pos < ph.admin_pos) return h.canonical;
    }
  }
  // Route word directly before an administration word.
  for (const auto& h : hits) {
    for (const auto& ph : phrases) {
      if (ph.admin_pos >= h.pos + h.len) {
        const auto gap = lower.substr(h.pos + h.len, ph.admin_pos - h.pos - h.len);
        if (std::count(gap.begin(), gap.end(), ' ') <= 2) return h.canonical;
      }
    }
  }
  return hits.front().canonical;
}

std::optional<std::string> caps_drug(std::string_view caption, std::string_view lower,
                                     const Ontology& ont) {
  const auto words = word_spans(caption);
  for (const auto& ph : admin_phrases(lower)) {
    // Token immediately before the trigger, then tokens inside the phrase.
    std::vector<const WordSpan*> candidates;
    for (size_t k = 0; k < words.size(); ++k) {
      if (words[k].pos == ph.trigger_pos && k > 0) candidates.push_back(&words[k - 1]);
    }
    for (const auto& w : words) {
      if (w.pos > ph.trigger_pos && w.pos < ph.admin_pos) candidates.push_back(&w);
    }
    for (const WordSpan* w : candidates) {
      const std::string tok = strip_punct(w->text);
      int upper = 0;
      bool lower_seen = false;
      for (char c : tok) {
        if (std::isupper(static_cast<unsigned char>(c))) ++upper;
        if (std::islower(static_cast<unsigned char>(c))) lower_seen = true;
      }
      if (upper >= 3 && !lower_seen && !ont.route_for(tok)) return tok;
    }
  }
  // Development codes ("KR-60436", "ABT888") anywhere in the caption.
  static const std::regex code_re(R"(^[A-Z]{2,}[A-Z0-9]*-?[0-9]{2,}[A-Za-z0-9]*$)");
  for (const auto& w : words) {
    const std::string tok = strip_punct(w.text);
    if (std::regex_match(tok, code_re) && !ont.match_parameter(tok)) return tok;
  }
  return std::nullopt;
}

std::optional<std::string> lexicon_drug(std::string_view caption, std::string_view lower,
                                        const Ontology& ont) {
  size_t best_pos = std::string_view::npos;
  size_t best_len = 0;
  for (const auto& name : ont.drug_lexicon()) {
    const auto hits = find_words(lower, name);
    if (hits.empty()) continue;
    const auto [p, len] = hits.front();
    // Earliest mention wins; a longer name breaks ties at one position.
    if (best_len == 0 || p < best_pos || (p == best_pos && len > best_len)) {
      best_pos = p;
      best_len = len;
    }
  }
  if (best_len == 0) return std::nullopt;
  return std::string(caption.substr(best_pos, best_len));
}

const std::regex& subjects_regex() {
  static const std::regex re(R"(\(\s*n\s*=\s*(\d+)\s*\))", std::regex::icase);
  return re;
}

std::vector<Dose> mine_doses(const std::string& text, const Ontology& ont) {
  std::vector<Dose> out;
  if (ont.dose_unit_alternation().empty()) return out;
  const std::regex& re = ont.dose_regex();
  static const std::regex number(R"(\d+(?:\.\d+)?)");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
       it != std::sregex_iterator(); ++it) {
    const std::string unit = ont.canonical_dose_unit((*it)[3].str());
    std::vector<std::string> numbers;
    const std::string list = (*it)[1].str();
    for (auto n = std::sregex_iterator(list.begin(), list.end(), number);
         n != std::sregex_iterator(); ++n) {
      numbers.push_back(n->str());
    }
    numbers.push_back((*it)[2].str());
    for (const auto& n : numbers) {
      if (auto d = parse_decimal(n); d && d->value > 0) out.push_back({*d, unit});
    }
  }
  return out;
}

// Numeric scanner used by parse_value.
struct Scanner {
  std::string_view s;
  size_t pos = 0;

  bool done() const { return pos >= s.size(); }
  void skip_spaces() {
    while (pos < s.size() && s[pos] == ' ') ++pos;
  }
  bool eat(std::string_view lit) {
    if (s.compare(pos, lit.size(), lit) == 0) {
      pos += lit.size();
      return true;
    }
    return false;
  }
  bool at_plus_minus() const {
    for (std::string_view lit : {"\xC2\xB1", "+/-", "+-"}) {
      if (s.compare(pos, lit.size(), lit) == 0) return true;
    }
    return false;
  }
  std::optional<Decimal> number(bool allow_sign) {
    const size_t start = pos;
    std::string text;
    if (allow_sign) {
      if (eat("-") || eat("\xE2\x88\x92")) {
        text.push_back('-');
      } else if (eat("+")) {
        // leading plus is dropped
      }
    }
    const size_t digits_start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == digits_start) {
      pos = start;
      return std::nullopt;
    }
    if (pos + 1 < s.size() && s[pos] == '.' &&
        std::isdigit(static_cast<unsigned char>(s[pos + 1]))) {
      ++pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    text.append(s.substr(digits_start, pos - digits_start));
    auto d = parse_decimal(text);
    if (!d) pos = start;
    return d;
  }
};

constexpr std::string_view kSymbolMarkers[] = {"*", "\xE2\x80\xA0", "\xE2\x80\xA1",
                                               "\xC2\xA7", "\xC2\xB6", "#"};

// Removes one trailing footnote marker; returns false when none is present.
bool strip_trailing_marker(std::string& s, std::string& stripped) {
  for (auto m : kSymbolMarkers) {
    if (s.size() > m.size() && s.compare(s.size() - m.size(), m.size(), m) == 0) {
      stripped.insert(0, m);
      s.erase(s.size() - m.size());
      s = trim(s);
      return true;
    }
  }
  if (s.size() >= 2 && std::isalpha(static_cast<unsigned char>(s.back()))) {
    const char prev = s[s.size() - 2];
    if (prev == ' ' || prev == ',' || std::isdigit(static_cast<unsigned char>(prev))) {
      stripped.insert(0, 1, s.back());
      s.pop_back();
      while (!s.empty() && (s.back() == ' ' || s.back() == ',')) s.pop_back();
      return true;
    }
  }
  return false;
}

ParsedValue non_numeric(ParsedValue pv) {
  pv.mean.reset();
  pv.spread.reset();
  pv.range_low.reset();
  pv.range_high.reset();
  pv.qualifier = Qualifier::kNonNumeric;
  return pv;
}

}  // namespace

const char* to_string(Qualifier q) {
  switch (q) {
    case Qualifier::kLessThan: return "less-than";
    case Qualifier::kGreaterThan: return "greater-than";
    case Qualifier::kRange: return "range";
    case Qualifier::kNonNumeric: return "non-numeric";
  }
  return "";
}

std::optional<Decimal> parse_decimal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  size_t i = 0;
  if (s[0] == '-') i = 1;
  size_t digits = 0;
  bool dot = false;
  for (size_t k = i; k < s.size(); ++k) {
    if (std::isdigit(static_cast<unsigned char>(s[k]))) {
      ++digits;
    } else if (s[k] == '.' && !dot && k > i && k + 1 < s.size()) {
      dot = true;
    } else {
      return std::nullopt;
    }
  }
  // Beyond 15 significant digits a double no longer reproduces the text.
  if (digits == 0 || digits > 15) return std::nullopt;
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return Decimal{v, std::string(s)};
}

std::pair<std::string, std::optional<std::string>> split_label_unit(std::string_view label) {
  std::string t = trim(label);
  // Footnote markers trailing the unit group: "Cop (µg/ml)¹", "CL (l/h)*".
  static constexpr std::string_view kMarkers[] = {"¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹",
                                                 "⁰", "*", "†", "‡", "§"};
  for (bool again = true; again;) {
    again = false;
    for (std::string_view m : kMarkers) {
      if (t.size() > m.size() && t.ends_with(m) && t.find(')') != std::string::npos) {
        t = trim(std::string_view(t).substr(0, t.size() - m.size()));
        again = true;
      }
    }
  }
  if (t.empty() || t.back() != ')') return {t, std::nullopt};
  int depth = 0;
  size_t open = std::string::npos;
  for (size_t i = t.size(); i-- > 0;) {
    if (t[i] == ')') ++depth;
    if (t[i] == '(' && --depth == 0) {
      open = i;
      break;
    }
  }
  if (open == std::string::npos || open == 0) return {t, std::nullopt};
  std::string name = trim(std::string_view(t).substr(0, open));
  std::string inner = trim(std::string_view(t).substr(open + 1, t.size() - open - 2));
  if (name.empty()) return {t, std::nullopt};
  if (const size_t comma = inner.rfind(','); comma != std::string::npos) {
    inner = trim(std::string_view(inner).substr(comma + 1));
  }
  if (inner.empty()) return {name, std::nullopt};
  return {name, inner};
}

// ---------------------------------------------------------------------------
// Ontology

Ontology Ontology::defaults() {
  Ontology o;
  o.upsert_entry({"clearance",
                  {"clearance", "cleared", "cl", "cl/f", "cl-f",
                   "(total|apparent|plasma|renal|systemic|body)clearance"},
                  0});
  o.upsert_entry({"auc",
                  {"auc", "areaunder(the)?(plasma)?(concentration)?(-?time)?curve"},
                  0});
  o.upsert_entry({"tmax",
                  {"t-?max", "time.*c-?max",
                   "time(of|to)(reach)?(peak|maximum|maximal)(plasma|drug)?concentration",
                   "timetopeak(drug|plasma)?concentration"},
                  0});
  o.upsert_entry({"cmax",
                  {"c-?max", "css-?max", "(maximum|maximal|peak)(observed)?(plasma|drug)?concentration"},
                  0});
  o.upsert_entry({"half-life",
                  {"half-?life", "t1/2", "t\xC2\xBD",
                   "(terminal|elimination|distribution|plasma|apparent)half-?life", "(k10|beta)hl"},
                  0});
  o.upsert_entry({"volume of distribution",
                  {"vd", "vd,?ss", "vss", "vz", "vdis", "v(d|ss|z)?/f", "volumeofdistribution"},
                  0});
  o.upsert_entry({"mrt", {"mrt", "meanresiden(ce|t)time"}, 0});
  o.upsert_entry({"elimination rate constant",
                  {"ke", "kel", "k10", "eliminationrateconstant", "eliminationrate"},
                  0});

  const std::pair<const char*, const char*> routes[] = {
      {"iv", "IV"},           {"i.v.", "IV"},         {"intravenous", "IV"},
      {"intravenously", "IV"}, {"im", "IM"},          {"i.m.", "IM"},
      {"intramuscular", "IM"}, {"intramuscularly", "IM"}, {"po", "PO"},
      {"p.o.", "PO"},         {"oral", "PO"},         {"orally", "PO"},
      {"per os", "PO"},       {"sc", "SC"},           {"s.c.", "SC"},
      {"subcutaneous", "SC"}, {"subcutaneously", "SC"}, {"ip", "IP"},
      {"i.p.", "IP"},         {"intraperitoneal", "IP"}, {"ig", "IG"},
      {"intragastric", "IG"}, {"id", "ID"},           {"intraduodenal", "ID"},
      {"intraportal", "intraportal"}, {"topical", "topical"},
      {"topically", "topical"}, {"pour-on", "topical"}, {"transdermal", "transdermal"},
      {"intranasal", "intranasal"}, {"intramammary", "intramammary"},
      {"rectal", "rectal"},   {"inhalation", "inhalation"}};
  for (const auto& [t, c] : routes) o.add_route(t, c);

  for (const char* m : {"plasma", "milk", "serum", "blood", "urine", "tissue", "saliva",
                        "bile", "feces", "faeces", "liver", "kidney", "muscle", "fat",
                        "skin", "lung", "brain", "csf"}) {
    o.add_matrix(m);
  }

  const std::pair<const char*, const char*> animals[] = {
      {"rat", "rat"},         {"dog", "dog"},         {"goat", "goat"},
      {"cattle", "cattle"},   {"cow", "cattle"},      {"calf", "cattle"},
      {"calves", "cattle"},   {"steer", "cattle"},    {"heifer", "cattle"},
      {"sheep", "sheep"},     {"ewe", "sheep"},       {"lamb", "sheep"},
      {"swine", "swine"},     {"pig", "swine"},       {"piglet", "swine"},
      {"chicken", "chicken"}, {"broiler", "chicken"}, {"hen", "chicken"},
      {"turkey", "turkey"},   {"duck", "duck"},       {"horse", "horse"},
      {"pony", "horse"},      {"cat", "cat"},         {"rabbit", "rabbit"},
      {"mouse", "mouse"},     {"mice", "mouse"},      {"monkey", "monkey"},
      {"human", "human"},     {"volunteer", "human"}, {"patient", "human"},
      {"subject", "human"},   {"camel", "camel"},     {"buffalo", "buffalo"},
      {"deer", "deer"},       {"fish", "fish"},       {"trout", "fish"},
      {"salmon", "fish"},     {"alpaca", "alpaca"},   {"llama", "llama"}};
  for (const auto& [t, c] : animals) o.add_animal(t, c);

  for (const char* d :
       {"meloxicam", "eprinomectin", "imidol", "carboxylosartan", "losartan",
        "oxytetracycline", "piperaquine", "dihydroartemisinin", "niclosamide",
        "pamidronate", "cisplatin", "gemcitabine", "cediranib", "ivacaftor",
        "rifloxacin", "ivermectin", "moxidectin", "doramectin", "doxycycline",
        "tetracycline", "enrofloxacin", "ciprofloxacin", "marbofloxacin",
        "danofloxacin", "difloxacin", "ceftiofur", "cefquinome", "cephalexin",
        "florfenicol", "tulathromycin", "tilmicosin", "tylosin", "amoxicillin",
        "ampicillin", "penicillin", "gentamicin", "lincomycin", "spectinomycin",
        "flunixin", "ketoprofen", "carprofen", "firocoxib", "phenylbutazone",
        "dexamethasone", "prednisolone", "albendazole", "fenbendazole",
        "oxfendazole", "levamisole", "praziquantel", "closantel",
        "sulfadimethoxine", "trimethoprim", "monensin", "lasalocid",
        "salinomycin", "trenbolone", "zeranol", "ractopamine", "rifampicin"}) {
    o.add_drug(d);
  }

  const std::pair<const char*, const char*> dose_units[] = {
      {"mg/kg", "mg/kg"},
      {"mg/kg bw", "mg/kg"},
      {"mg/kg body weight", "mg/kg"},
      {"mg kg\xE2\x81\xBB\xC2\xB9", "mg/kg"},  // mg kg⁻¹
      {"mg kg-1", "mg/kg"},
      {"mg kg\xE2\x88\x92" "1", "mg/kg"},  // mg kg−1
      {"mg\xC2\xB7kg\xE2\x81\xBB\xC2\xB9", "mg/kg"},
      {"\xC2\xB5g/kg", "\xC2\xB5g/kg"},  // µg/kg (micro sign)
      {"\xCE\xBCg/kg", "\xC2\xB5g/kg"},  // μg/kg (Greek mu)
      {"ug/kg", "\xC2\xB5g/kg"},
      {"mcg/kg", "\xC2\xB5g/kg"},
      {"g/kg", "g/kg"},
      {"mg/m2", "mg/m2"},
      {"mg/m\xC2\xB2", "mg/m2"},
      {"mg/d", "mg/d"},
      {"mg/day", "mg/d"},
      {"mg", "mg"}};
  for (const auto& [s, c] : dose_units) o.add_dose_unit(s, c);

  for (const char* a : {"mean", "median", "sd", "se", "sem", "cv", "range"}) {
    o.add_aggregate(a);
  }
  o.compile();
  return o;
}

std::vector<std::string> Ontology::canonicals() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.canonical);
  return out;
}

bool Ontology::has_canonical(std::string_view canonical) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const OntologyEntry& e) { return iequals(e.canonical, canonical); });
}

void Ontology::upsert_entry(OntologyEntry entry) {
  entry.canonical = to_lower_ascii(trim(entry.canonical));
  for (auto& e : entries_) {
    if (e.canonical == entry.canonical) {
      e = std::move(entry);
      return;
    }
  }
  entries_.push_back(std::move(entry));
}

void Ontology::add_route(std::string token, std::string canonical) {
  token = to_lower_ascii(trim(token));
  for (auto& r : routes_) {
    if (r.first == token) {
      r.second = std::move(canonical);
      return;
    }
  }
  routes_.emplace_back(std::move(token), std::move(canonical));
}

void Ontology::add_matrix(std::string name) {
  name = to_lower_ascii(trim(name));
  if (std::find(matrices_.begin(), matrices_.end(), name) == matrices_.end()) {
    matrices_.push_back(std::move(name));
  }
}

void Ontology::add_animal(std::string token, std::string canonical) {
  token = to_lower_ascii(trim(token));
  for (auto& a : animals_) {
    if (a.first == token) {
      a.second = std::move(canonical);
      return;
    }
  }
  animals_.emplace_back(std::move(token), std::move(canonical));
}

void Ontology::add_drug(std::string name) {
  name = to_lower_ascii(trim(name));
  if (name.empty()) return;
  if (std::find(drugs_.begin(), drugs_.end(), name) == drugs_.end()) {
    drugs_.push_back(std::move(name));
  }
}

void Ontology::add_dose_unit(std::string surface, std::string canonical) {
  surface = to_lower_ascii(trim(surface));
  for (auto& d : dose_units_) {
    if (d.first == surface) {
      d.second = std::move(canonical);
      return;
    }
  }
  dose_units_.emplace_back(std::move(surface), std::move(canonical));
}

void Ontology::add_aggregate(std::string token) {
  token = to_lower_ascii(trim(token));
  if (std::find(aggregates_.begin(), aggregates_.end(), token) == aggregates_.end()) {
    aggregates_.push_back(std::move(token));
  }
}

void Ontology::set_units_header_pattern(const std::string& pattern) {
  units_header_source_ = pattern;
}

void Ontology::compile() {
  compiled_.clear();
  for (size_t i = 0; i < entries_.size(); ++i) {
    for (const auto& p : entries_[i].patterns) {
      compiled_.push_back({i, std::regex(p, std::regex::icase | std::regex::ECMAScript)});
    }
    // A canonical name always matches itself.
    compiled_.push_back({i, std::regex(regex_escape(compact_key(entries_[i].canonical)),
                                       std::regex::icase)});
  }
  units_header_ = std::regex(units_header_source_, std::regex::icase);
  std::sort(drugs_.begin(), drugs_.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  auto units = dose_units_;
  std::stable_sort(units.begin(), units.end(), [](const auto& a, const auto& b) {
    return a.first.size() > b.first.size();
  });
  std::vector<std::string> alts;
  for (const auto& [s, c] : units) {
    // Spaces inside a unit ("mg kg-1") match any run of spaces.
    std::string esc;
    for (const auto& piece : split(s, ' ')) {
      if (!esc.empty()) esc += R"(\s+)";
      esc += regex_escape(piece);
    }
    alts.push_back(esc);
  }
  dose_unit_alt_ = join(alts, "|");
  if (!dose_unit_alt_.empty()) {
    dose_re_ = std::regex(
        R"((?:^|[^0-9.])((?:\d+(?:\.\d+)?\s*(?:,|and|or|&)\s*)*)(\d+(?:\.\d+)?)\s*()" +
            dose_unit_alt_ + R"()(?![A-Za-z0-9/]))",
        std::regex::icase);
    bare_unit_re_ = std::regex(R"(\(\s*()" + dose_unit_alt_ + R"()\s*\))", std::regex::icase);
  }
}

std::string Ontology::canonical_dose_unit(std::string_view surface) const {
  std::string key = to_lower_ascii(collapse_whitespace(surface));
  for (const auto& [s, c] : dose_units_) {
    if (s == key) return c;
  }
  return std::string(surface);
}

std::optional<ParameterMatch> Ontology::match_parameter(std::string_view label) const {
  auto [name, unit] = split_label_unit(collapse_whitespace(label));
  const std::string key = compact_key(name);
  if (key.empty()) return std::nullopt;
  long best_len = 0;
  int best_priority = 0;
  size_t best_entry = 0;
  for (const auto& cp : compiled_) {
    std::smatch m;
    if (!std::regex_search(key, m, cp.re, std::regex_constants::match_continuous)) continue;
    const long len = m.length(0);
    if (len == 0 || !acceptable_tail(std::string_view(key).substr(len))) continue;
    const int prio = entries_[cp.entry].priority;
    if (len > best_len || (len == best_len && prio > best_priority)) {
      best_len = len;
      best_priority = prio;
      best_entry = cp.entry;
    }
  }
  if (best_len == 0) return std::nullopt;
  return ParameterMatch{entries_[best_entry].canonical, unit};
}

bool Ontology::is_units_header(std::string_view text) const {
  return std::regex_search(trim(text), units_header_);
}

std::optional<std::string> Ontology::route_for(std::string_view token) const {
  const std::string t = to_lower_ascii(trim(token));
  for (const auto& [tok, canon] : routes_) {
    if (tok == t) return canon;
  }
  return std::nullopt;
}

bool Ontology::is_aggregate_label(std::string_view label) const {
  const std::string t = to_lower_ascii(strip_punct(trim(label)));
  for (const auto& a : aggregates_) {
    if (t == a) return true;
    // "Mean ± SD", "Median (range)" and similar.
    if (t.size() > a.size() && t.compare(0, a.size(), a) == 0 &&
        !is_ascii_alnum(t[a.size()])) {
      return true;
    }
  }
  return false;
}

bool Ontology::drug_in_lexicon(std::string_view name) const {
  const std::string t = to_lower_ascii(trim(name));
  return std::find(drugs_.begin(), drugs_.end(), t) != drugs_.end();
}

// ---------------------------------------------------------------------------
// Loading

Ontology parse_ontology_config(std::string_view text, const std::string& source,
                               Ontology base) {
  std::optional<OntologyEntry> pending;
  int pending_line = 0;
  auto flush = [&] {
    if (!pending) return;
    if (pending->patterns.empty()) {
      throw ConfigError(source, pending_line,
                        "parameter '" + pending->canonical + "' has no patterns");
    }
    base.upsert_entry(std::move(*pending));
    pending.reset();
  };
  auto check_regex = [&](const std::string& p, int line) {
    try {
      std::regex re(p, std::regex::icase);
    } catch (const std::regex_error& e) {
      throw ConfigError(source, line, "invalid pattern '" + p + "': " + e.what());
    }
  };

  std::string current;
  for (const auto& e : parse_config_text(text, source)) {
    if (e.section != current) {
      flush();
      current = e.section;
      if (starts_with_icase(current, "parameter ")) {
        const std::string canonical = trim(current.substr(10));
        if (canonical.empty()) throw ConfigError(source, e.line, "parameter without a name");
        pending = OntologyEntry{canonical, {}, 0};
        pending_line = e.line;
      }
    }
    const std::string section = to_lower_ascii(current);
    if (pending) {
      if (e.key == "pattern") {
        check_regex(e.value, e.line);
        pending->patterns.push_back(e.value);
      } else if (e.key == "priority") {
        int v = 0;
        auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
        if (ec != std::errc() || p != e.value.data() + e.value.size()) {
          throw ConfigError(source, e.line, "priority must be an integer");
        }
        pending->priority = v;
      } else {
        throw ConfigError(source, e.line, "expected 'pattern = ...' or 'priority = ...'");
      }
    } else if (section == "units_header") {
      if (e.key != "pattern") throw ConfigError(source, e.line, "expected 'pattern = ...'");
      check_regex(e.value, e.line);
      base.set_units_header_pattern(e.value);
    } else if (section == "routes") {
      if (e.key.empty()) throw ConfigError(source, e.line, "expected 'token = canonical route'");
      base.add_route(e.key, e.value);
    } else if (section == "matrices") {
      base.add_matrix(e.key.empty() ? e.value : e.key);
    } else if (section == "animals") {
      if (e.key.empty()) {
        base.add_animal(e.value, to_lower_ascii(e.value));
      } else {
        base.add_animal(e.key, e.value);
      }
    } else if (section == "drugs") {
      base.add_drug(e.key.empty() ? e.value : e.key);
    } else if (section == "dose_units") {
      if (e.key.empty()) {
        base.add_dose_unit(e.value, e.value);
      } else {
        base.add_dose_unit(e.key, e.value);
      }
    } else if (section == "aggregates") {
      base.add_aggregate(e.key.empty() ? e.value : e.key);
    } else if (section == "options") {
      if (e.key == "caps_drug_fallback") {
        const std::string v = to_lower_ascii(e.value);
        if (v != "true" && v != "false") {
          throw ConfigError(source, e.line, "caps_drug_fallback must be true or false");
        }
        base.set_caps_drug_fallback(v == "true");
      } else {
        throw ConfigError(source, e.line, "unknown option '" + e.key + "'");
      }
    } else if (current.empty()) {
      throw ConfigError(source, e.line, "entry outside of any section");
    } else {
      throw ConfigError(source, e.line, "unknown section '" + current + "'");
    }
  }
  flush();
  try {
    base.compile();
  } catch (const std::regex_error& e) {
    throw ConfigError(source, 0, std::string("invalid pattern: ") + e.what());
  }
  return base;
}

void parse_drug_lexicon(std::string_view text, Ontology& ontology) {
  for (const auto& line : split(sanitize_utf8(text), '\n')) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    ontology.add_drug(t);
  }
  ontology.compile();
}

Ontology load_ontology(const std::optional<std::filesystem::path>& ontology_path,
                       const std::optional<std::filesystem::path>& lexicon_path) {
  Ontology o = Ontology::defaults();
  if (ontology_path) {
    o = parse_ontology_config(read_file(*ontology_path), ontology_path->string(), std::move(o));
  }
  if (lexicon_path) parse_drug_lexicon(read_file(*lexicon_path), o);
  return o;
}

// ---------------------------------------------------------------------------
// Operations

std::optional<ParameterMatch> match_parameter(std::string_view label,
                                              const Ontology& ontology) {
  return ontology.match_parameter(label);
}

ParsedValue parse_value(std::string_view cell) {
  ParsedValue pv;
  pv.raw = std::string(cell);
  std::string s = collapse_whitespace(sanitize_utf8(cell));
  if (s.empty() || s == "NaN") {
    pv.cleaned = s;
    return non_numeric(std::move(pv));
  }
  while (strip_trailing_marker(s, pv.footnotes_stripped)) {
  }
  pv.cleaned = s;

  Scanner sc{s};
  std::optional<Qualifier> bound;
  if (sc.eat("<") || sc.eat("\xE2\x89\xA4")) {
    bound = Qualifier::kLessThan;
  } else if (sc.eat(">") || sc.eat("\xE2\x89\xA5")) {
    bound = Qualifier::kGreaterThan;
  }
  sc.skip_spaces();
  auto first = sc.number(true);
  if (!first) return non_numeric(std::move(pv));
  if (bound) {
    sc.skip_spaces();
    if (!sc.done()) return non_numeric(std::move(pv));
    pv.mean = first;
    pv.qualifier = bound;
    return pv;
  }

  sc.skip_spaces();
  // A marker between the mean and the spread ("93.4 a ± 8.0").
  {
    const size_t save = sc.pos;
    std::string marker;
    for (auto m : kSymbolMarkers) {
      if (sc.eat(m)) {
        marker = std::string(m);
        break;
      }
    }
    if (marker.empty() && sc.pos + 1 < s.size() &&
        std::isalpha(static_cast<unsigned char>(s[sc.pos])) && s[sc.pos + 1] == ' ') {
      marker = std::string(1, s[sc.pos]);
      sc.pos += 1;
    }
    sc.skip_spaces();
    if (!marker.empty() && sc.at_plus_minus()) {
      pv.footnotes_stripped = marker + pv.footnotes_stripped;
      pv.cleaned = trim(std::string_view(s).substr(0, save)) + " " + s.substr(sc.pos);
    } else {
      sc.pos = save;
    }
  }

  if (sc.done() || sc.eat("%")) {
    sc.skip_spaces();
    if (!sc.done()) return non_numeric(std::move(pv));
    pv.mean = first;
    return pv;
  }
  if (sc.eat("\xC2\xB1") || sc.eat("+/-") || sc.eat("+-")) {
    sc.skip_spaces();
    auto spread = sc.number(false);
    if (!spread) return non_numeric(std::move(pv));
    sc.skip_spaces();
    sc.eat("%");
    sc.skip_spaces();
    if (!sc.done()) return non_numeric(std::move(pv));
    pv.mean = first;
    pv.spread = spread;
    return pv;
  }
  if (sc.eat("-") || sc.eat("\xE2\x80\x93") || sc.eat("\xE2\x80\x94") || sc.eat("~") ||
      sc.eat("to ")) {
    sc.skip_spaces();
    auto high = sc.number(false);
    if (!high) return non_numeric(std::move(pv));
    sc.skip_spaces();
    if (!sc.done() || high->value < first->value) return non_numeric(std::move(pv));
    pv.range_low = first;
    pv.range_high = high;
    pv.qualifier = Qualifier::kRange;
    return pv;
  }
  if (sc.eat("(")) {
    // "2.26 (0.11)": the bracketed term's meaning varies by table (SE, CV,
    // n), so only the leading estimate is kept.
    sc.skip_spaces();
    if (!sc.number(false)) return non_numeric(std::move(pv));
    sc.eat("%");
    sc.skip_spaces();
    if (!sc.eat(")")) return non_numeric(std::move(pv));
    sc.skip_spaces();
    if (!sc.done()) return non_numeric(std::move(pv));
    pv.mean = first;
    return pv;
  }
  return non_numeric(std::move(pv));
}

CaptionFacts mine_caption(std::string_view caption_in, const Ontology& ontology) {
  CaptionFacts f;
  const std::string caption = collapse_whitespace(caption_in);
  if (caption.empty()) return f;
  const std::string lower = to_lower_ascii(caption);

  f.drug = lexicon_drug(caption, lower, ontology);
  if (!f.drug && ontology.caps_drug_fallback()) f.drug = caps_drug(caption, lower, ontology);

  f.doses = mine_doses(caption, ontology);
  f.route = pick_route(lower, ontology);

  size_t animal_pos = std::string::npos;
  for (const auto& [token, canon] : ontology.animals()) {
    const auto hits = find_words(lower, token, true);
    if (!hits.empty() && hits.front().first < animal_pos) {
      animal_pos = hits.front().first;
      f.animal = canon;
    }
  }

  std::vector<std::pair<size_t, std::string>> matrix_hits;
  for (const auto& m : ontology.matrices()) {
    const auto hits = find_words(lower, m);
    if (!hits.empty()) matrix_hits.emplace_back(hits.front().first, m);
  }
  std::sort(matrix_hits.begin(), matrix_hits.end());
  for (auto& [pos, m] : matrix_hits) f.matrices.push_back(std::move(m));

  std::smatch m;
  if (std::regex_search(caption, m, subjects_regex())) {
    int n = 0;
    const std::string digits = m[1].str();
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec == std::errc()) f.n_subjects = n;
  }
  return f;
}

CaptionFacts mine_label(std::string_view label_in, const Ontology& ontology) {
  CaptionFacts f = mine_caption(label_in, ontology);
  if (!f.doses.empty() || ontology.dose_unit_alternation().empty()) return f;
  const std::string label = collapse_whitespace(label_in);
  if (find_words(to_lower_ascii(label), "dose").empty()) return f;
  const std::regex& bare_unit = ontology.bare_dose_unit_regex();
  std::smatch um;
  if (!std::regex_search(label, um, bare_unit)) return f;
  const std::string unit = ontology.canonical_dose_unit(um[1].str());
  // The dose number sits outside any parentheses.
  std::string outside;
  int depth = 0;
  for (char c : label) {
    if (c == '(') ++depth;
    if (depth == 0) outside.push_back(c);
    if (c == ')' && depth > 0) {
      --depth;
      outside.push_back(' ');
    }
  }
  static const std::regex number(R"((?:^|[^0-9.])(\d+(?:\.\d+)?)(?![0-9.]))");
  std::smatch nm;
  if (std::regex_search(outside, nm, number)) {
    if (auto d = parse_decimal(nm[1].str()); d && d->value > 0) {
      f.doses.push_back({*d, unit});
    }
  }
  return f;
}

}  // namespace pktablex
