#include "pktablex/markup.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <utility>

#include "pktablex/text.h"

namespace pktablex {

namespace {

struct NamedEntity {
  std::string_view name;
  char32_t cp;
};

constexpr std::array<NamedEntity, 52> kEntities = {{
    {"amp", U'&'},       {"lt", U'<'},          {"gt", U'>'},
    {"quot", U'"'},      {"apos", U'\''},       {"nbsp", 0x00A0},
    {"plusmn", 0x00B1},  {"pm", 0x00B1},        {"times", 0x00D7},
    {"minus", 0x2212},   {"ndash", 0x2013},     {"mdash", 0x2014},
    {"micro", 0x00B5},   {"mu", 0x03BC},        {"deg", 0x00B0},
    {"middot", 0x00B7},  {"sdot", 0x22C5},      {"sup1", 0x00B9},
    {"sup2", 0x00B2},    {"sup3", 0x00B3},      {"alpha", 0x03B1},
    {"beta", 0x03B2},    {"gamma", 0x03B3},     {"delta", 0x03B4},
    {"lambda", 0x03BB},  {"kappa", 0x03BA},     {"infin", 0x221E},
    {"le", 0x2264},      {"ge", 0x2265},        {"hellip", 0x2026},
    {"lsquo", 0x2018},   {"rsquo", 0x2019},     {"ldquo", 0x201C},
    {"rdquo", 0x201D},   {"thinsp", 0x2009},    {"ensp", 0x2002},
    {"emsp", 0x2003},    {"dagger", 0x2020},    {"Dagger", 0x2021},
    {"sect", 0x00A7},    {"para", 0x00B6},      {"bull", 0x2022},
    {"prime", 0x2032},   {"Prime", 0x2033},     {"asymp", 0x2248},
    {"approx", 0x2248},  {"sim", 0x223C},       {"copy", 0x00A9},
    {"reg", 0x00AE},     {"frac12", 0x00BD},    {"hairsp", 0x200A},
    {"zwnj", 0x200C},
}};

constexpr std::array<std::string_view, 14> kHtmlVoid = {
    "area", "base", "br",    "col",   "embed",  "hr",     "img",
    "input", "link", "meta", "param", "source", "track",  "wbr"};

bool is_void_html(std::string_view name) {
  return std::find(kHtmlVoid.begin(), kHtmlVoid.end(), name) != kHtmlVoid.end();
}

bool is_name_start(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) || c == '_' || c == ':' || u >= 0x80;
}

bool is_name_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == ':' || c == '-' || c == '.' ||
         u >= 0x80;
}

std::string local_part(std::string_view qname) {
  const size_t colon = qname.rfind(':');
  return std::string(colon == std::string_view::npos ? qname
                                                     : qname.substr(colon + 1));
}

// Text-bearing elements whose boundaries should not glue words together.
constexpr std::array<std::string_view, 3> kLineBreaks = {"br", "ce:br", "break"};

// Exponents such as "kg<sup>−1</sup>" read as "kg⁻¹": a superscript made only
// of digits and signs is rewritten with Unicode superscripts and glued to the
// preceding text. Anything else (footnote letters) stays a separate token.
std::optional<std::string> exponent_form(std::string_view s) {
  static constexpr std::array<std::string_view, 10> kDigits = {
      "⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"};
  std::string t = trim(s);
  std::string out;
  bool digit = false;
  for (size_t i = 0; i < t.size();) {
    const char ch = t[i];
    if (ch >= '0' && ch <= '9') {
      out += kDigits[ch - '0'];
      digit = true;
      ++i;
    } else if (ch == '-') {
      out += "⁻";
      ++i;
    } else if (ch == '+') {
      out += "⁺";
      ++i;
    } else if (t.compare(i, 3, "−") == 0) {
      out += "⁻";
      i += 3;
    } else {
      return std::nullopt;
    }
  }
  if (!digit) return std::nullopt;
  return out;
}

class Parser {
 public:
  Parser(std::string_view input, MarkupMode mode)
      : src_(sanitize_utf8(input)), mode_(mode) {}

  Document run() {
    if (trim(src_).empty()) throw MalformedDocument("empty document");
    stack_.push_back(doc_.root());
    while (pos_ < src_.size()) {
      const size_t lt = src_.find('<', pos_);
      if (lt == std::string::npos) {
        emit_text(std::string_view(src_).substr(pos_));
        pos_ = src_.size();
        break;
      }
      if (lt > pos_) emit_text(std::string_view(src_).substr(pos_, lt - pos_));
      pos_ = lt;
      parse_markup_construct();
    }
    if (mode_ == MarkupMode::kXml) {
      if (stack_.size() > 1) {
        fail("unclosed element <" + doc_.node(stack_.back()).name + ">");
      }
      if (doc_.element_children(doc_.root()).empty()) fail("no root element");
    }
    return std::move(doc_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw MalformedDocument(what + " near byte " + std::to_string(pos_));
  }

  bool xml() const { return mode_ == MarkupMode::kXml; }

  bool lookahead(std::string_view s) const {
    return src_.compare(pos_, s.size(), s) == 0;
  }

  void emit_text(std::string_view raw) {
    if (raw.empty()) return;
    if (xml() && stack_.size() == 1 && !trim(raw).empty()) {
      fail("character data outside the root element");
    }
    doc_.add_text(stack_.back(), decode_entities(raw));
  }

  void skip_to(std::string_view terminator, const char* what) {
    const size_t end = src_.find(terminator, pos_);
    if (end == std::string::npos) {
      if (xml()) fail(std::string("unterminated ") + what);
      pos_ = src_.size();
      return;
    }
    pos_ = end + terminator.size();
  }

  void parse_markup_construct() {
    if (lookahead("<!--")) {
      pos_ += 4;
      skip_to("-->", "comment");
    } else if (lookahead("<![CDATA[")) {
      pos_ += 9;
      const size_t end = src_.find("]]>", pos_);
      if (end == std::string::npos) fail("unterminated CDATA section");
      doc_.add_text(stack_.back(), src_.substr(pos_, end - pos_));
      pos_ = end + 3;
    } else if (lookahead("<!")) {
      skip_declaration();
    } else if (lookahead("<?")) {
      pos_ += 2;
      skip_to("?>", "processing instruction");
    } else if (lookahead("</")) {
      parse_end_tag();
    } else if (pos_ + 1 < src_.size() && is_name_start(src_[pos_ + 1])) {
      parse_start_tag();
    } else {
      if (xml()) fail("stray '<'");
      doc_.add_text(stack_.back(), "<");
      ++pos_;
    }
  }

  void skip_declaration() {
    int depth = 0;
    for (size_t i = pos_ + 2; i < src_.size(); ++i) {
      if (src_[i] == '[') ++depth;
      if (src_[i] == ']') --depth;
      if (src_[i] == '>' && depth <= 0) {
        pos_ = i + 1;
        return;
      }
    }
    if (xml()) fail("unterminated declaration");
    pos_ = src_.size();
  }

  std::string read_name() {
    const size_t start = pos_;
    while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
    return to_lower_ascii(std::string_view(src_).substr(start, pos_ - start));
  }

  void skip_spaces() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  void parse_end_tag() {
    pos_ += 2;
    const std::string name = read_name();
    skip_spaces();
    if (pos_ >= src_.size() || src_[pos_] != '>') {
      if (xml()) fail("malformed end tag </" + name + ">");
      const size_t gt = src_.find('>', pos_);
      pos_ = gt == std::string::npos ? src_.size() : gt + 1;
    } else {
      ++pos_;
    }
    if (xml()) {
      if (stack_.size() <= 1 || doc_.node(stack_.back()).name != name) {
        fail("mismatched end tag </" + name + ">");
      }
      stack_.pop_back();
      return;
    }
    // HTML: pop through the nearest matching open element, else ignore.
    for (size_t k = stack_.size(); k-- > 1;) {
      if (doc_.node(stack_[k]).name == name) {
        stack_.resize(k);
        return;
      }
    }
  }

  void parse_start_tag() {
    ++pos_;
    std::string name = read_name();
    std::vector<Attribute> attrs;
    bool self_closing = false;
    while (true) {
      skip_spaces();
      if (pos_ >= src_.size()) {
        if (xml()) fail("unterminated start tag <" + name + ">");
        break;
      }
      if (src_[pos_] == '>') {
        ++pos_;
        break;
      }
      if (lookahead("/>")) {
        pos_ += 2;
        self_closing = true;
        break;
      }
      if (src_[pos_] == '/') {
        ++pos_;
        continue;
      }
      std::string attr = read_name();
      if (attr.empty()) {
        if (xml()) fail("malformed attribute in <" + name + ">");
        ++pos_;
        continue;
      }
      skip_spaces();
      std::string value;
      if (pos_ < src_.size() && src_[pos_] == '=') {
        ++pos_;
        skip_spaces();
        value = read_attribute_value();
      } else if (xml()) {
        fail("attribute '" + attr + "' has no value");
      }
      attrs.push_back({std::move(attr), std::move(value)});
    }

    if (xml()) {
      if (stack_.size() == 1 && !doc_.element_children(doc_.root()).empty()) {
        fail("multiple root elements");
      }
      const NodeId id = doc_.add_element(stack_.back(), name, std::move(attrs));
      if (!self_closing) stack_.push_back(id);
      return;
    }

    apply_implied_end_tags(name);
    const NodeId id = doc_.add_element(stack_.back(), name, std::move(attrs));
    if (self_closing || is_void_html(name)) return;
    if (name == "script" || name == "style") {
      // Raw text content; dropped since it never carries table data.
      const std::string close = "</" + name;
      size_t end = pos_;
      while (true) {
        end = src_.find("</", end);
        if (end == std::string::npos ||
            iequals(std::string_view(src_).substr(end, close.size()), close)) {
          break;
        }
        end += 2;
      }
      pos_ = end == std::string::npos ? src_.size() : end;
      return;
    }
    stack_.push_back(id);
  }

  std::string read_attribute_value() {
    if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
      const char q = src_[pos_++];
      const size_t end = src_.find(q, pos_);
      if (end == std::string::npos) {
        if (xml()) fail("unterminated attribute value");
        std::string v = decode_entities(std::string_view(src_).substr(pos_));
        pos_ = src_.size();
        return v;
      }
      std::string v = decode_entities(std::string_view(src_).substr(pos_, end - pos_));
      pos_ = end + 1;
      return v;
    }
    if (xml()) fail("unquoted attribute value");
    const size_t start = pos_;
    while (pos_ < src_.size() &&
           !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
           src_[pos_] != '>') {
      ++pos_;
    }
    return decode_entities(std::string_view(src_).substr(start, pos_ - start));
  }

  // Index of the nearest open element named in `targets`, scanning down the
  // stack but not past any element named in `barriers`. 0 when absent.
  size_t find_open(std::initializer_list<std::string_view> targets,
                   std::initializer_list<std::string_view> barriers) const {
    for (size_t k = stack_.size(); k-- > 1;) {
      const std::string& n = doc_.node(stack_[k]).name;
      if (std::find(targets.begin(), targets.end(), n) != targets.end()) return k;
      if (std::find(barriers.begin(), barriers.end(), n) != barriers.end()) return 0;
    }
    return 0;
  }

  void close_from(size_t k) {
    if (k > 0) stack_.resize(k);
  }

  void apply_implied_end_tags(std::string_view name) {
    if (name == "td" || name == "th") {
      close_from(find_open({"td", "th"}, {"tr", "table"}));
    } else if (name == "tr") {
      close_from(find_open({"tr"}, {"table"}));
    } else if (name == "thead" || name == "tbody" || name == "tfoot") {
      close_from(find_open({"thead", "tbody", "tfoot"}, {"table"}));
    } else if (name == "p" || name == "table" || name == "div") {
      close_from(find_open({"p"}, {"td", "th", "table", "div", "body"}));
    } else if (name == "li") {
      close_from(find_open({"li"}, {"ul", "ol"}));
    }
  }

  std::string src_;
  MarkupMode mode_;
  size_t pos_ = 0;
  Document doc_;
  std::vector<NodeId> stack_;
};

}  // namespace

Document::Document() {
  nodes_.push_back(Node{Node::Kind::kElement, "#document", "#document", {}, {},
                        kNoNode, {}});
}

NodeId Document::add_element(NodeId parent, std::string name,
                             std::vector<Attribute> attributes) {
  const auto id = static_cast<NodeId>(nodes_.size());
  Node n;
  n.kind = Node::Kind::kElement;
  n.local_name = local_part(name);
  n.name = std::move(name);
  n.attributes = std::move(attributes);
  n.parent = parent;
  nodes_.push_back(std::move(n));
  nodes_[parent].children.push_back(id);
  return id;
}

void Document::add_text(NodeId parent, std::string text) {
  auto& siblings = nodes_[parent].children;
  if (!siblings.empty() && nodes_[siblings.back()].kind == Node::Kind::kText) {
    nodes_[siblings.back()].text += text;
    return;
  }
  const auto id = static_cast<NodeId>(nodes_.size());
  Node n;
  n.kind = Node::Kind::kText;
  n.text = std::move(text);
  n.parent = parent;
  nodes_.push_back(std::move(n));
  nodes_[parent].children.push_back(id);
}

std::optional<std::string_view> Document::attribute(NodeId id,
                                                    std::string_view name) const {
  for (const auto& a : nodes_[id].attributes) {
    if (a.name == name) return a.value;
    if (local_part(a.name) == name) return a.value;
  }
  return std::nullopt;
}

void Document::collect_text(NodeId id, std::string& out) const {
  const Node& n = nodes_[id];
  if (n.kind == Node::Kind::kText) {
    out += n.text;
    return;
  }
  if (n.local_name == "sup") {
    std::string inner;
    for (NodeId c : n.children) collect_text(c, inner);
    if (auto e = exponent_form(inner)) {
      while (!out.empty() && out.back() == ' ') out.pop_back();
      out += *e;
      return;
    }
  }
  out.push_back(' ');
  if (std::find(kLineBreaks.begin(), kLineBreaks.end(), n.name) == kLineBreaks.end()) {
    for (NodeId c : n.children) collect_text(c, out);
  }
  out.push_back(' ');
}

std::string Document::text_content(NodeId id) const {
  std::string raw;
  for (NodeId c : nodes_[id].children) collect_text(c, raw);
  return collapse_whitespace(raw);
}

std::vector<NodeId> Document::element_children(NodeId id) const {
  std::vector<NodeId> out;
  for (NodeId c : nodes_[id].children) {
    if (nodes_[c].kind == Node::Kind::kElement) out.push_back(c);
  }
  return out;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view ref = s.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (!ref.empty() && ref[0] == '#') {
      char32_t cp = 0;
      const bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
      const std::string_view digits = ref.substr(hex ? 2 : 1);
      bool ok = !digits.empty();
      for (char c : digits) {
        const int v = std::isdigit(static_cast<unsigned char>(c))
                          ? c - '0'
                          : (hex && std::isxdigit(static_cast<unsigned char>(c))
                                 ? std::tolower(static_cast<unsigned char>(c)) - 'a' + 10
                                 : -1);
        if (v < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(v);
      }
      if (ok && cp > 0 && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF)) {
        append_utf8(out, cp);
        decoded = true;
      }
    } else {
      for (const auto& e : kEntities) {
        if (e.name == ref) {
          append_utf8(out, e.cp);
          decoded = true;
          break;
        }
      }
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out.append(s.substr(i, semi - i + 1));
      i = semi + 1;
    }
  }
  return out;
}

Document parse_markup(std::string_view bytes, MarkupMode mode) {
  return Parser(bytes, mode).run();
}

}  // namespace pktablex
