#ifndef PKTABLEX_MARKUP_H_
#define PKTABLEX_MARKUP_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pktablex {

// Raised when a document cannot be parsed at all. In XML mode this covers
// well-formedness violations; HTML mode recovers from everything except
// empty input.
class MalformedDocument : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MarkupMode { kXml, kHtml };

using NodeId = uint32_t;
inline constexpr NodeId kNoNode = UINT32_MAX;

struct Attribute {
  std::string name;  // lower-cased
  std::string value;
};

struct Node {
  enum class Kind { kElement, kText };
  Kind kind = Kind::kElement;
  std::string name;        // lower-cased qualified name ("ce:table")
  std::string local_name;  // part after the prefix ("table")
  std::vector<Attribute> attributes;
  std::string text;  // decoded character data for text nodes
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
};

// Arena-backed document tree. Node 0 is a synthetic root element.
class Document {
 public:
  Document();

  const Node& node(NodeId id) const { return nodes_[id]; }
  NodeId root() const { return 0; }
  size_t size() const { return nodes_.size(); }

  std::optional<std::string_view> attribute(NodeId id,
                                            std::string_view name) const;

  // Concatenated character data under `id`. Element boundaries act as token
  // separators, so "C<sub>max</sub>" reads "C max"; whitespace is collapsed.
  // Numeric superscripts are exponents: "kg<sup>−1</sup>" reads "kg⁻¹".
  std::string text_content(NodeId id) const;

  // Element children of `id`, in document order.
  std::vector<NodeId> element_children(NodeId id) const;

  NodeId add_element(NodeId parent, std::string name,
                     std::vector<Attribute> attributes);
  void add_text(NodeId parent, std::string text);

 private:
  void collect_text(NodeId id, std::string& out) const;

  std::vector<Node> nodes_;
};

// Parses `bytes` (decoded as UTF-8 with replacement) into a tree.
Document parse_markup(std::string_view bytes, MarkupMode mode);

// Decodes character and entity references in `s`. Unknown named entities are
// kept verbatim.
std::string decode_entities(std::string_view s);

}  // namespace pktablex

#endif  // PKTABLEX_MARKUP_H_
