#ifndef PKTABLEX_TEXT_H_
#define PKTABLEX_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace pktablex {

// Placeholder written into grid positions that no cell covers.
inline constexpr std::string_view kNaN = "NaN";

// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

// Collapses runs of Unicode whitespace (ASCII, NBSP, U+2000..U+200A, U+202F,
// U+205F, U+3000) into single ASCII spaces and trims both ends.
std::string collapse_whitespace(std::string_view s);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool starts_with_icase(std::string_view s, std::string_view prefix);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Splits on ASCII spaces, dropping empty tokens.
std::vector<std::string> tokenize_words(std::string_view s);

// Numeric-aware ordering ("Table 2" < "Table 10").
bool natural_less(std::string_view a, std::string_view b);

// Encodes a code point as UTF-8 and appends it to `out`.
void append_utf8(std::string& out, char32_t cp);

}  // namespace pktablex

#endif  // PKTABLEX_TEXT_H_
