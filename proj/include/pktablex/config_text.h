#ifndef PKTABLEX_CONFIG_TEXT_H_
#define PKTABLEX_CONFIG_TEXT_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pktablex {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);

  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

// One line of a sectioned "key = value" file. Bare lines (no '=') have an
// empty key and the whole line in `value`.
struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

// Parses the shared config syntax:
//
//   # comment
//   [section name]
//   key = value
//   bare line
//
// Keys are lower-cased and trimmed; values are trimmed. Keys may repeat.
std::vector<ConfigEntry> parse_config_text(std::string_view text,
                                           const std::string& source);

std::string read_file(const std::filesystem::path& path);

// Splits a comma-separated value list, trimming items and dropping empties.
std::vector<std::string> split_list(std::string_view value);

}  // namespace pktablex

#endif  // PKTABLEX_CONFIG_TEXT_H_
