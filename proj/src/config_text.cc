#include "pktablex/config_text.h"

#include <fstream>
#include <sstream>

#include "pktablex/text.h"

namespace pktablex {

ConfigError::ConfigError(const std::string& source, int line,
                         const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : "") +
                         ": " + message),
      source_(source),
      line_(line) {}

std::vector<ConfigEntry> parse_config_text(std::string_view text,
                                           const std::string& source) {
  std::vector<ConfigEntry> out;
  std::string section;
  int line_no = 0;
  for (const std::string& raw_line : split(sanitize_utf8(text), '\n')) {
    ++line_no;
    const std::string line = trim(raw_line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(source, line_no, "unterminated section header");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(source, line_no, "empty section name");
      continue;
    }
    ConfigEntry e;
    e.section = section;
    e.line = line_no;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      e.value = line;
    } else {
      e.key = to_lower_ascii(trim(std::string_view(line).substr(0, eq)));
      e.value = trim(std::string_view(line).substr(eq + 1));
      if (e.key.empty()) throw ConfigError(source, line_no, "missing key before '='");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  for (const auto& item : split(value, ',')) {
    std::string t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace pktablex
