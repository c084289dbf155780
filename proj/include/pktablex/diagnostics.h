#ifndef PKTABLEX_DIAGNOSTICS_H_
#define PKTABLEX_DIAGNOSTICS_H_

#include <string>
#include <utility>
#include <vector>

namespace pktablex {

// Non-fatal findings collected while processing one table or document.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const { return warnings.empty(); }
};

// Null-safe helper so callers may pass `nullptr` when they don't care.
inline void warn(Diagnostics* diag, std::string message) {
  if (diag != nullptr) diag->warn(std::move(message));
}

}  // namespace pktablex

#endif  // PKTABLEX_DIAGNOSTICS_H_
