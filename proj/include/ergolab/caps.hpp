#pragma once

#include <cstdlib>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace ergolab {

struct CapExceeded : std::runtime_error {
  explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Safety caps on exact-arithmetic problem sizes. ERGOLAB_CAP=N overrides:
// tensor/Gram dimension cap becomes N, settled-interval cap becomes 1024*N.
struct Caps {
  std::size_t tensor_dimension = 4096;        // largest 2^w handled by exact elimination
  std::size_t interval_budget = 4096 * 1024;  // total stored intervals in a rank-one state
  std::size_t law_cells = 1u << 22;           // largest materialized joint law

  void require_tensor_dimension(std::size_t dim) const {
    if (dim > tensor_dimension)
      throw CapExceeded("tensor dimension " + std::to_string(dim) + " exceeds cap " +
                        std::to_string(tensor_dimension));
  }
  void require_interval_budget(std::size_t count) const {
    if (count > interval_budget)
      throw CapExceeded("interval count " + std::to_string(count) + " exceeds cap " +
                        std::to_string(interval_budget));
  }
  void require_law_cells(std::size_t count) const {
    if (count > law_cells)
      throw CapExceeded("joint law with " + std::to_string(count) + " cells exceeds cap " +
                        std::to_string(law_cells));
  }

  static Caps from_env() {
    Caps caps;
    if (const char* raw = std::getenv("ERGOLAB_CAP")) {
      char* end = nullptr;
      unsigned long long n = std::strtoull(raw, &end, 10);
      if (end != raw && n > 0) {
        caps.tensor_dimension = static_cast<std::size_t>(n);
        caps.interval_budget = static_cast<std::size_t>(n) * 1024;
      }
    }
    return caps;
  }
};

}  // namespace ergolab
