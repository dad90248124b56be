#pragma once

#include <cstdint>
#include <utility>

namespace terragan::oracle {

/// Inclusive input-row interval seen by output index `cell` after `layers`
/// convolutions of kernel k, stride s, padding p (walked backwards layer by layer).
inline std::pair<std::int64_t, std::int64_t> receptive_interval(std::int64_t cell, int layers, std::int64_t k,
                                                                std::int64_t s, std::int64_t p) {
  std::int64_t lo = cell;
  std::int64_t hi = cell;
  for (int l = 0; l < layers; ++l) {
    lo = lo * s - p;
    hi = hi * s - p + k - 1;
  }
  return {lo, hi};
}

}  // namespace terragan::oracle
