#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "wnc/processes.hpp"

namespace wnc {

/// N hops in series carrying one flow. K is the interference range: a hop
/// shares the medium with up to K - 1 hops on each side. With shared_channel
/// every hop sees the same capacity realization (hops[0]).
struct HopChain {
  std::vector<CapacityProcess> hops;
  std::uint32_t interference_k = 1;
  bool shared_channel = false;

  std::size_t size() const { return hops.size(); }
  std::uint32_t effective_k() const {
    return std::min<std::uint32_t>(interference_k, static_cast<std::uint32_t>(hops.size()));
  }
  /// Interfering flows per hop including the flow itself: 2K - 1.
  double interference_multiplier() const { return 2.0 * effective_k() - 1.0; }
  void validate() const;
};

}  // namespace wnc
