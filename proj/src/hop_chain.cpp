#include "wnc/hop_chain.hpp"

#include "wnc/error.hpp"

namespace wnc {

void HopChain::validate() const {
  if (hops.empty()) throw ValidationError("invalid hops: chain needs at least one hop");
  if (interference_k < 1) throw ValidationError("invalid interference_k: must be at least 1");
}

}  // namespace wnc
