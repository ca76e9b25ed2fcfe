#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homord/structure.hpp"

namespace homord {

/// Increasing chain of finite structures. Level i+1 contains level i as the
/// induced substructure on the prefix {0, ..., |level i| - 1}.
struct StructureChain {
  std::string class_name;
  std::uint64_t seed = 0;
  std::vector<FinStructure> levels;
  /// Self-saturation depth of each level: every extension-axiom instance (A, B)
  /// over the level with |A| + |B| <= depth has a witness inside the level.
  /// -1 when the class has no witness scheme.
  std::vector<int> saturation;
  /// Relative depth: instances over level i-1 witnessed in level i (0 for level 0).
  std::vector<int> relative_saturation;

  const FinStructure& last() const { return levels.back(); }
};

/// Throws ValidationError unless every inclusion is an embedding on the prefix.
void validate_chain(const StructureChain& chain);

}  // namespace homord
