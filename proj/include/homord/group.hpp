#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homord/chain.hpp"
#include "homord/structure.hpp"

namespace homord {

using Permutation = std::vector<Element>;
using BigInt = boost::multiprecision::cpp_int;

/// Automorphism group of a finite structure: the explicit element list when
/// the order is at most the requested bound, otherwise generators only.
struct AutGroup {
  FinStructure base;
  std::vector<Permutation> generators;
  std::vector<Permutation> elements;  // empty unless `is_explicit`
  bool is_explicit = false;
  BigInt order = 1;
};

/// Generators of the pointwise stabilizer of `fixed`, found by a transversal
/// search along a base that starts with the fixed points. `order` receives the
/// exact stabilizer order when non-null.
std::vector<Permutation> stabilizer_generators(const FinStructure& s, std::span<const Element> fixed,
                                               BigInt* order = nullptr);

AutGroup automorphisms(const FinStructure& s, std::size_t bound = 1'000'000);

/// Partition of the distinct k-tuples into orbits of the pointwise stabilizer.
struct OrbitPartition {
  std::size_t arity = 0;
  std::vector<Element> stabilized_by;
  std::vector<std::vector<Tuple>> blocks;  // each sorted; blocks ordered by first tuple

  /// Index of the block containing `t`, or -1.
  int block_of(std::span<const Element> t) const;
};

OrbitPartition orbits(const FinStructure& s, std::size_t k, std::span<const Element> fixed,
                      std::size_t tuple_bound = 20'000'000);

/// Orbit of one element under the group generated by `generators`.
std::vector<Element> element_orbit(std::span<const Permutation> generators, Element b, std::size_t n);

enum class AclVerdict { algebraic_over_A, growing, undecided };
std::string to_string(AclVerdict v);

/// Orbit growth of b under the stabilizer of A along a chain. The verdict is a
/// statement about the finite levels only.
struct AclProfile {
  AclVerdict verdict = AclVerdict::undecided;
  std::vector<std::size_t> orbit_sizes;  // one per level
  std::vector<std::vector<Element>> orbits;
};

AclProfile acl_profile(const StructureChain& chain, std::span<const Element> A, Element b);

/// An equivalence relation on a subset of the universe, as its classes.
struct Equivalence {
  std::vector<std::vector<Element>> classes;  // each sorted; ordered by first element
  bool is_equality() const;
  bool is_total() const { return classes.size() == 1; }
  bool operator==(const Equivalence&) const = default;
};

/// All Aut(S)-invariant equivalence relations on the universe (or on the
/// elements carrying `sort`). Includes both trivial relations.
std::vector<Equivalence> invariant_equivalences(const FinStructure& s,
                                                const std::optional<std::string>& sort = std::nullopt,
                                                std::size_t max_pair_orbits = 18);

}  // namespace homord
