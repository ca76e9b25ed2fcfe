#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "homord/structure.hpp"

namespace homord {

/// Backtracking search for isomorphisms between two structures over the same
/// signature. Candidates are pruned by joint colour refinement and by forward
/// checking on unary and binary relations; higher-arity relations are checked
/// as soon as all entries of a tuple are mapped.
class MorphismSearch {
 public:
  MorphismSearch(const FinStructure& from, const FinStructure& to);

  using Visitor = std::function<bool(const std::vector<Element>&)>;
  using Forced = std::span<const std::pair<Element, Element>>;

  /// Visits every isomorphism that extends the forced pairs. Returning false
  /// from the visitor stops the search. Returns the number of maps visited.
  std::uint64_t for_each(Forced forced, const Visitor& visit) const;

  std::optional<std::vector<Element>> find_one(Forced forced) const;

  /// Colour classes after refinement; equal colours are necessary for x -> y.
  const std::vector<int>& from_colours() const { return colour_from_; }
  const std::vector<int>& to_colours() const { return colour_to_; }

 private:
  struct Bits {
    std::vector<std::uint64_t> w;
    explicit Bits(std::size_t n = 0) : w((n + 63) / 64, 0) {}
    void set(std::size_t i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) { w[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    bool test(std::size_t i) const { return (w[i >> 6] >> (i & 63)) & 1; }
  };
  struct Incidence {
    std::size_t rel;
    std::uint64_t code;
  };

  bool consistent_high_arity(const std::vector<Element>& map, const std::vector<Element>& inverse,
                             Element x, Element y) const;

  const FinStructure& from_;
  const FinStructure& to_;
  std::size_t n_ = 0;
  bool compatible_ = true;
  std::vector<std::size_t> binary_;
  std::vector<std::size_t> high_;
  // Per binary relation: out/in neighbourhood rows of `to`, and adjacency of `from`.
  std::vector<std::vector<Bits>> to_out_, to_in_;
  std::vector<std::vector<Bits>> from_out_, from_in_;
  std::vector<std::vector<Incidence>> from_incident_, to_incident_;
  std::vector<int> colour_from_, colour_to_;
};

}  // namespace homord
