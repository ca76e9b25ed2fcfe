#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homord/structure.hpp"

namespace homord {

/// Alternating path y0, y1, ..., y2n with tp(y2i, y2i+1) = tp(y2i+2, y2i+1) = tau
/// and all nodes distinct.
struct TauPath {
  std::vector<Element> nodes;
  TypeCode tau;

  Element a() const { return nodes.front(); }
  Element b() const { return nodes.back(); }
  std::size_t length() const { return nodes.size() - 1; }
  std::vector<Element> interior() const { return {nodes.begin() + 1, nodes.end() - 1}; }
};

/// Re-checks the path invariants from scratch with canonical_type. Returns the
/// first problem found, or nothing when the path is valid.
std::optional<std::string> verify_tau_path(const FinStructure& s, const TauPath& path);

/// True when some ordered pair of distinct elements has type tau.
bool tau_realized(const FinStructure& s, const TypeCode& tau);

/// Shortest alternating tau-path from a to b whose interior misses `avoid`.
/// Throws PreconditionError when a == b, an endpoint lies in `avoid`, or tau is
/// not a 2-type realized in s; an absent path is returned as nullopt.
std::optional<TauPath> find_tau_path(const FinStructure& s, Element a, Element b, const TypeCode& tau,
                                     std::span<const Element> avoid = {});

/// All paths of exactly `length` edges, interior avoiding `avoid`, up to `limit`.
/// `complete` is cleared when the limit cut the enumeration short.
std::vector<TauPath> enumerate_tau_paths(const FinStructure& s, Element a, Element b, const TypeCode& tau,
                                         std::size_t length, std::span<const Element> avoid,
                                         std::size_t limit, bool* complete = nullptr);

struct TauPathFamily {
  std::vector<TauPath> paths;  // same length, pairwise disjoint interiors
  std::size_t requested = 0;
  bool shortage = false;       // fewer than requested
  bool exhaustive = false;     // the shortage was confirmed by exhaustive search
};

/// Greedy family of same-length paths with pairwise disjoint interiors. When the
/// greedy pass falls short, an exhaustive search over all shortest-length paths
/// (bounded by `enumeration_limit`) tries to reach the requested count.
TauPathFamily disjoint_tau_paths(const FinStructure& s, Element a, Element b, const TypeCode& tau,
                                 std::size_t count, std::size_t enumeration_limit = 100'000);

}  // namespace homord
