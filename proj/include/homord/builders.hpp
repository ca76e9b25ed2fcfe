#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "homord/chain.hpp"
#include "homord/structure.hpp"

namespace homord {

enum class ClassKind {
  pure_set,
  graph,
  kn_free_graph,
  tournament,
  linear_order,
  two_predicate_PQ,
  bipartite_deg2,
  involution_order,
  f2_vector_space,
};

/// A registered class of finite structures with its membership checker.
///
/// Relation names per class: graphs and tournaments use `E`; linear orders
/// `lt`; the two-predicate class `P`, `Q`; the bipartite class `S0`, `S1`,
/// `R`; the involution class `lt` and `F` (the graph of the involution); the
/// vector space `Z` (zero) and `S` (a + b = c).
class FraisseClassSpec {
 public:
  static FraisseClassSpec make(ClassKind kind, int param = 0);
  /// Accepts "graph", "kn_free_graph:3", "f2_vector_space:4", ...
  static FraisseClassSpec parse(std::string_view text);

  ClassKind kind() const { return kind_; }
  int param() const { return param_; }
  const Signature& signature() const { return signature_; }
  std::string name() const;

  /// First constraint violation, if any.
  std::optional<std::string> violation(const FinStructure& s) const;
  bool accepts(const FinStructure& s) const { return !violation(s).has_value(); }

  /// Classes with an extension-axiom witness scheme usable by build_generic.
  bool witnessable() const;
  /// Closed under arbitrary substructures in this relational encoding.
  bool hereditary() const;

 private:
  ClassKind kind_ = ClassKind::pure_set;
  int param_ = 0;
  Signature signature_;
};

/// Largest t' <= max_depth such that every instance (A, B) over the whole
/// structure with 1 <= |A| + |B| <= t' has a witness outside A and B.
int saturation_depth(const FraisseClassSpec& spec, const FinStructure& s, int max_depth);

/// Same, for instances over the prefix {0..prefix-1} with witnesses anywhere.
int relative_saturation_depth(const FraisseClassSpec& spec, const FinStructure& s, std::size_t prefix,
                              int max_depth);

/// Witness-completion chain for graph, kn_free_graph, tournament and pure_set.
/// Rounds add one fresh witness per still-unsatisfied instance until the last
/// level is self-saturated at depth t. Throws SaturationInfeasible at the cap.
StructureChain build_generic(const FraisseClassSpec& spec, int t, std::size_t cap, std::uint64_t seed);

/// Paley graph on Z/q for a prime q = 1 mod 4.
FinStructure build_paley_graph(int q);

/// Two-level chain P(5) < P(13) of Paley graphs, relabelled so the inclusion
/// is the identity on the prefix.
StructureChain build_paley_chain();

/// Linear order on {0..n-1} with lt(i, j) iff i < j.
FinStructure build_linear_order(std::size_t n);

/// |P| = sizeP, |Q| = sizeQ, P first.
FinStructure build_two_predicate_PQ(std::size_t sizeP, std::size_t sizeQ);

/// Two-sorted bipartite structure: S0 elements are 0..mSize-1, each with two
/// distinct S1 neighbours; no neighbour pair repeats. Unused pairs among the
/// existing S1 points are filled (in seeded random order) before a new S1
/// point is created, so mSize = p(p-1)/2 yields every pair of p points.
FinStructure build_bipartite_deg2(std::size_t mSize, std::uint64_t seed);

struct BipartiteAudit {
  bool sorts_ok = true;
  bool bipartite = true;      // no S0-S0 or S1-S1 edges
  bool degrees_two = true;    // algebraically closed: every S0 element has degree 2
  bool pairs_distinct = true;
  bool pair_saturated = true; // every pair of S1 points has a common S0 neighbour
};
BipartiteAudit audit_bipartite(const FinStructure& n);

/// Structure on a sort, with the projection back to the parent universe.
struct SortView {
  FinStructure view;
  std::vector<Element> to_parent;
};

/// M-sort view of the bipartite structure: relations share0/share1/share2
/// (number of common S1 neighbours) between distinct S0 elements.
SortView bipartite_m_view(const FinStructure& n);

/// Ordered set of 2*pairs elements with element id equal to its rank in lt,
/// and a seeded random fixed-point-free matching F. Sorts: "M" for f(a) < a,
/// "M'" otherwise.
FinStructure build_involution_order(std::size_t pairs, std::uint64_t seed);

/// Chain of involution structures: each level inserts new matched pairs at
/// random positions of the order; ids follow creation order.
StructureChain build_involution_chain(const std::vector<std::size_t>& pair_counts, std::uint64_t seed);

/// The partner f(a).
Element involution_partner(const FinStructure& s, Element a);

/// Positions of a, f(a), b, f(b) listed from least to greatest, e.g.
/// "fa<fb<a<b".
std::string involution_configuration(const FinStructure& s, Element a, Element b);

/// Some pair a, b in M with f(a) < f(b) < a < b, if the structure has one.
std::optional<std::pair<Element, Element>> find_interleaved_pair(const FinStructure& s);

/// M-sort view with trace relations lt, flt (f(a) < b), ltf (a < f(b)), ff.
SortView involution_m_view(const FinStructure& s);

/// All 2^d vectors of F_2^d (element id = bit vector), zero named by Z and
/// the addition graph by the ternary S. d in [1, 16]; tables are materialized
/// so dimensions above 12 raise ResourceError.
FinStructure build_f2_vector_space(int d);

}  // namespace homord
