#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "homord/builders.hpp"
#include "homord/errors.hpp"
#include "homord/group.hpp"

using namespace homord;

namespace {

FinStructure graph(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  RelationTables t;
  for (auto [a, b] : edges) {
    t["E"].push_back({a, b});
    t["E"].push_back({b, a});
  }
  return make_structure(Signature({{"E", 2, true, true}}), n, t);
}

// Brute-force automorphism count over all n! permutations.
std::size_t brute_force_order(const FinStructure& s) {
  Tuple p(s.size());
  std::iota(p.begin(), p.end(), 0);
  std::size_t count = 0;
  do count += is_isomorphism(s, s, p) ? 1 : 0;
  while (std::next_permutation(p.begin(), p.end()));
  return count;
}

}  // namespace

TEST_CASE("automorphism group orders") {
  auto k3 = graph(3, {{0, 1}, {1, 2}, {0, 2}});
  auto path = graph(3, {{0, 1}, {1, 2}});
  auto edge = graph(2, {{0, 1}});
  CHECK(automorphisms(k3).order == 6);
  CHECK(automorphisms(path).order == 2);
  CHECK(brute_force_order(path) == 2);
  CHECK(automorphisms(edge).order == 2);
  CHECK(automorphisms(build_paley_graph(13)).order == 78);
  CHECK(automorphisms(make_structure(Signature(), 8, {})).order == 40320);
}

TEST_CASE("explicit groups are closed and preserve all relations") {
  auto s = build_bipartite_deg2(6, 4);
  auto g = automorphisms(s);
  REQUIRE(g.is_explicit);
  CHECK(g.order == g.elements.size());
  std::set<Permutation> all(g.elements.begin(), g.elements.end());
  for (const auto& p : g.elements) {
    CHECK(is_isomorphism(s, s, p));
    Permutation inv(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) inv[static_cast<std::size_t>(p[i])] = static_cast<Element>(i);
    CHECK(all.count(inv));
  }
  for (std::size_t i = 0; i < std::min<std::size_t>(g.elements.size(), 20); ++i)
    for (std::size_t j = 0; j < std::min<std::size_t>(g.elements.size(), 20); ++j) {
      Permutation c(s.size());
      for (std::size_t x = 0; x < s.size(); ++x) c[x] = g.elements[i][static_cast<std::size_t>(g.elements[j][x])];
      CHECK(all.count(c));
    }
}

TEST_CASE("random small graphs: group order matches brute force") {
  std::uint64_t state = 99;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < 6; ++a)
      for (int b = a + 1; b < 6; ++b) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        if (state >> 63) edges.emplace_back(a, b);
      }
    auto s = graph(6, edges);
    CHECK(automorphisms(s).order == brute_force_order(s));
  }
}

TEST_CASE("large groups fall back to generators") {
  auto pure = make_structure(Signature(), 12, {});
  auto g = automorphisms(pure, 1000);
  CHECK_FALSE(g.is_explicit);
  CHECK(g.order == BigInt(479001600));
  CHECK_FALSE(g.generators.empty());
}

TEST_CASE("orbits") {
  auto pure = make_structure(Signature(), 4, {});
  CHECK(orbits(pure, 2, {}).blocks.size() == 1);
  auto path = graph(3, {{0, 1}, {1, 2}});
  auto o = orbits(path, 1, {});
  REQUIRE(o.blocks.size() == 2);
  CHECK(o.blocks[0] == std::vector<Tuple>{{0}, {2}});
  CHECK(o.blocks[1] == std::vector<Tuple>{{1}});
  Element zero = 0;
  CHECK(orbits(path, 1, std::span<const Element>(&zero, 1)).blocks.size() == 3);
  CHECK_THROWS_AS(orbits(make_structure(Signature(), 200, {}), 4, {}, 1000), ResourceError);
}

TEST_CASE("orbits refine types") {
  auto s = build_bipartite_deg2(10, 1);
  auto o = orbits(s, 2, {});
  for (const auto& block : o.blocks)
    for (const auto& t : block) CHECK(canonical_type(s, t) == canonical_type(s, block.front()));
}

TEST_CASE("acl profiles") {
  auto chain = build_paley_chain();
  Element a = 0;
  auto growing = acl_profile(chain, std::span<const Element>(&a, 1), 1);
  CHECK(growing.verdict == AclVerdict::growing);
  CHECK(growing.orbit_sizes.front() < growing.orbit_sizes.back());
  auto same = acl_profile(chain, std::span<const Element>(&a, 1), 0);
  CHECK(same.verdict == AclVerdict::algebraic_over_A);
  CHECK(same.orbit_sizes.back() == 1);

  auto inv = build_involution_chain({2, 4, 6}, 17);
  for (Element x = 0; x < 4; ++x) {
    auto p = acl_profile(inv, std::span<const Element>(&x, 1), involution_partner(inv.levels[0], x));
    CHECK(p.verdict == AclVerdict::algebraic_over_A);
    CHECK(p.orbit_sizes == std::vector<std::size_t>{1, 1, 1});
  }
  StructureChain single;
  single.levels = {build_paley_graph(5)};
  CHECK_THROWS_AS(acl_profile(single, std::span<const Element>(&a, 1), 1), PreconditionError);
}

TEST_CASE("invariant equivalences") {
  auto pure = invariant_equivalences(make_structure(Signature(), 3, {}));
  CHECK(pure.size() == 2);
  auto pq = invariant_equivalences(build_two_predicate_PQ(2, 2));
  CHECK(pq.size() >= 3);
  Equivalence blocks{{{0, 1}, {2, 3}}};
  CHECK(std::find(pq.begin(), pq.end(), blocks) != pq.end());
  auto view = bipartite_m_view(build_bipartite_deg2(10, 3)).view;
  auto prim = invariant_equivalences(view);
  CHECK(prim.size() == 2);
  for (const auto& e : prim) CHECK((e.is_equality() || e.is_total()));
  // With four S1 points, "share no neighbour" pairs the six S0 elements into
  // three blocks, so the action is imprimitive.
  auto k4 = bipartite_m_view(build_bipartite_deg2(6, 3)).view;
  CHECK(invariant_equivalences(k4).size() > 2);
}
