#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "homord/builders.hpp"
#include "homord/errors.hpp"
#include "homord/group.hpp"
#include "homord/rng.hpp"
#include "homord/structure.hpp"

using namespace homord;

namespace {

Signature graph_sig() { return Signature({{"E", 2, true, true}}); }

FinStructure graph(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  RelationTables t;
  for (auto [a, b] : edges) {
    t["E"].push_back({a, b});
    t["E"].push_back({b, a});
  }
  return make_structure(graph_sig(), n, t);
}

FinStructure path3() { return graph(3, {{0, 1}, {1, 2}}); }

// Brute-force oracle: does the position map between the tuples preserve and
// reflect every relation on the induced positions?
bool same_type_oracle(const FinStructure& s, const Tuple& a, const FinStructure& t, const Tuple& b) {
  if (a.size() != b.size()) return false;
  const std::size_t k = a.size();
  for (std::size_t i = 0; i < k; ++i)
    if (s.sort_of(a[i]) != t.sort_of(b[i])) return false;
  for (std::size_t r = 0; r < s.signature().size(); ++r) {
    const auto ar = static_cast<std::size_t>(s.signature()[r].arity);
    std::vector<std::size_t> idx(ar, 0);
    while (true) {
      Tuple x(ar), y(ar);
      for (std::size_t j = 0; j < ar; ++j) x[j] = a[idx[j]], y[j] = b[idx[j]];
      if (s.holds(r, x) != t.holds(r, y)) return false;
      std::size_t j = 0;
      while (j < ar && ++idx[j] == k) idx[j++] = 0;
      if (j == ar) break;
    }
  }
  return true;
}

FinStructure random_graph(std::size_t n, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (coin(rng)) edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
  return graph(n, edges);
}

}  // namespace

TEST_CASE("make_structure basics") {
  auto pure = make_structure(Signature(), 3, {});
  CHECK(pure.size() == 3);
  auto edge = graph(2, {{0, 1}});
  CHECK(edge.holds(0, 0, 1));
  CHECK(edge.holds(0, 1, 0));
  CHECK_FALSE(edge.holds(0, 0, 0));

  RelationTables one_way;
  one_way["E"] = {{0, 1}};
  CHECK_THROWS_AS(make_structure(graph_sig(), 2, one_way), ValidationError);
  RelationTables out_of_range;
  out_of_range["E"] = {{0, 2}, {2, 0}};
  CHECK_THROWS_AS(make_structure(graph_sig(), 2, out_of_range), ValidationError);
  RelationTables bad_arity;
  bad_arity["E"] = {{0}};
  CHECK_THROWS_AS(make_structure(graph_sig(), 2, bad_arity), ValidationError);
  RelationTables unknown;
  unknown["X"] = {{0, 1}};
  CHECK_THROWS_AS(make_structure(graph_sig(), 2, unknown), ValidationError);
  CHECK_THROWS_AS(Signature({{"E", 2}, {"E", 1}}), ValidationError);
  CHECK_THROWS_AS(Signature({{"E", 0}}), ValidationError);
}

TEST_CASE("induced substructure") {
  auto p = path3();
  Tuple nonadj = {0, 2}, adj = {0, 1}, all = {0, 1, 2};
  CHECK(induced_substructure(p, nonadj).table(0).size() == 0);
  CHECK(induced_substructure(p, adj).table(0).size() == 2);
  CHECK(induced_substructure(p, all) == p);
  Tuple repeated = {0, 0}, outside = {0, 5};
  CHECK_THROWS_AS(induced_substructure(p, repeated), PreconditionError);
  CHECK_THROWS_AS(induced_substructure(p, outside), PreconditionError);
}

TEST_CASE("canonical types on the path") {
  auto p = path3();
  Tuple a = {0, 1}, b = {0, 2}, c = {2, 0};
  CHECK(canonical_type(p, a) != canonical_type(p, b));
  CHECK(canonical_type(p, b) == canonical_type(p, c));
  CHECK(same_type_oracle(p, b, p, c));
  CHECK(enumerate_types(p, 1).size() == 1);
  CHECK(enumerate_types(p, 0).size() == 1);
  auto code = canonical_type(p, a);
  CHECK(TypeCode::from_hex(code.hex()) == code);
}

TEST_CASE("canonical_type matches the brute-force oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_graph(6, rng);
    auto t = random_graph(6, rng);
    for (std::size_t k = 1; k <= 4; ++k) {
      std::vector<Tuple> ts, us;
      for_each_distinct_tuple(6, k, [&](std::span<const Element> x) {
        ts.emplace_back(x.begin(), x.end());
        return ts.size() < 40;
      });
      for (int i = 0; i < 30; ++i) {
        Tuple x = ts[uniform_index(rng, ts.size())];
        Tuple y = ts[uniform_index(rng, ts.size())];
        const bool codes = canonical_type(s, x) == canonical_type(t, y);
        CHECK(codes == same_type_oracle(s, x, t, y));
        auto sx = induced_substructure(s, x), ty = induced_substructure(t, y);
        Tuple id(k);
        std::iota(id.begin(), id.end(), 0);
        CHECK(codes == is_isomorphism(sx, ty, id));
      }
    }
  }
}

TEST_CASE("enumerate_types") {
  CHECK(enumerate_types(make_structure(Signature(), 5, {}), 3).size() == 1);
  CHECK(enumerate_types(build_linear_order(4), 2).size() == 2);
  CHECK(enumerate_types(build_paley_graph(13), 2).size() == 2);
}

TEST_CASE("find_isomorphism") {
  auto k3 = graph(3, {{0, 1}, {1, 2}, {0, 2}});
  auto iso = find_isomorphism(k3, k3);
  REQUIRE(iso);
  CHECK(is_isomorphism(k3, k3, *iso));
  CHECK_FALSE(find_isomorphism(graph(2, {{0, 1}}), graph(2, {})));

  auto c1 = graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  auto c2 = graph(4, {{0, 2}, {2, 1}, {1, 3}, {3, 0}});
  auto found = find_isomorphism(c1, c2);
  REQUIRE(found);
  CHECK(is_isomorphism(c1, c2, *found));
  // Oracle: exhaustive search over all 4! maps agrees that one exists.
  Tuple p = {0, 1, 2, 3};
  bool any = false;
  do any = any || is_isomorphism(c1, c2, p);
  while (std::next_permutation(p.begin(), p.end()));
  CHECK(any);
  CHECK_FALSE(find_isomorphism(c1, graph(4, {{0, 1}, {1, 2}, {2, 3}})));
}

TEST_CASE("find_isomorphism agrees with exhaustive search on random graphs") {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    auto s = random_graph(6, rng);
    Tuple perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(std::span<Element>(perm), rng);
    auto t = trial % 2 ? relabel(s, perm) : random_graph(6, rng);
    Tuple p = {0, 1, 2, 3, 4, 5};
    bool any = false;
    do any = any || is_isomorphism(s, t, p);
    while (!any && std::next_permutation(p.begin(), p.end()));
    auto found = find_isomorphism(s, t);
    CHECK(found.has_value() == any);
    if (found) CHECK(is_isomorphism(s, t, *found));
  }
}

TEST_CASE("canonical_type is invariant under automorphisms") {
  auto s = build_paley_graph(13);
  auto group = automorphisms(s);
  REQUIRE(group.is_explicit);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto& g = group.elements[uniform_index(rng, group.elements.size())];
    Tuple a = {0, 3, 7};
    Tuple ga = {g[0], g[3], g[7]};
    CHECK(canonical_type(s, a) == canonical_type(s, ga));
  }
}

TEST_CASE("find_embedding and relabel") {
  auto small = build_paley_graph(5);
  auto big = build_paley_graph(13);
  auto e = find_embedding(small, big);
  REQUIRE(e);
  CHECK(induced_substructure(big, *e) == small);
  CHECK_FALSE(find_embedding(big, build_paley_graph(17)));
}

TEST_CASE("for_each_distinct_tuple counts falling factorials") {
  std::size_t count = 0;
  for_each_distinct_tuple(5, 3, [&](std::span<const Element> t) {
    CHECK(t[0] != t[1]);
    ++count;
    return true;
  });
  CHECK(count == 60);
}
