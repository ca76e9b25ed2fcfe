#include "homord/group.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "homord/errors.hpp"
#include "homord/morphism.hpp"

namespace homord {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<Element> element_orbit(std::span<const Permutation> generators, Element b, std::size_t n) {
  std::vector<char> seen(n, 0);
  std::vector<Element> orbit{b}, queue{b};
  seen[static_cast<std::size_t>(b)] = 1;
  while (!queue.empty()) {
    Element x = queue.back();
    queue.pop_back();
    for (const auto& g : generators) {
      Element y = g[static_cast<std::size_t>(x)];
      if (!seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = 1;
        orbit.push_back(y);
        queue.push_back(y);
      }
    }
  }
  std::sort(orbit.begin(), orbit.end());
  return orbit;
}

std::vector<Permutation> stabilizer_generators(const FinStructure& s, std::span<const Element> fixed,
                                               BigInt* order) {
  const std::size_t n = s.size();
  for (Element f : fixed)
    if (f < 0 || static_cast<std::size_t>(f) >= n) throw PreconditionError("fixed point outside the universe");

  MorphismSearch search(s, s);
  std::vector<Element> base(fixed.begin(), fixed.end());
  std::sort(base.begin(), base.end());
  base.erase(std::unique(base.begin(), base.end()), base.end());
  const std::size_t nfixed = base.size();
  for (std::size_t x = 0; x < n; ++x)
    if (!std::binary_search(base.begin(), base.begin() + static_cast<std::ptrdiff_t>(nfixed), static_cast<Element>(x)))
      base.push_back(static_cast<Element>(x));

  std::vector<Permutation> gens;
  BigInt total = 1;
  const auto& colour = search.from_colours();
  // Deepest base point first, so generators of deeper stabilizers are reused
  // when closing orbits at shallower levels.
  for (std::size_t level = n; level-- > nfixed;) {
    const Element beta = base[level];
    std::vector<std::pair<Element, Element>> forced;
    for (std::size_t j = 0; j < level; ++j) forced.emplace_back(base[j], base[j]);
    std::vector<Element> orbit = element_orbit(gens, beta, n);
    std::vector<char> in_orbit(n, 0);
    for (Element e : orbit) in_orbit[static_cast<std::size_t>(e)] = 1;
    for (std::size_t y = 0; y < n; ++y) {
      if (in_orbit[y] || colour[y] != colour[static_cast<std::size_t>(beta)]) continue;
      if (std::find(base.begin(), base.begin() + static_cast<std::ptrdiff_t>(level), static_cast<Element>(y)) !=
          base.begin() + static_cast<std::ptrdiff_t>(level))
        continue;
      forced.emplace_back(beta, static_cast<Element>(y));
      auto g = search.find_one(forced);
      forced.pop_back();
      if (!g) continue;
      gens.push_back(*g);
      orbit = element_orbit(gens, beta, n);
      std::fill(in_orbit.begin(), in_orbit.end(), 0);
      for (Element e : orbit) in_orbit[static_cast<std::size_t>(e)] = 1;
    }
    total *= orbit.size();
  }
  if (order) *order = total;
  return gens;
}

AutGroup automorphisms(const FinStructure& s, std::size_t bound) {
  AutGroup group;
  group.base = s;
  group.generators = stabilizer_generators(s, {}, &group.order);
  if (group.order <= bound) {
    MorphismSearch search(s, s);
    search.for_each({}, [&](const std::vector<Element>& m) {
      group.elements.push_back(m);
      return true;
    });
    std::sort(group.elements.begin(), group.elements.end());
    group.is_explicit = true;
  }
  return group;
}

int OrbitPartition::block_of(std::span<const Element> t) const {
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (const auto& u : blocks[i])
      if (std::equal(u.begin(), u.end(), t.begin(), t.end())) return static_cast<int>(i);
  return -1;
}

OrbitPartition orbits(const FinStructure& s, std::size_t k, std::span<const Element> fixed, std::size_t tuple_bound) {
  const std::size_t n = s.size();
  if (k > n) throw PreconditionError("k exceeds the structure size");
  // n^k dense index over all k-tuples; distinct ones get slots.
  long double space = 1;
  for (std::size_t i = 0; i < k; ++i) space *= static_cast<long double>(n);
  if (space > static_cast<long double>(tuple_bound))
    throw ResourceError("tuple space n^k = " + std::to_string(static_cast<double>(space)) + " exceeds the bound " +
                        std::to_string(tuple_bound));

  OrbitPartition out;
  out.arity = k;
  out.stabilized_by.assign(fixed.begin(), fixed.end());
  std::sort(out.stabilized_by.begin(), out.stabilized_by.end());

  auto gens = stabilizer_generators(s, fixed);

  std::vector<Tuple> tuples;
  const std::size_t total = static_cast<std::size_t>(space);
  std::vector<std::int64_t> slot(total, -1);
  auto encode = [&](std::span<const Element> t) {
    std::size_t c = 0;
    for (Element e : t) c = c * n + static_cast<std::size_t>(e);
    return c;
  };
  for_each_distinct_tuple(n, k, [&](std::span<const Element> t) {
    slot[encode(t)] = static_cast<std::int64_t>(tuples.size());
    tuples.emplace_back(t.begin(), t.end());
    return true;
  });

  UnionFind uf(tuples.size());
  Tuple image(k);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    for (const auto& g : gens) {
      for (std::size_t j = 0; j < k; ++j) image[j] = g[static_cast<std::size_t>(tuples[i][j])];
      uf.unite(i, static_cast<std::size_t>(slot[encode(image)]));
    }
  }
  std::map<std::size_t, std::vector<Tuple>> grouped;
  for (std::size_t i = 0; i < tuples.size(); ++i) grouped[uf.find(i)].push_back(tuples[i]);
  for (auto& [root, block] : grouped) {
    std::sort(block.begin(), block.end());
    out.blocks.push_back(std::move(block));
  }
  std::sort(out.blocks.begin(), out.blocks.end());
  return out;
}

std::string to_string(AclVerdict v) {
  switch (v) {
    case AclVerdict::algebraic_over_A: return "algebraic-over-A";
    case AclVerdict::growing: return "growing";
    case AclVerdict::undecided: return "undecided";
  }
  return "undecided";
}

AclProfile acl_profile(const StructureChain& chain, std::span<const Element> A, Element b) {
  if (chain.levels.size() < 2) throw PreconditionError("acl profile needs a chain with at least 2 levels");
  const std::size_t first = chain.levels.front().size();
  auto inside = [&](Element e) { return e >= 0 && static_cast<std::size_t>(e) < first; };
  if (!inside(b)) throw PreconditionError("b must lie in the first chain level");
  for (Element a : A)
    if (!inside(a)) throw PreconditionError("A must lie in the first chain level");

  AclProfile profile;
  for (const auto& level : chain.levels) {
    auto gens = stabilizer_generators(level, A);
    auto orbit = element_orbit(gens, b, level.size());
    profile.orbit_sizes.push_back(orbit.size());
    profile.orbits.push_back(std::move(orbit));
  }
  if (std::find(A.begin(), A.end(), b) != A.end()) {
    profile.verdict = AclVerdict::algebraic_over_A;
    return profile;
  }
  // Window: the last two links, or the only link of a two-level chain.
  const std::size_t L = profile.orbit_sizes.size();
  const std::size_t start = L >= 3 ? L - 3 : 0;
  bool increasing = true, constant = true;
  for (std::size_t i = start; i + 1 < L; ++i) {
    increasing = increasing && profile.orbit_sizes[i] < profile.orbit_sizes[i + 1];
    constant = constant && profile.orbits[i] == profile.orbits[i + 1];
  }
  if (increasing)
    profile.verdict = AclVerdict::growing;
  else if (constant)
    profile.verdict = AclVerdict::algebraic_over_A;
  else
    profile.verdict = AclVerdict::undecided;
  return profile;
}

bool Equivalence::is_equality() const {
  return std::all_of(classes.begin(), classes.end(), [](const auto& c) { return c.size() == 1; });
}

std::vector<Equivalence> invariant_equivalences(const FinStructure& s, const std::optional<std::string>& sort,
                                                std::size_t max_pair_orbits) {
  std::vector<Element> domain;
  for (std::size_t x = 0; x < s.size(); ++x)
    if (!sort || s.sort_of(static_cast<Element>(x)) == *sort) domain.push_back(static_cast<Element>(x));
  const std::size_t d = domain.size();
  std::vector<int> pos(s.size(), -1);
  for (std::size_t i = 0; i < d; ++i) pos[static_cast<std::size_t>(domain[i])] = static_cast<int>(i);

  auto gens = stabilizer_generators(s, {});

  // Orbits on ordered off-diagonal pairs of the domain.
  UnionFind pairs(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) continue;
      for (const auto& g : gens) {
        int gi = pos[static_cast<std::size_t>(g[static_cast<std::size_t>(domain[i])])];
        int gj = pos[static_cast<std::size_t>(g[static_cast<std::size_t>(domain[j])])];
        if (gi < 0 || gj < 0) throw PreconditionError("sort is not invariant under the automorphism group");
        pairs.unite(i * d + j, static_cast<std::size_t>(gi) * d + static_cast<std::size_t>(gj));
      }
    }
  std::map<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>> orbit_members;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (i != j) orbit_members[pairs.find(i * d + j)].emplace_back(i, j);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pair_orbits;
  for (auto& [root, members] : orbit_members) pair_orbits.push_back(std::move(members));
  if (pair_orbits.size() > max_pair_orbits)
    throw ResourceError(std::to_string(pair_orbits.size()) + " pair orbits exceed the bound of " +
                        std::to_string(max_pair_orbits));

  // Close every union of pair orbits to the equivalence it generates.
  std::set<std::vector<std::size_t>> seen;
  std::vector<Equivalence> out;
  const std::size_t r = pair_orbits.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << r); ++mask) {
    UnionFind uf(d);
    for (std::size_t o = 0; o < r; ++o)
      if (mask >> o & 1)
        for (const auto& [i, j] : pair_orbits[o]) uf.unite(i, j);
    std::vector<std::size_t> label(d);
    for (std::size_t i = 0; i < d; ++i) label[i] = uf.find(i);
    if (!seen.insert(label).second) continue;
    std::map<std::size_t, std::vector<Element>> classes;
    for (std::size_t i = 0; i < d; ++i) classes[label[i]].push_back(domain[i]);
    Equivalence e;
    for (auto& [root, cls] : classes) e.classes.push_back(std::move(cls));
    std::sort(e.classes.begin(), e.classes.end());
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const Equivalence& a, const Equivalence& b) {
    if (a.classes.size() != b.classes.size()) return a.classes.size() > b.classes.size();
    return a.classes < b.classes;
  });
  return out;
}

}  // namespace homord
