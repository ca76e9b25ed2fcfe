#include "homord/builders.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "homord/errors.hpp"
#include "homord/rng.hpp"

namespace homord {

namespace {

using Matrix = std::vector<std::vector<char>>;

Signature graph_signature() { return Signature({{"E", 2, true, true}}); }

Matrix adjacency(const FinStructure& s, std::size_t rel) {
  Matrix m(s.size(), std::vector<char>(s.size(), 0));
  for (const auto& t : s.tuples(rel)) m[static_cast<std::size_t>(t[0])][static_cast<std::size_t>(t[1])] = 1;
  return m;
}

FinStructure from_matrix(const Signature& sig, const Matrix& m) {
  RelationTables tables;
  auto& rows = tables[sig[0].name];
  for (std::size_t a = 0; a < m.size(); ++a)
    for (std::size_t b = 0; b < m.size(); ++b)
      if (m[a][b]) rows.push_back({static_cast<Element>(a), static_cast<Element>(b)});
  return make_structure(sig, m.size(), tables);
}

// True when `members` contains a clique of the given size in `m`.
bool has_clique(const Matrix& m, const std::vector<std::size_t>& members, std::size_t size) {
  if (size == 0) return true;
  std::vector<std::size_t> chosen;
  std::function<bool(std::size_t)> grow = [&](std::size_t from) {
    if (chosen.size() == size) return true;
    for (std::size_t i = from; i < members.size(); ++i) {
      std::size_t v = members[i];
      if (std::all_of(chosen.begin(), chosen.end(), [&](std::size_t u) { return m[u][v]; })) {
        chosen.push_back(v);
        if (grow(i + 1)) return true;
        chosen.pop_back();
      }
    }
    return false;
  };
  return grow(0);
}

bool linear_order_violation(const FinStructure& s, std::size_t rel, std::string& why) {
  const std::size_t n = s.size();
  auto lt = adjacency(s, rel);
  for (std::size_t a = 0; a < n; ++a) {
    if (lt[a][a]) return why = "order is not irreflexive", true;
    for (std::size_t b = a + 1; b < n; ++b)
      if (lt[a][b] == lt[b][a]) return why = "order is not total and antisymmetric", true;
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (lt[a][b])
        for (std::size_t c = 0; c < n; ++c)
          if (lt[b][c] && !lt[a][c]) return why = "order is not transitive", true;
  return false;
}

// Witness patterns: bit i of a pattern says how the witness relates to U[i].
// Graphs: adjacent. Tournaments: U[i] -> w. Pure sets: no bits (pattern 0).
std::uint64_t witness_pattern(const FraisseClassSpec& spec, const Matrix& m, const std::vector<std::size_t>& U,
                              std::size_t w) {
  std::uint64_t p = 0;
  if (spec.kind() == ClassKind::pure_set) return 0;
  for (std::size_t i = 0; i < U.size(); ++i) {
    bool bit = spec.kind() == ClassKind::tournament ? m[U[i]][w] : m[w][U[i]];
    if (bit) p |= std::uint64_t{1} << i;
  }
  return p;
}

// Patterns that a consistent instance over U may demand.
std::vector<std::uint64_t> required_patterns(const FraisseClassSpec& spec, const Matrix& m,
                                             const std::vector<std::size_t>& U) {
  if (spec.kind() == ClassKind::pure_set) return {0};
  std::vector<std::uint64_t> out;
  const std::uint64_t all = std::uint64_t{1} << U.size();
  for (std::uint64_t mask = 0; mask < all; ++mask) {
    if (spec.kind() == ClassKind::kn_free_graph) {
      std::vector<std::size_t> A;
      for (std::size_t i = 0; i < U.size(); ++i)
        if (mask >> i & 1) A.push_back(U[i]);
      if (has_clique(m, A, static_cast<std::size_t>(spec.param() - 1))) continue;
    }
    out.push_back(mask);
  }
  return out;
}

template <typename Visit>
void for_each_subset(std::size_t n, std::size_t k, Visit&& visit) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    visit(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

struct Instance {
  std::vector<std::size_t> U;
  std::uint64_t pattern;
};

// Unsatisfied instances over the prefix with |U| = size, witnesses in [0, m.size()).
void collect_unsatisfied(const FraisseClassSpec& spec, const Matrix& m, std::size_t prefix, std::size_t size,
                         std::vector<Instance>* out, bool* all_ok) {
  for_each_subset(prefix, size, [&](const std::vector<std::size_t>& U) {
    std::set<std::uint64_t> realized;
    for (std::size_t w = 0; w < m.size(); ++w) {
      if (std::find(U.begin(), U.end(), w) != U.end()) continue;
      realized.insert(witness_pattern(spec, m, U, w));
    }
    for (auto p : required_patterns(spec, m, U)) {
      if (realized.count(p)) continue;
      if (all_ok) *all_ok = false;
      if (out) out->push_back({U, p});
    }
  });
}

std::size_t relation_for_witnesses(const FraisseClassSpec& spec) {
  (void)spec;
  return 0;
}

Matrix matrix_of(const FraisseClassSpec& spec, const FinStructure& s) {
  if (spec.kind() == ClassKind::pure_set) return Matrix(s.size(), std::vector<char>(s.size(), 0));
  return adjacency(s, relation_for_witnesses(spec));
}

bool is_prime(int q) {
  if (q < 2) return false;
  for (int d = 2; d * d <= q; ++d)
    if (q % d == 0) return false;
  return true;
}

}  // namespace

FraisseClassSpec FraisseClassSpec::make(ClassKind kind, int param) {
  FraisseClassSpec spec;
  spec.kind_ = kind;
  spec.param_ = param;
  switch (kind) {
    case ClassKind::pure_set: spec.signature_ = Signature(); break;
    case ClassKind::graph: spec.signature_ = graph_signature(); break;
    case ClassKind::kn_free_graph:
      if (param < 3) throw ValidationError("kn_free_graph needs n >= 3");
      spec.signature_ = graph_signature();
      break;
    case ClassKind::tournament: spec.signature_ = Signature({{"E", 2, false, true}}); break;
    case ClassKind::linear_order: spec.signature_ = Signature({{"lt", 2, false, true}}); break;
    case ClassKind::two_predicate_PQ: spec.signature_ = Signature({{"P", 1}, {"Q", 1}}); break;
    case ClassKind::bipartite_deg2:
      spec.signature_ = Signature({{"S0", 1}, {"S1", 1}, {"R", 2, true, true}});
      break;
    case ClassKind::involution_order:
      spec.signature_ = Signature({{"lt", 2, false, true}, {"F", 2, true, true}});
      break;
    case ClassKind::f2_vector_space:
      if (param < 1) throw ValidationError("f2_vector_space needs d >= 1");
      if (param > 16) throw ValidationError("f2_vector_space: d too large (max 16)");
      spec.signature_ = Signature({{"Z", 1}, {"S", 3}});
      break;
  }
  return spec;
}

FraisseClassSpec FraisseClassSpec::parse(std::string_view text) {
  std::string name(text);
  int param = 0;
  if (auto colon = name.find(':'); colon != std::string::npos) {
    param = std::stoi(name.substr(colon + 1));
    name = name.substr(0, colon);
  }
  static const std::map<std::string, ClassKind> kinds = {
      {"pure_set", ClassKind::pure_set},
      {"graph", ClassKind::graph},
      {"kn_free_graph", ClassKind::kn_free_graph},
      {"tournament", ClassKind::tournament},
      {"linear_order", ClassKind::linear_order},
      {"two_predicate_PQ", ClassKind::two_predicate_PQ},
      {"bipartite_deg2", ClassKind::bipartite_deg2},
      {"involution_order", ClassKind::involution_order},
      {"f2_vector_space", ClassKind::f2_vector_space},
  };
  auto it = kinds.find(name);
  if (it == kinds.end()) throw ValidationError("unknown class '" + name + "'");
  return make(it->second, param);
}

std::string FraisseClassSpec::name() const {
  switch (kind_) {
    case ClassKind::pure_set: return "pure_set";
    case ClassKind::graph: return "graph";
    case ClassKind::kn_free_graph: return "kn_free_graph:" + std::to_string(param_);
    case ClassKind::tournament: return "tournament";
    case ClassKind::linear_order: return "linear_order";
    case ClassKind::two_predicate_PQ: return "two_predicate_PQ";
    case ClassKind::bipartite_deg2: return "bipartite_deg2";
    case ClassKind::involution_order: return "involution_order";
    case ClassKind::f2_vector_space: return "f2_vector_space:" + std::to_string(param_);
  }
  return "?";
}

bool FraisseClassSpec::witnessable() const {
  return kind_ == ClassKind::pure_set || kind_ == ClassKind::graph || kind_ == ClassKind::kn_free_graph ||
         kind_ == ClassKind::tournament;
}

bool FraisseClassSpec::hereditary() const {
  return kind_ != ClassKind::bipartite_deg2 && kind_ != ClassKind::involution_order &&
         kind_ != ClassKind::f2_vector_space;
}

std::optional<std::string> FraisseClassSpec::violation(const FinStructure& s) const {
  if (!(s.signature() == signature_)) return "signature does not match class " + name();
  const std::size_t n = s.size();
  std::string why;
  switch (kind_) {
    case ClassKind::pure_set: break;
    case ClassKind::graph:
    case ClassKind::kn_free_graph: {
      auto m = adjacency(s, 0);
      for (std::size_t a = 0; a < n; ++a) {
        if (m[a][a]) return "graph has a loop";
        for (std::size_t b = 0; b < n; ++b)
          if (m[a][b] != m[b][a]) return "graph edge relation is not symmetric";
      }
      if (kind_ == ClassKind::kn_free_graph) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        if (has_clique(m, all, static_cast<std::size_t>(param_))) return "graph contains K_" + std::to_string(param_);
      }
      break;
    }
    case ClassKind::tournament: {
      auto m = adjacency(s, 0);
      for (std::size_t a = 0; a < n; ++a) {
        if (m[a][a]) return "tournament has a loop";
        for (std::size_t b = a + 1; b < n; ++b)
          if (m[a][b] == m[b][a]) return "tournament pair without exactly one arc";
      }
      break;
    }
    case ClassKind::linear_order:
      if (linear_order_violation(s, 0, why)) return why;
      break;
    case ClassKind::two_predicate_PQ:
      for (std::size_t a = 0; a < n; ++a)
        if (s.holds(0, static_cast<Element>(a)) && s.holds(1, static_cast<Element>(a))) return "P and Q intersect";
      break;
    case ClassKind::bipartite_deg2: {
      for (std::size_t a = 0; a < n; ++a) {
        const bool s0 = s.holds(0, static_cast<Element>(a)), s1 = s.holds(1, static_cast<Element>(a));
        if (s0 == s1) return "element " + std::to_string(a) + " is not in exactly one of S0, S1";
        if (s.has_sorts() && s.sort_of(static_cast<Element>(a)) != (s0 ? "S0" : "S1"))
          return "sort label disagrees with S0/S1";
      }
      auto r = adjacency(s, 2);
      for (std::size_t a = 0; a < n; ++a) {
        std::size_t degree = 0;
        for (std::size_t b = 0; b < n; ++b) {
          if (!r[a][b]) continue;
          if (s.holds(0, static_cast<Element>(a)) == s.holds(0, static_cast<Element>(b)))
            return "edge inside one side of the bipartition";
          ++degree;
        }
        if (s.holds(0, static_cast<Element>(a)) && degree != 2)
          return "S0 element " + std::to_string(a) + " has degree " + std::to_string(degree);
      }
      break;
    }
    case ClassKind::involution_order: {
      if (linear_order_violation(s, 0, why)) return why;
      auto f = adjacency(s, 1);
      for (std::size_t a = 0; a < n; ++a) {
        std::size_t partners = 0;
        for (std::size_t b = 0; b < n; ++b) partners += f[a][b] ? 1 : 0;
        if (partners != 1) return "F is not a fixed-point-free involution at " + std::to_string(a);
      }
      if (s.has_sorts()) {
        for (std::size_t a = 0; a < n; ++a) {
          Element fa = involution_partner(s, static_cast<Element>(a));
          const bool in_m = s.holds(0, fa, static_cast<Element>(a));
          if (s.sort_of(static_cast<Element>(a)) != (in_m ? "M" : "M'")) return "M/M' sort labels are wrong";
        }
      }
      break;
    }
    case ClassKind::f2_vector_space: {
      std::vector<Element> zeros;
      for (std::size_t a = 0; a < n; ++a)
        if (s.holds(0, static_cast<Element>(a))) zeros.push_back(static_cast<Element>(a));
      if (n == 0) break;
      if (zeros.size() != 1) return "Z must name exactly one element";
      std::vector<std::vector<Element>> sum(n, std::vector<Element>(n, -1));
      for (const auto& t : s.tuples(1)) {
        auto& cell = sum[static_cast<std::size_t>(t[0])][static_cast<std::size_t>(t[1])];
        if (cell >= 0) return "S is not functional";
        cell = t[2];
      }
      const Element z = zeros[0];
      for (std::size_t a = 0; a < n; ++a) {
        if (sum[a][static_cast<std::size_t>(z)] != static_cast<Element>(a)) return "zero is not neutral";
        if (sum[a][a] != z) return "a + a != 0";
        for (std::size_t b = 0; b < n; ++b) {
          if (sum[a][b] < 0) return "S is not total";
          if (sum[a][b] != sum[b][a]) return "addition is not commutative";
        }
      }
      if (n <= 256) {
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c)
              if (sum[static_cast<std::size_t>(sum[a][b])][c] != sum[a][static_cast<std::size_t>(sum[b][c])])
                return "addition is not associative";
      }
      break;
    }
  }
  return std::nullopt;
}

int relative_saturation_depth(const FraisseClassSpec& spec, const FinStructure& s, std::size_t prefix,
                              int max_depth) {
  if (!spec.witnessable()) return -1;
  if (spec.kind() == ClassKind::pure_set) return max_depth;
  const Matrix m = matrix_of(spec, s);
  for (int depth = 1; depth <= max_depth; ++depth) {
    bool ok = true;
    collect_unsatisfied(spec, m, prefix, static_cast<std::size_t>(depth), nullptr, &ok);
    if (!ok) return depth - 1;
  }
  return max_depth;
}

int saturation_depth(const FraisseClassSpec& spec, const FinStructure& s, int max_depth) {
  return relative_saturation_depth(spec, s, s.size(), max_depth);
}

StructureChain build_generic(const FraisseClassSpec& spec, int t, std::size_t cap, std::uint64_t seed) {
  if (!spec.witnessable())
    throw PreconditionError("build_generic supports pure_set, graph, kn_free_graph and tournament, not " +
                            spec.name());
  if (t < 1) throw PreconditionError("saturation level must be >= 1");
  StructureChain chain;
  chain.class_name = spec.name();
  chain.seed = seed;

  if (spec.kind() == ClassKind::pure_set) {
    if (cap == 0) throw PreconditionError("cap must be positive");
    std::vector<std::size_t> sizes;
    if (cap >= 2) sizes.push_back((cap + 1) / 2);
    sizes.push_back(cap);
    for (auto n : sizes) {
      chain.levels.push_back(make_structure(Signature(), n, {}));
      chain.saturation.push_back(t);
      chain.relative_saturation.push_back(chain.levels.size() == 1 ? 0 : t);
    }
    return chain;
  }
  if (cap < 2) throw SaturationInfeasible("saturation infeasible at cap " + std::to_string(cap));

  Rng rng(derive_seed(seed, 0));
  const bool tournament = spec.kind() == ClassKind::tournament;
  const bool kn_free = spec.kind() == ClassKind::kn_free_graph;
  const auto clique = static_cast<std::size_t>(spec.param());

  Matrix m(2, std::vector<char>(2, 0));
  if (tournament) {
    const bool fwd = coin(rng);
    m[0][1] = fwd;
    m[1][0] = !fwd;
  } else {
    m[0][1] = m[1][0] = coin(rng);
  }

  auto set_edge = [&](std::size_t w, std::size_t v, bool bit) {
    if (tournament) {
      m[v][w] = bit;
      m[w][v] = !bit;
    } else {
      m[v][w] = m[w][v] = bit;
    }
  };
  // Would w ~ v complete a K_n inside the current graph?
  auto closes_clique = [&](std::size_t w, std::size_t v) {
    std::vector<std::size_t> common;
    for (std::size_t u = 0; u < m.size(); ++u)
      if (u != v && u != w && m[w][u] && m[v][u]) common.push_back(u);
    return has_clique(m, common, clique - 2);
  };

  while (true) {
    FinStructure level = from_matrix(spec.signature(), m);
    const std::size_t prev = chain.levels.empty() ? 0 : chain.levels.back().size();
    chain.saturation.push_back(saturation_depth(spec, level, t));
    chain.relative_saturation.push_back(prev == 0 ? 0 : relative_saturation_depth(spec, level, prev, t));
    chain.levels.push_back(std::move(level));
    if (chain.saturation.back() >= t) break;

    std::vector<Instance> pending;
    for (int depth = 1; depth <= t; ++depth)
      collect_unsatisfied(spec, m, m.size(), static_cast<std::size_t>(depth), &pending, nullptr);
    shuffle(std::span<Instance>(pending), rng);
    for (const auto& inst : pending) {
      bool satisfied = false;
      for (std::size_t w = 0; w < m.size() && !satisfied; ++w)
        if (std::find(inst.U.begin(), inst.U.end(), w) == inst.U.end())
          satisfied = witness_pattern(spec, m, inst.U, w) == inst.pattern;
      if (satisfied) continue;
      if (m.size() >= cap)
        throw SaturationInfeasible("saturation infeasible at cap " + std::to_string(cap) + " (reached depth " +
                                   std::to_string(chain.saturation.back()) + ")");
      const std::size_t w = m.size();
      for (auto& row : m) row.push_back(0);
      m.emplace_back(w + 1, 0);
      std::vector<char> forced(w, 0);
      for (std::size_t i = 0; i < inst.U.size(); ++i) {
        set_edge(w, inst.U[i], inst.pattern >> i & 1);
        forced[inst.U[i]] = 1;
      }
      for (std::size_t v = 0; v < w; ++v) {
        if (forced[v]) continue;
        bool bit = coin(rng);
        if (kn_free && bit && closes_clique(w, v)) bit = false;
        set_edge(w, v, bit);
      }
    }
  }
  validate_chain(chain);
  for (const auto& level : chain.levels)
    if (auto why = spec.violation(level)) throw std::logic_error("built level violates the class: " + *why);
  return chain;
}

void validate_chain(const StructureChain& chain) {
  for (std::size_t i = 1; i < chain.levels.size(); ++i) {
    const auto& lo = chain.levels[i - 1];
    const auto& hi = chain.levels[i];
    if (lo.size() > hi.size()) throw ValidationError("chain levels must grow");
    std::vector<Element> prefix(lo.size());
    std::iota(prefix.begin(), prefix.end(), 0);
    if (!(induced_substructure(hi, prefix) == lo))
      throw ValidationError("level " + std::to_string(i - 1) + " is not the prefix substructure of level " +
                            std::to_string(i));
  }
}

FinStructure build_paley_graph(int q) {
  if (!is_prime(q) || q % 4 != 1) throw PreconditionError("Paley graph needs a prime q = 1 mod 4");
  std::vector<char> square(static_cast<std::size_t>(q), 0);
  for (int x = 1; x < q; ++x) square[static_cast<std::size_t>(x * x % q)] = 1;
  Matrix m(static_cast<std::size_t>(q), std::vector<char>(static_cast<std::size_t>(q), 0));
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      if (a != b) m[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = square[static_cast<std::size_t>((a - b + q) % q)];
  return from_matrix(graph_signature(), m);
}

StructureChain build_paley_chain() {
  FinStructure small = build_paley_graph(5);
  FinStructure big = build_paley_graph(13);
  auto embedding = find_embedding(small, big);
  if (!embedding) throw std::logic_error("P(5) does not embed in P(13)");
  std::vector<Element> new_of_old(big.size(), -1);
  Element next = 0;
  for (Element e : *embedding) new_of_old[static_cast<std::size_t>(e)] = next++;
  for (auto& x : new_of_old)
    if (x < 0) x = next++;
  StructureChain chain;
  chain.class_name = "graph";
  chain.levels = {small, relabel(big, new_of_old)};
  auto spec = FraisseClassSpec::make(ClassKind::graph);
  for (std::size_t i = 0; i < chain.levels.size(); ++i) {
    chain.saturation.push_back(saturation_depth(spec, chain.levels[i], 3));
    chain.relative_saturation.push_back(
        i == 0 ? 0 : relative_saturation_depth(spec, chain.levels[i], chain.levels[i - 1].size(), 3));
  }
  validate_chain(chain);
  return chain;
}

FinStructure build_linear_order(std::size_t n) {
  RelationTables tables;
  auto& lt = tables["lt"];
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) lt.push_back({static_cast<Element>(a), static_cast<Element>(b)});
  return make_structure(FraisseClassSpec::make(ClassKind::linear_order).signature(), n, tables);
}

FinStructure build_two_predicate_PQ(std::size_t sizeP, std::size_t sizeQ) {
  RelationTables tables;
  for (std::size_t a = 0; a < sizeP; ++a) tables["P"].push_back({static_cast<Element>(a)});
  for (std::size_t a = sizeP; a < sizeP + sizeQ; ++a) tables["Q"].push_back({static_cast<Element>(a)});
  return make_structure(FraisseClassSpec::make(ClassKind::two_predicate_PQ).signature(), sizeP + sizeQ, tables);
}

FinStructure build_bipartite_deg2(std::size_t mSize, std::uint64_t seed) {
  if (mSize < 1) throw PreconditionError("bipartite_deg2 needs mSize >= 1");
  Rng rng(derive_seed(seed, 1));
  std::size_t points = 0;  // S1 points, numbered 0.. in creation order
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::vector<std::pair<std::size_t, std::size_t>> neighbours;
  for (std::size_t i = 0; i < mSize; ++i) {
    std::vector<std::pair<std::size_t, std::size_t>> open;
    for (std::size_t a = 0; a < points; ++a)
      for (std::size_t b = a + 1; b < points; ++b)
        if (!used.count({a, b})) open.emplace_back(a, b);
    std::pair<std::size_t, std::size_t> pair;
    if (!open.empty()) {
      pair = open[uniform_index(rng, open.size())];
    } else if (points < 2) {
      points = 2;
      pair = {0, 1};
    } else {
      pair = {uniform_index(rng, points), points};
      ++points;
    }
    used.insert(pair);
    neighbours.push_back(pair);
  }
  const std::size_t n = mSize + points;
  RelationTables tables;
  std::vector<std::string> sorts(n);
  for (std::size_t a = 0; a < mSize; ++a) {
    tables["S0"].push_back({static_cast<Element>(a)});
    sorts[a] = "S0";
    for (auto p : {neighbours[a].first, neighbours[a].second}) {
      const auto b = static_cast<Element>(mSize + p);
      tables["R"].push_back({static_cast<Element>(a), b});
      tables["R"].push_back({b, static_cast<Element>(a)});
    }
  }
  for (std::size_t b = mSize; b < n; ++b) {
    tables["S1"].push_back({static_cast<Element>(b)});
    sorts[b] = "S1";
  }
  return make_structure(FraisseClassSpec::make(ClassKind::bipartite_deg2).signature(), n, tables, std::move(sorts));
}

BipartiteAudit audit_bipartite(const FinStructure& s) {
  BipartiteAudit audit;
  const std::size_t n = s.size();
  const auto S0 = s.signature().index_of("S0"), S1 = s.signature().index_of("S1"), R = s.signature().index_of("R");
  std::vector<std::vector<Element>> nbrs(n);
  for (std::size_t a = 0; a < n; ++a) {
    const bool s0 = s.holds(S0, static_cast<Element>(a)), s1 = s.holds(S1, static_cast<Element>(a));
    if (s0 == s1) audit.sorts_ok = false;
    for (std::size_t b = 0; b < n; ++b) {
      if (!s.holds(R, static_cast<Element>(a), static_cast<Element>(b))) continue;
      if (s.holds(S0, static_cast<Element>(b)) == s0) audit.bipartite = false;
      nbrs[a].push_back(static_cast<Element>(b));
    }
  }
  std::set<std::vector<Element>> pairs;
  std::vector<Element> s1s;
  for (std::size_t a = 0; a < n; ++a) {
    if (s.holds(S1, static_cast<Element>(a))) s1s.push_back(static_cast<Element>(a));
    if (!s.holds(S0, static_cast<Element>(a))) continue;
    if (nbrs[a].size() != 2) audit.degrees_two = false;
    if (!pairs.insert(nbrs[a]).second) audit.pairs_distinct = false;
  }
  for (std::size_t i = 0; i < s1s.size(); ++i)
    for (std::size_t j = i + 1; j < s1s.size(); ++j)
      if (!pairs.count({s1s[i], s1s[j]})) audit.pair_saturated = false;
  return audit;
}

SortView bipartite_m_view(const FinStructure& s) {
  const auto S0 = s.signature().index_of("S0"), R = s.signature().index_of("R");
  SortView out;
  for (std::size_t a = 0; a < s.size(); ++a)
    if (s.holds(S0, static_cast<Element>(a))) out.to_parent.push_back(static_cast<Element>(a));
  const std::size_t m = out.to_parent.size();
  std::vector<std::set<Element>> nbrs(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t b = 0; b < s.size(); ++b)
      if (s.holds(R, out.to_parent[i], static_cast<Element>(b))) nbrs[i].insert(static_cast<Element>(b));
  RelationTables tables;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      std::size_t shared = 0;
      for (Element e : nbrs[i]) shared += nbrs[j].count(e);
      tables["share" + std::to_string(std::min<std::size_t>(shared, 2))].push_back(
          {static_cast<Element>(i), static_cast<Element>(j)});
    }
  Signature sig({{"share0", 2, true, true}, {"share1", 2, true, true}, {"share2", 2, true, true}});
  out.view = make_structure(sig, m, tables);
  return out;
}

namespace {

// rank[x] = position of x in the order; partner[x] = f(x).
FinStructure involution_structure(const std::vector<std::size_t>& rank, const std::vector<std::size_t>& partner) {
  const std::size_t n = rank.size();
  RelationTables tables;
  std::vector<std::string> sorts(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b)
      if (rank[a] < rank[b]) tables["lt"].push_back({static_cast<Element>(a), static_cast<Element>(b)});
    tables["F"].push_back({static_cast<Element>(a), static_cast<Element>(partner[a])});
    sorts[a] = rank[partner[a]] < rank[a] ? "M" : "M'";
  }
  return make_structure(FraisseClassSpec::make(ClassKind::involution_order).signature(), n, tables,
                        std::move(sorts));
}

}  // namespace

FinStructure build_involution_order(std::size_t pairs, std::uint64_t seed) {
  if (pairs < 1) throw PreconditionError("involution_order needs pairs >= 1");
  Rng rng(derive_seed(seed, 2));
  const std::size_t n = 2 * pairs;
  std::vector<std::size_t> rank(n), ids(n), partner(n);
  std::iota(rank.begin(), rank.end(), 0);
  std::iota(ids.begin(), ids.end(), 0);
  shuffle(std::span<std::size_t>(ids), rng);
  for (std::size_t i = 0; i < n; i += 2) {
    partner[ids[i]] = ids[i + 1];
    partner[ids[i + 1]] = ids[i];
  }
  return involution_structure(rank, partner);
}

StructureChain build_involution_chain(const std::vector<std::size_t>& pair_counts, std::uint64_t seed) {
  if (pair_counts.empty() || pair_counts.front() < 1) throw PreconditionError("chain needs pair counts >= 1");
  for (std::size_t i = 1; i < pair_counts.size(); ++i)
    if (pair_counts[i] < pair_counts[i - 1]) throw PreconditionError("pair counts must be non-decreasing");
  Rng rng(derive_seed(seed, 3));
  StructureChain chain;
  chain.class_name = "involution_order";
  chain.seed = seed;
  std::vector<std::size_t> sequence;  // ids from least to greatest
  std::vector<std::size_t> partner;
  for (std::size_t target : pair_counts) {
    while (partner.size() < 2 * target) {
      const std::size_t a = partner.size(), b = a + 1;
      partner.push_back(b);
      partner.push_back(a);
      for (std::size_t x : {a, b}) {
        auto at = uniform_index(rng, sequence.size() + 1);
        sequence.insert(sequence.begin() + static_cast<std::ptrdiff_t>(at), x);
      }
    }
    std::vector<std::size_t> rank(sequence.size());
    for (std::size_t i = 0; i < sequence.size(); ++i) rank[sequence[i]] = i;
    chain.levels.push_back(involution_structure(rank, partner));
    chain.saturation.push_back(-1);
    chain.relative_saturation.push_back(-1);
  }
  validate_chain(chain);
  return chain;
}

Element involution_partner(const FinStructure& s, Element a) {
  const auto F = s.signature().index_of("F");
  for (std::size_t b = 0; b < s.size(); ++b)
    if (s.holds(F, a, static_cast<Element>(b))) return static_cast<Element>(b);
  throw ValidationError("element " + std::to_string(a) + " has no partner");
}

std::string involution_configuration(const FinStructure& s, Element a, Element b) {
  const auto lt = s.signature().index_of("lt");
  std::vector<std::pair<Element, std::string>> items = {
      {a, "a"}, {involution_partner(s, a), "fa"}, {b, "b"}, {involution_partner(s, b), "fb"}};
  std::sort(items.begin(), items.end(),
            [&](const auto& x, const auto& y) { return s.holds(lt, x.first, y.first); });
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "<" : "") + items[i].second;
  return out;
}

std::optional<std::pair<Element, Element>> find_interleaved_pair(const FinStructure& s) {
  auto M = s.elements_of_sort("M");
  for (Element a : M)
    for (Element b : M)
      if (a != b && involution_configuration(s, a, b) == "fa<fb<a<b") return std::make_pair(a, b);
  return std::nullopt;
}

SortView involution_m_view(const FinStructure& s) {
  const auto lt = s.signature().index_of("lt");
  SortView out;
  out.to_parent = s.elements_of_sort("M");
  const std::size_t m = out.to_parent.size();
  std::vector<Element> f(m);
  for (std::size_t i = 0; i < m; ++i) f[i] = involution_partner(s, out.to_parent[i]);
  RelationTables tables;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const Element a = out.to_parent[i], b = out.to_parent[j];
      const Tuple ij = {static_cast<Element>(i), static_cast<Element>(j)};
      if (s.holds(lt, a, b)) tables["lt"].push_back(ij);
      if (s.holds(lt, f[i], b)) tables["flt"].push_back(ij);
      if (s.holds(lt, a, f[j])) tables["ltf"].push_back(ij);
      if (s.holds(lt, f[i], f[j])) tables["ff"].push_back(ij);
    }
  Signature sig({{"lt", 2}, {"flt", 2}, {"ltf", 2}, {"ff", 2}});
  out.view = make_structure(sig, m, tables);
  return out;
}

FinStructure build_f2_vector_space(int d) {
  auto spec = FraisseClassSpec::make(ClassKind::f2_vector_space, d);
  if (d > 12)
    throw ResourceError("f2_vector_space: the addition table for d = " + std::to_string(d) +
                        " has 2^" + std::to_string(2 * d) + " tuples; materialized tables support d <= 12");
  const std::size_t n = std::size_t{1} << d;
  RelationTables tables;
  tables["Z"].push_back({0});
  auto& sum = tables["S"];
  sum.reserve(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      sum.push_back({static_cast<Element>(a), static_cast<Element>(b), static_cast<Element>(a ^ b)});
  return make_structure(spec.signature(), n, tables);
}

}  // namespace homord
