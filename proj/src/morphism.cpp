#include "homord/morphism.hpp"

#include <algorithm>
#include <bit>
#include <map>

namespace homord {

namespace {

using Key = std::vector<std::int64_t>;

}  // namespace

MorphismSearch::MorphismSearch(const FinStructure& from, const FinStructure& to) : from_(from), to_(to) {
  n_ = from.size();
  if (!(from.signature() == to.signature()) || from.size() != to.size()) {
    compatible_ = false;
    return;
  }
  const auto& sig = from.signature();
  for (std::size_t r = 0; r < sig.size(); ++r) {
    if (from.table(r).size() != to.table(r).size()) compatible_ = false;
    if (sig[r].arity == 2) binary_.push_back(r);
    if (sig[r].arity >= 3) high_.push_back(r);
  }
  if (!compatible_) return;

  auto rows = [&](const FinStructure& s, std::vector<std::vector<Bits>>& out, std::vector<std::vector<Bits>>& in) {
    out.assign(binary_.size(), std::vector<Bits>(n_, Bits(n_)));
    in.assign(binary_.size(), std::vector<Bits>(n_, Bits(n_)));
    for (std::size_t b = 0; b < binary_.size(); ++b) {
      for (auto code : s.table(binary_[b]).codes()) {
        auto x = static_cast<std::size_t>(code / n_), y = static_cast<std::size_t>(code % n_);
        out[b][x].set(y);
        in[b][y].set(x);
      }
    }
  };
  rows(from, from_out_, from_in_);
  rows(to, to_out_, to_in_);

  auto incidence = [&](const FinStructure& s, std::vector<std::vector<Incidence>>& inc) {
    inc.assign(n_, {});
    for (auto r : high_) {
      for (auto code : s.table(r).codes()) {
        Tuple t = s.table(r).decode(code);
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        for (Element e : t) inc[static_cast<std::size_t>(e)].push_back({r, code});
      }
    }
  };
  incidence(from, from_incident_);
  incidence(to, to_incident_);

  // Initial colours: sort label, unary membership, loops and degrees.
  auto initial_key = [&](const FinStructure& s, const std::vector<std::vector<Bits>>& out,
                         const std::vector<std::vector<Bits>>& in, Element x) {
    Key k;
    for (char c : s.sort_of(x)) k.push_back(c);
    k.push_back(-1);
    for (std::size_t r = 0; r < sig.size(); ++r)
      if (sig[r].arity == 1) k.push_back(s.holds(r, x) ? 1 : 0);
    for (std::size_t b = 0; b < binary_.size(); ++b) {
      auto ux = static_cast<std::size_t>(x);
      k.push_back(out[b][ux].test(ux) ? 1 : 0);
      std::int64_t od = 0, id = 0;
      for (auto w : out[b][ux].w) od += std::popcount(w);
      for (auto w : in[b][ux].w) id += std::popcount(w);
      k.push_back(od);
      k.push_back(id);
    }
    for (auto r : high_) {
      std::vector<std::int64_t> per_pos(static_cast<std::size_t>(sig[r].arity), 0);
      for (auto code : s.table(r).codes()) {
        Tuple t = s.table(r).decode(code);
        for (std::size_t i = 0; i < t.size(); ++i)
          if (t[i] == x) ++per_pos[i];
      }
      k.insert(k.end(), per_pos.begin(), per_pos.end());
    }
    return k;
  };

  colour_from_.assign(n_, 0);
  colour_to_.assign(n_, 0);
  {
    std::map<Key, int> names;
    std::vector<Key> kf(n_), kt(n_);
    for (std::size_t x = 0; x < n_; ++x) {
      kf[x] = initial_key(from, from_out_, from_in_, static_cast<Element>(x));
      kt[x] = initial_key(to, to_out_, to_in_, static_cast<Element>(x));
      names.emplace(kf[x], 0);
      names.emplace(kt[x], 0);
    }
    int next = 0;
    for (auto& [k, v] : names) v = next++;
    for (std::size_t x = 0; x < n_; ++x) {
      colour_from_[x] = names[kf[x]];
      colour_to_[x] = names[kt[x]];
    }
  }

  // Joint refinement by the multiset of (neighbour colour, adjacency pattern).
  auto refine_key = [&](const std::vector<int>& colour, const std::vector<std::vector<Bits>>& out,
                        const std::vector<std::vector<Bits>>& in, std::size_t x) {
    std::vector<std::int64_t> items;
    items.reserve(n_);
    for (std::size_t y = 0; y < n_; ++y) {
      if (y == x) continue;
      std::int64_t pattern = 0;
      for (std::size_t b = 0; b < binary_.size(); ++b) {
        pattern = pattern << 2 | (out[b][x].test(y) ? 1 : 0) << 1 | (in[b][x].test(y) ? 1 : 0);
      }
      items.push_back(static_cast<std::int64_t>(colour[y]) << 40 | pattern);
    }
    std::sort(items.begin(), items.end());
    Key k{colour[x]};
    k.insert(k.end(), items.begin(), items.end());
    return k;
  };

  if (!binary_.empty() && binary_.size() <= 16) {
    auto count_colours = [](const std::vector<int>& c) {
      return static_cast<std::size_t>(*std::max_element(c.begin(), c.end()) + 1);
    };
    std::size_t classes = n_ ? count_colours(colour_from_) : 0;
    for (std::size_t round = 0; round < n_; ++round) {
      std::map<Key, int> names;
      std::vector<Key> kf(n_), kt(n_);
      for (std::size_t x = 0; x < n_; ++x) {
        kf[x] = refine_key(colour_from_, from_out_, from_in_, x);
        kt[x] = refine_key(colour_to_, to_out_, to_in_, x);
        names.emplace(kf[x], 0);
        names.emplace(kt[x], 0);
      }
      int next = 0;
      for (auto& [k, v] : names) v = next++;
      for (std::size_t x = 0; x < n_; ++x) {
        colour_from_[x] = names[kf[x]];
        colour_to_[x] = names[kt[x]];
      }
      std::size_t now = names.size();
      if (now == classes) break;
      classes = now;
    }
  }

  auto hist_from = colour_from_, hist_to = colour_to_;
  std::sort(hist_from.begin(), hist_from.end());
  std::sort(hist_to.begin(), hist_to.end());
  if (hist_from != hist_to) compatible_ = false;
}

bool MorphismSearch::consistent_high_arity(const std::vector<Element>& map, const std::vector<Element>& inverse,
                                           Element x, Element y) const {
  Tuple t, image;
  for (const auto& inc : from_incident_[static_cast<std::size_t>(x)]) {
    t = from_.table(inc.rel).decode(inc.code);
    image.resize(t.size());
    bool complete = true;
    for (std::size_t i = 0; i < t.size() && complete; ++i) {
      image[i] = map[static_cast<std::size_t>(t[i])];
      complete = image[i] >= 0;
    }
    if (complete && !to_.holds(inc.rel, image)) return false;
  }
  for (const auto& inc : to_incident_[static_cast<std::size_t>(y)]) {
    t = to_.table(inc.rel).decode(inc.code);
    image.resize(t.size());
    bool complete = true;
    for (std::size_t i = 0; i < t.size() && complete; ++i) {
      image[i] = inverse[static_cast<std::size_t>(t[i])];
      complete = image[i] >= 0;
    }
    if (complete && !from_.holds(inc.rel, image)) return false;
  }
  return true;
}

std::uint64_t MorphismSearch::for_each(Forced forced, const Visitor& visit) const {
  if (!compatible_) return 0;
  std::vector<Element> map(n_, -1), inverse(n_, -1);
  std::vector<Bits> domain(n_, Bits(n_));
  for (std::size_t x = 0; x < n_; ++x)
    for (std::size_t y = 0; y < n_; ++y)
      if (colour_from_[x] == colour_to_[y]) domain[x].set(y);

  std::uint64_t visited = 0;
  bool stop = false;

  // Applies x -> y and narrows the domains of unmapped elements.
  auto assign = [&](std::vector<Bits>& dom, std::size_t x, std::size_t y) {
    map[x] = static_cast<Element>(y);
    inverse[y] = static_cast<Element>(x);
    if (!consistent_high_arity(map, inverse, static_cast<Element>(x), static_cast<Element>(y))) return false;
    for (std::size_t u = 0; u < n_; ++u) {
      if (map[u] >= 0) continue;
      auto& d = dom[u];
      d.reset(y);
      for (std::size_t b = 0; b < binary_.size(); ++b) {
        const bool fwd = from_out_[b][x].test(u), bwd = from_in_[b][x].test(u);
        const auto& ro = to_out_[b][y].w;
        const auto& ri = to_in_[b][y].w;
        for (std::size_t i = 0; i < d.w.size(); ++i) d.w[i] &= (fwd ? ro[i] : ~ro[i]) & (bwd ? ri[i] : ~ri[i]);
      }
      bool empty = true;
      for (auto w : d.w) empty = empty && w == 0;
      if (empty) return false;
    }
    return true;
  };
  auto unassign = [&](std::size_t x) {
    inverse[static_cast<std::size_t>(map[x])] = -1;
    map[x] = -1;
  };

  for (const auto& [x, y] : forced) {
    auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
    if (ux >= n_ || uy >= n_) return 0;
    if (map[ux] >= 0) {
      if (map[ux] != y) return 0;
      continue;
    }
    if (inverse[uy] >= 0 || !domain[ux].test(uy)) return 0;
    if (!assign(domain, ux, uy)) return 0;
  }

  std::function<void(std::vector<Bits>&, std::size_t)> recurse = [&](std::vector<Bits>& dom, std::size_t depth) {
    if (stop) return;
    if (depth == n_) {
      ++visited;
      if (!visit(map)) stop = true;
      return;
    }
    std::size_t best = n_;
    int best_count = 0;
    for (std::size_t u = 0; u < n_; ++u) {
      if (map[u] >= 0) continue;
      int c = 0;
      for (auto w : dom[u].w) c += std::popcount(w);
      if (best == n_ || c < best_count) {
        best = u;
        best_count = c;
      }
    }
    for (std::size_t y = 0; y < n_ && !stop; ++y) {
      if (!dom[best].test(y)) continue;
      std::vector<Bits> next = dom;
      if (assign(next, best, y)) recurse(next, depth + 1);
      unassign(best);
    }
  };

  std::size_t mapped = 0;
  for (auto m : map) mapped += m >= 0;
  recurse(domain, mapped);
  return visited;
}

std::optional<std::vector<Element>> MorphismSearch::find_one(Forced forced) const {
  std::optional<std::vector<Element>> found;
  for_each(forced, [&](const std::vector<Element>& m) {
    found = m;
    return false;
  });
  return found;
}

}  // namespace homord
