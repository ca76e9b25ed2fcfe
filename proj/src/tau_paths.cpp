#include "homord/tau_paths.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>

#include "homord/errors.hpp"

namespace homord {

namespace {

constexpr int kUnreached = std::numeric_limits<int>::max();

class PathSearch {
 public:
  PathSearch(const FinStructure& s, Element a, Element b, const TypeCode& tau, std::span<const Element> avoid)
      : n_(s.size()), a_(a), b_(b), step_(n_ * n_, 0), blocked_(n_, 0), visited_(n_, 0) {
    if (a == b) throw PreconditionError("tau-path endpoints must differ");
    for (Element e : {a, b})
      if (e < 0 || static_cast<std::size_t>(e) >= n_) throw PreconditionError("endpoint outside the universe");
    for (Element e : avoid) {
      if (e == a || e == b) throw PreconditionError("endpoints may not lie in the avoid set");
      if (e >= 0 && static_cast<std::size_t>(e) < n_) blocked_[static_cast<std::size_t>(e)] = 1;
    }
    if (tau.arity() != 2) throw PreconditionError("tau must be a 2-type");
    bool realized = false;
    for_each_distinct_tuple(n_, 2, [&](std::span<const Element> t) {
      if (canonical_type(s, t) == tau) {
        step_[static_cast<std::size_t>(t[0]) * n_ + static_cast<std::size_t>(t[1])] = 1;
        realized = true;
      }
      return true;
    });
    if (!realized) throw PreconditionError("tau is not realized in the structure");
    distances();
  }

  int lower_bound() const { return dist_[state(a_, 0)]; }

  // Depth-first search for a simple path of exactly `length` edges.
  bool search(std::size_t length, const std::function<bool(const std::vector<Element>&)>& found) {
    if (length == 0 || length % 2) return false;
    path_.assign(1, a_);
    std::fill(visited_.begin(), visited_.end(), 0);
    visited_[static_cast<std::size_t>(a_)] = 1;
    return extend(length, found);
  }

 private:
  std::size_t state(Element v, int parity) const { return static_cast<std::size_t>(v) * 2 + static_cast<std::size_t>(parity); }
  // Even positions step to odd y with tp(x, y) = tau; odd y steps to even z with tp(z, y) = tau.
  bool edge(Element from, int parity, Element to) const {
    const auto f = static_cast<std::size_t>(from), t = static_cast<std::size_t>(to);
    return parity == 0 ? step_[f * n_ + t] : step_[t * n_ + f];
  }
  bool usable_interior(Element v) const { return v != a_ && v != b_ && !blocked_[static_cast<std::size_t>(v)]; }

  // Reverse BFS from (b, even), ignoring simplicity: an admissible bound.
  void distances() {
    dist_.assign(2 * n_, kUnreached);
    std::deque<std::pair<Element, int>> queue;
    dist_[state(b_, 0)] = 0;
    queue.emplace_back(b_, 0);
    while (!queue.empty()) {
      auto [v, parity] = queue.front();
      queue.pop_front();
      const int prev_parity = 1 - parity;
      for (std::size_t u = 0; u < n_; ++u) {
        const auto ue = static_cast<Element>(u);
        if (!edge(ue, prev_parity, v)) continue;
        if (ue == a_ ? prev_parity != 0 : !usable_interior(ue)) continue;
        auto& d = dist_[state(ue, prev_parity)];
        if (d != kUnreached) continue;
        d = dist_[state(v, parity)] + 1;
        if (ue != a_) queue.emplace_back(ue, prev_parity);
      }
    }
  }

  bool extend(std::size_t remaining, const std::function<bool(const std::vector<Element>&)>& found) {
    const Element v = path_.back();
    const int parity = static_cast<int>((path_.size() - 1) % 2);
    if (remaining == 0) return v == b_ && !found(path_);
    for (std::size_t u = 0; u < n_; ++u) {
      const auto ue = static_cast<Element>(u);
      if (visited_[u] || !edge(v, parity, ue)) continue;
      if (ue == b_ ? remaining != 1 : !usable_interior(ue)) continue;
      const int d = dist_[state(ue, 1 - parity)];
      if (d == kUnreached || static_cast<std::size_t>(d) > remaining - 1) continue;
      visited_[u] = 1;
      path_.push_back(ue);
      const bool stop = extend(remaining - 1, found);
      path_.pop_back();
      visited_[u] = 0;
      if (stop) return true;
    }
    return false;
  }

  std::size_t n_;
  Element a_, b_;
  std::vector<char> step_, blocked_, visited_;
  std::vector<int> dist_;
  std::vector<Element> path_;
};

std::optional<TauPath> path_of_length(PathSearch& search, const TypeCode& tau, std::size_t length) {
  std::optional<TauPath> out;
  search.search(length, [&](const std::vector<Element>& nodes) {
    out = TauPath{nodes, tau};
    return false;
  });
  return out;
}

bool disjoint(const std::vector<Element>& x, const std::vector<Element>& y) {
  for (Element e : x)
    if (std::find(y.begin(), y.end(), e) != y.end()) return false;
  return true;
}

// Backtracking set packing over the candidate interiors.
bool pack(const std::vector<TauPath>& all, std::size_t from, std::size_t want, std::vector<std::size_t>& chosen) {
  if (chosen.size() == want) return true;
  for (std::size_t i = from; i < all.size(); ++i) {
    const auto inner = all[i].interior();
    bool ok = true;
    for (auto c : chosen) ok = ok && disjoint(inner, all[c].interior());
    if (!ok) continue;
    chosen.push_back(i);
    if (pack(all, i + 1, want, chosen)) return true;
    chosen.pop_back();
  }
  return false;
}

}  // namespace

std::optional<std::string> verify_tau_path(const FinStructure& s, const TauPath& path) {
  const auto& y = path.nodes;
  if (y.size() < 3 || y.size() % 2 == 0) return "a tau-path has an odd number of nodes, at least 3";
  for (Element e : y)
    if (e < 0 || static_cast<std::size_t>(e) >= s.size()) return "node outside the universe";
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = i + 1; j < y.size(); ++j)
      if (y[i] == y[j]) return "nodes are not distinct";
  for (std::size_t i = 0; i + 2 < y.size(); i += 2) {
    const Element fwd[2] = {y[i], y[i + 1]};
    const Element back[2] = {y[i + 2], y[i + 1]};
    if (canonical_type(s, fwd) != path.tau) return "tp(y" + std::to_string(i) + ", y" + std::to_string(i + 1) + ") != tau";
    if (canonical_type(s, back) != path.tau)
      return "tp(y" + std::to_string(i + 2) + ", y" + std::to_string(i + 1) + ") != tau";
  }
  return std::nullopt;
}

bool tau_realized(const FinStructure& s, const TypeCode& tau) {
  bool realized = false;
  if (tau.arity() != 2) return false;
  for_each_distinct_tuple(s.size(), 2, [&](std::span<const Element> t) {
    realized = canonical_type(s, t) == tau;
    return !realized;
  });
  return realized;
}

std::optional<TauPath> find_tau_path(const FinStructure& s, Element a, Element b, const TypeCode& tau,
                                     std::span<const Element> avoid) {
  PathSearch search(s, a, b, tau, avoid);
  const int bound = search.lower_bound();
  if (bound == kUnreached) return std::nullopt;
  for (auto length = static_cast<std::size_t>(bound); length < s.size(); length += 2)
    if (auto p = path_of_length(search, tau, length)) return p;
  return std::nullopt;
}

std::vector<TauPath> enumerate_tau_paths(const FinStructure& s, Element a, Element b, const TypeCode& tau,
                                         std::size_t length, std::span<const Element> avoid, std::size_t limit,
                                         bool* complete) {
  PathSearch search(s, a, b, tau, avoid);
  std::vector<TauPath> out;
  bool cut = false;
  search.search(length, [&](const std::vector<Element>& nodes) {
    if (out.size() == limit) {
      cut = true;
      return false;
    }
    out.push_back(TauPath{nodes, tau});
    return true;
  });
  if (complete) *complete = !cut;
  return out;
}

TauPathFamily disjoint_tau_paths(const FinStructure& s, Element a, Element b, const TypeCode& tau,
                                 std::size_t count, std::size_t enumeration_limit) {
  TauPathFamily family;
  family.requested = count;
  if (count == 0) {
    PathSearch check(s, a, b, tau, {});  // preconditions still apply
    return family;
  }
  auto first = find_tau_path(s, a, b, tau);
  if (!first) {
    family.shortage = true;
    family.exhaustive = true;
    return family;
  }
  const std::size_t length = first->length();
  family.paths.push_back(*first);
  std::vector<Element> used = first->interior();
  while (family.paths.size() < count) {
    PathSearch search(s, a, b, tau, used);
    auto next = path_of_length(search, tau, length);
    if (!next) break;
    auto inner = next->interior();
    used.insert(used.end(), inner.begin(), inner.end());
    family.paths.push_back(std::move(*next));
  }
  if (family.paths.size() == count) return family;

  bool complete = false;
  auto all = enumerate_tau_paths(s, a, b, tau, length, {}, enumeration_limit, &complete);
  std::vector<std::size_t> chosen;
  if (pack(all, 0, count, chosen)) {
    family.paths.clear();
    for (auto i : chosen) family.paths.push_back(all[i]);
    return family;
  }
  family.shortage = true;
  family.exhaustive = complete;
  return family;
}

}  // namespace homord
