#include "homord/stats.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "homord/errors.hpp"

namespace homord {

namespace {

// Runs the per-sample callback block by block, each block on its own derived
// stream, then merges block accumulators in block order.
template <typename Acc, typename PerSample, typename Merge>
Acc run_blocks(const Sampler& sampler, std::size_t n, std::uint64_t seed, unsigned workers, const Acc& init,
               PerSample per_sample, Merge merge) {
  const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
  std::vector<Acc> partial(blocks, init);
  auto run = [&](std::size_t b) {
    Rng rng(derive_seed(seed, b));
    Sample sample;
    const std::size_t start = b * kSampleBlock, end = std::min(n, start + kSampleBlock);
    for (std::size_t i = start; i < end; ++i) {
      sampler.draw(rng, sample);
      per_sample(partial[b], i, sample);
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(blocks, 1))));
  if (workers == 1) {
    for (std::size_t b = 0; b < blocks; ++b) run(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_lock;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        try {
          for (std::size_t b; (b = next++) < blocks;) run(b);
        } catch (...) {
          std::lock_guard<std::mutex> guard(failure_lock);
          if (!failure) failure = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  Acc total = init;
  for (const auto& p : partial) merge(total, p);
  return total;
}

std::vector<std::size_t> domain_indices(const Sampler& sampler, std::span<const Element> points) {
  std::vector<std::size_t> out;
  for (Element e : points) out.push_back(sampler.index_of(e));
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      if (out[i] == out[j]) throw PreconditionError("points must be distinct");
  return out;
}

std::size_t sample_pattern(const Sample& s, const std::vector<std::size_t>& idx) {
  const std::size_t k = idx.size();
  std::size_t local[8];
  std::iota(local, local + k, 0);
  std::sort(local, local + k, [&](std::size_t x, std::size_t y) { return s.rank[idx[x]] < s.rank[idx[y]]; });
  return pattern_index(std::span<const std::size_t>(local, k));
}

void require_order(const Sampler& sampler) {
  if (!sampler.produces_order()) throw PreconditionError("sampler '" + sampler.name() + "' produces no order");
}

void require_eta(const Sampler& sampler) {
  if (!sampler.exposes_eta()) throw PreconditionError("sampler '" + sampler.name() + "' does not expose eta");
}

// Collects eta values of the given domain positions over n draws.
std::vector<std::vector<double>> collect_eta(const Sampler& sampler, const std::vector<std::size_t>& idx,
                                             std::size_t n, std::uint64_t seed, unsigned workers) {
  using Acc = std::vector<std::vector<double>>;
  return run_blocks(
      sampler, n, seed, workers, Acc(idx.size()),
      [&](Acc& acc, std::size_t, const Sample& s) {
        for (std::size_t j = 0; j < idx.size(); ++j) acc[j].push_back(s.eta[idx[j]]);
      },
      [](Acc& total, const Acc& part) {
        for (std::size_t j = 0; j < total.size(); ++j) total[j].insert(total[j].end(), part[j].begin(), part[j].end());
      });
}

// Bins by the distinct empirical quartiles: bin = number of cut points below x.
std::vector<std::size_t> quartile_bins(const std::vector<double>& x, std::size_t* bins) {
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (double q : {0.25, 0.5, 0.75}) {
    const double c = sorted[static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1))];
    if (cuts.empty() || cuts.back() != c) cuts.push_back(c);
  }
  std::vector<std::size_t> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), x[i]) - cuts.begin());
  *bins = cuts.size() + 1;
  return out;
}

double pearson_p(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 1;
  const double r = sxy / std::sqrt(sxx * syy);
  return normal_two_sided(r * std::sqrt(n));
}

TestVerdict bonferroni_verdict(std::string name, const std::vector<double>& pvalues, double alpha,
                               std::uint64_t seed, std::size_t n, std::string detail) {
  TestVerdict v;
  v.name = std::move(name);
  v.seed = seed;
  v.n = n;
  v.threshold = alpha;
  v.rule = "min Bonferroni-adjusted p >= alpha";
  const double m = static_cast<double>(std::max<std::size_t>(pvalues.size(), 1));
  double adjusted = 1;
  for (double p : pvalues) adjusted = std::min(adjusted, std::min(1.0, p * m));
  v.statistic = adjusted;
  v.pass = adjusted >= alpha;
  v.detail = std::move(detail);
  return v;
}

}  // namespace

Estimate Estimate::frequency(std::size_t hits, std::size_t n) {
  if (n == 0) throw PreconditionError("estimate needs n > 0");
  Estimate e;
  e.n = n;
  e.value = static_cast<double>(hits) / static_cast<double>(n);
  e.stderr_ = std::sqrt(e.value * (1 - e.value) / static_cast<double>(n));
  e.ci99_low = std::clamp(e.value - 2.576 * e.stderr_, 0.0, 1.0);
  e.ci99_high = std::clamp(e.value + 2.576 * e.stderr_, 0.0, 1.0);
  return e;
}

bool Estimate::within(double target, double sigmas) const {
  return value == target || std::abs(value - target) <= sigmas * stderr_;
}

std::size_t factorial(std::size_t k) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= k; ++i) f *= i;
  return f;
}

std::size_t pattern_index(std::span<const std::size_t> perm) {
  const std::size_t k = perm.size();
  std::size_t index = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < k; ++j) smaller += perm[j] < perm[i] ? 1 : 0;
    index += smaller * factorial(k - 1 - i);
  }
  return index;
}

std::vector<std::vector<std::uint64_t>> order_pattern_counts(const Sampler& sampler, const std::vector<Tuple>& tuples,
                                                             std::size_t n, std::uint64_t seed, unsigned workers) {
  require_order(sampler);
  if (n == 0) throw PreconditionError("n must be positive");
  std::vector<std::vector<std::size_t>> idx;
  for (const auto& t : tuples) {
    if (t.empty() || t.size() > 8) throw PreconditionError("order patterns need 1 to 8 points");
    idx.push_back(domain_indices(sampler, t));
  }
  using Acc = std::vector<std::vector<std::uint64_t>>;
  Acc init;
  for (const auto& t : tuples) init.emplace_back(factorial(t.size()), 0);
  return run_blocks(
      sampler, n, seed, workers, init,
      [&](Acc& acc, std::size_t, const Sample& s) {
        for (std::size_t t = 0; t < idx.size(); ++t) ++acc[t][sample_pattern(s, idx[t])];
      },
      [](Acc& total, const Acc& part) {
        for (std::size_t t = 0; t < total.size(); ++t)
          for (std::size_t p = 0; p < total[t].size(); ++p) total[t][p] += part[t][p];
      });
}

Estimate estimate_order_event(const Sampler& sampler, std::span<const Element> points,
                              std::span<const Element> target_order, std::size_t n, std::uint64_t seed,
                              unsigned workers) {
  if (n == 0) throw PreconditionError("n must be positive");
  if (target_order.size() != points.size()) throw PreconditionError("target order must list every point");
  std::vector<std::size_t> positions;
  for (Element e : target_order) {
    auto it = std::find(points.begin(), points.end(), e);
    if (it == points.end()) throw PreconditionError("target order lists a point outside the tuple");
    positions.push_back(static_cast<std::size_t>(it - points.begin()));
  }
  const std::size_t target = pattern_index(positions);
  auto counts = order_pattern_counts(sampler, {Tuple(points.begin(), points.end())}, n, seed, workers);
  return Estimate::frequency(counts[0][target], n);
}

TestVerdict test_exchangeability(const Sampler& sampler, const std::vector<std::pair<Tuple, Tuple>>& pairs,
                                 std::size_t n, std::uint64_t seed, const TypeOracle& types, double alpha,
                                 unsigned workers) {
  std::vector<double> pvalues;
  std::string detail;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [a, b] = pairs[i];
    if (a.size() != b.size()) throw PreconditionError("tuples of a pair must have equal length");
    if (types && types(a) != types(b)) throw PreconditionError("tuples of pair " + std::to_string(i) + " differ in type");
    auto ca = order_pattern_counts(sampler, {a}, n, derive_seed(seed, 2 * i), workers)[0];
    auto cb = order_pattern_counts(sampler, {b}, n, derive_seed(seed, 2 * i + 1), workers)[0];
    std::vector<std::vector<double>> table(2);
    for (std::size_t p = 0; p < ca.size(); ++p) {
      table[0].push_back(static_cast<double>(ca[p]));
      table[1].push_back(static_cast<double>(cb[p]));
    }
    auto chi = chi_square_table(table);
    pvalues.push_back(chi.p);
    detail += (i ? "; " : "") + std::string("pair ") + std::to_string(i) + ": chi2=" + std::to_string(chi.statistic) +
              " dof=" + std::to_string(static_cast<int>(chi.dof)) + " p=" + std::to_string(chi.p);
  }
  return bonferroni_verdict("exchangeability", pvalues, alpha, seed, n, detail);
}

TestVerdict test_independence(const Sampler& sampler, const std::vector<std::pair<Element, Element>>& pairs,
                              std::size_t n, std::uint64_t seed, double alpha, unsigned workers) {
  require_eta(sampler);
  if (n < 2) throw PreconditionError("n must be at least 2");
  std::vector<std::size_t> idx;
  std::map<Element, std::size_t> slot;
  for (auto [a, b] : pairs) {
    if (a == b) throw PreconditionError("independence pairs need distinct points");
    for (Element e : {a, b})
      if (slot.emplace(e, idx.size()).second) idx.push_back(sampler.index_of(e));
  }
  auto eta = collect_eta(sampler, idx, n, seed, workers);
  std::vector<double> pvalues;
  std::string detail;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& x = eta[slot[pairs[i].first]];
    const auto& y = eta[slot[pairs[i].second]];
    const double p_corr = pearson_p(x, y);
    std::size_t rx = 0, ry = 0;
    auto bx = quartile_bins(x, &rx), by = quartile_bins(y, &ry);
    std::vector<std::vector<double>> table(rx, std::vector<double>(ry, 0));
    for (std::size_t k = 0; k < n; ++k) table[bx[k]][by[k]] += 1;
    auto chi = chi_square_table(table);
    pvalues.push_back(p_corr);
    pvalues.push_back(chi.p);
    detail += (i ? "; " : "") + std::string("pair ") + std::to_string(i) + ": p_corr=" + std::to_string(p_corr) +
              " p_grid=" + std::to_string(chi.p);
  }
  return bonferroni_verdict("independence", pvalues, alpha, seed, n, detail);
}

TestVerdict test_mutual_independence(const Sampler& sampler, const std::vector<Tuple>& triples, std::size_t n,
                                     std::uint64_t seed, double alpha, unsigned workers) {
  require_eta(sampler);
  if (n < 2) throw PreconditionError("n must be at least 2");
  std::vector<std::size_t> idx;
  std::map<Element, std::size_t> slot;
  for (const auto& t : triples) {
    if (t.size() != 3) throw PreconditionError("mutual independence is tested on triples");
    domain_indices(sampler, t);
    for (Element e : t)
      if (slot.emplace(e, idx.size()).second) idx.push_back(sampler.index_of(e));
  }
  auto eta = collect_eta(sampler, idx, n, seed, workers);
  std::vector<double> pvalues;
  std::string detail;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    std::size_t r[3];
    std::vector<std::size_t> bins[3];
    for (int j = 0; j < 3; ++j) bins[j] = quartile_bins(eta[slot[triples[i][static_cast<std::size_t>(j)]]], &r[j]);
    std::vector<double> cell(r[0] * r[1] * r[2], 0);
    std::vector<double> m[3] = {std::vector<double>(r[0], 0), std::vector<double>(r[1], 0), std::vector<double>(r[2], 0)};
    for (std::size_t k = 0; k < n; ++k) {
      cell[(bins[0][k] * r[1] + bins[1][k]) * r[2] + bins[2][k]] += 1;
      for (int j = 0; j < 3; ++j) m[j][bins[j][k]] += 1;
    }
    const double total = static_cast<double>(n);
    double stat = 0;
    std::size_t used[3] = {0, 0, 0};
    for (int j = 0; j < 3; ++j)
      for (double v : m[j]) used[j] += v > 0 ? 1 : 0;
    for (std::size_t a = 0; a < r[0]; ++a)
      for (std::size_t b = 0; b < r[1]; ++b)
        for (std::size_t c = 0; c < r[2]; ++c) {
          const double expected = m[0][a] * m[1][b] * m[2][c] / (total * total);
          if (expected == 0) continue;
          const double o = cell[(a * r[1] + b) * r[2] + c];
          stat += (o - expected) * (o - expected) / expected;
        }
    const double dof = static_cast<double>(used[0] * used[1] * used[2]) - static_cast<double>(used[0] + used[1] + used[2]) + 2;
    const double p = dof > 0 ? chi_square_sf(stat, dof) : 1.0;
    pvalues.push_back(p);
    detail += (i ? "; " : "") + std::string("triple ") + std::to_string(i) + ": chi2=" + std::to_string(stat) +
              " dof=" + std::to_string(static_cast<int>(dof)) + " p=" + std::to_string(p);
  }
  auto v = bonferroni_verdict("mutual-independence", pvalues, alpha, seed, n, detail);
  return v;
}

TestVerdict test_monotone_coupling(const Sampler& sampler, const std::vector<std::pair<Element, Element>>& pairs,
                                   std::size_t n, std::uint64_t seed, unsigned workers) {
  require_eta(sampler);
  require_order(sampler);
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (auto [a, b] : pairs) idx.emplace_back(sampler.index_of(a), sampler.index_of(b));
  const std::uint64_t violations = run_blocks(
      sampler, n, seed, workers, std::uint64_t{0},
      [&](std::uint64_t& acc, std::size_t, const Sample& s) {
        bool bad = false;
        if (idx.empty()) {
          for (std::size_t r = 1; r < s.order.size() && !bad; ++r)
            bad = s.eta[sampler.index_of(s.order[r - 1])] > s.eta[sampler.index_of(s.order[r])];
        } else {
          for (auto [i, j] : idx) {
            if (s.precedes(i, j) && s.eta[i] > s.eta[j]) bad = true;
            if (s.precedes(j, i) && s.eta[j] > s.eta[i]) bad = true;
          }
        }
        acc += bad ? 1 : 0;
      },
      [](std::uint64_t& total, std::uint64_t part) { total += part; });
  TestVerdict v;
  v.name = "monotone-coupling";
  v.statistic = static_cast<double>(violations);
  v.threshold = 0;
  v.rule = "violating draws == 0";
  v.pass = violations == 0;
  v.seed = seed;
  v.n = n;
  v.detail = std::to_string(violations) + " of " + std::to_string(n) + " draws violate a<b => eta(a)<=eta(b)";
  return v;
}

ShiftErgodicityResult test_shift_ergodicity(const SequenceSampler& sampler, std::size_t block_size, std::size_t n,
                                            std::uint64_t seed) {
  const std::size_t L = sampler.length();
  if (block_size < 2 || L == 0 || L % block_size != 0) throw PreconditionError("length must be a multiple of a block size >= 2");
  if (n < 2) throw PreconditionError("need at least 2 sequences");
  const std::size_t J = L / block_size;
  std::vector<double> block_means(n * J), within(n);
  std::vector<double> x;
  for (std::size_t start = 0, block = 0; start < n; start += kSampleBlock, ++block) {
    Rng rng(derive_seed(seed, block));
    for (std::size_t i = start; i < std::min(n, start + kSampleBlock); ++i) {
      sampler.draw(rng, x);
      double mean = 0;
      for (std::size_t j = 0; j < J; ++j) {
        double m = 0;
        for (std::size_t t = 0; t < block_size; ++t) m += x[j * block_size + t];
        block_means[i * J + j] = m / static_cast<double>(block_size);
        mean += m;
      }
      mean /= static_cast<double>(L);
      double ss = 0;
      for (double v : x) ss += (v - mean) * (v - mean);
      within[i] = ss / static_cast<double>(L - 1);
    }
  }
  const double grand = std::accumulate(block_means.begin(), block_means.end(), 0.0) / static_cast<double>(n * J);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    double spread = 0;
    for (std::size_t j = 0; j < J; ++j) spread += (block_means[i * J + j] - grand) * (block_means[i * J + j] - grand);
    d[i] = spread / static_cast<double>(J) - within[i] / static_cast<double>(block_size);
  }
  const double mean_d = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double var_d = 0;
  for (double v : d) var_d += (v - mean_d) * (v - mean_d);
  var_d /= static_cast<double>(n - 1);
  const double se = std::sqrt(var_d / static_cast<double>(n));

  ShiftErgodicityResult out;
  out.effect = mean_d;
  out.effect_se = se;
  auto& v = out.verdict;
  v.name = "shift-ergodicity";
  v.statistic = mean_d;
  v.threshold = 3 * se;
  v.rule = "|block-mean excess variance| <= 3 se";
  v.pass = std::abs(mean_d) <= 3 * se;
  v.seed = seed;
  v.n = n;
  v.detail = "excess variance " + std::to_string(mean_d) + " (se " + std::to_string(se) + "), sampler " +
             sampler.name() + ", L=" + std::to_string(L) + ", B=" + std::to_string(block_size);
  return out;
}

CovarianceEstimate estimate_eta_covariance(const Sampler& sampler, Element a, Element b, std::size_t n,
                                           std::uint64_t seed) {
  require_eta(sampler);
  if (n < 2) throw PreconditionError("n must be at least 2");
  const std::vector<std::size_t> idx = {sampler.index_of(a), sampler.index_of(b)};
  auto eta = collect_eta(sampler, idx, n, seed, 1);
  const auto& x = eta[0];
  const auto& y = eta[1];
  CovarianceEstimate c;
  c.n = n;
  const double dn = static_cast<double>(n);
  c.mean_a = std::accumulate(x.begin(), x.end(), 0.0) / dn;
  c.mean_b = std::accumulate(y.begin(), y.end(), 0.0) / dn;
  std::vector<double> prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = (x[i] - c.mean_a) * (y[i] - c.mean_b);
  c.value = std::accumulate(prod.begin(), prod.end(), 0.0) / dn;
  double var = 0;
  for (double p : prod) var += (p - c.value) * (p - c.value);
  c.stderr_ = std::sqrt(var / (dn - 1) / dn);
  return c;
}

double chi_square_sf(double statistic, double dof) {
  if (!(dof > 0)) return 1;
  if (!std::isfinite(statistic)) return 0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, std::max(statistic, 0.0)));
}

double normal_two_sided(double z) {
  if (!std::isfinite(z)) return 0;
  boost::math::normal dist;
  return 2 * boost::math::cdf(boost::math::complement(dist, std::abs(z)));
}

ChiSquare chi_square_table(const std::vector<std::vector<double>>& table) {
  std::vector<std::size_t> rows, cols;
  const std::size_t nc = table.empty() ? 0 : table[0].size();
  std::vector<double> row_sum(table.size(), 0), col_sum(nc, 0);
  double total = 0;
  for (std::size_t r = 0; r < table.size(); ++r)
    for (std::size_t c = 0; c < nc; ++c) {
      row_sum[r] += table[r][c];
      col_sum[c] += table[r][c];
      total += table[r][c];
    }
  for (std::size_t r = 0; r < table.size(); ++r)
    if (row_sum[r] > 0) rows.push_back(r);
  for (std::size_t c = 0; c < nc; ++c)
    if (col_sum[c] > 0) cols.push_back(c);
  ChiSquare out;
  if (rows.size() < 2 || cols.size() < 2) return out;
  for (auto r : rows)
    for (auto c : cols) {
      const double expected = row_sum[r] * col_sum[c] / total;
      out.statistic += (table[r][c] - expected) * (table[r][c] - expected) / expected;
    }
  out.dof = static_cast<double>((rows.size() - 1) * (cols.size() - 1));
  out.p = chi_square_sf(out.statistic, out.dof);
  return out;
}

}  // namespace homord
