#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "homord/samplers.hpp"
#include "homord/structure.hpp"

namespace homord {

inline constexpr double kAlpha = 0.001;

/// Frequency estimate with stderr = sqrt(p(1-p)/n) and ci99 = value +- 2.576
/// stderr clamped to [0, 1].
struct Estimate {
  double value = 0;
  double stderr_ = 0;
  std::size_t n = 0;
  double ci99_low = 0;
  double ci99_high = 0;

  static Estimate frequency(std::size_t hits, std::size_t n);
  /// |value - target| <= sigmas * stderr; an exact match always passes.
  bool within(double target, double sigmas = 3) const;
};

struct TestVerdict {
  std::string name;
  double statistic = 0;
  double threshold = 0;
  std::string rule;  // how statistic and threshold are compared
  bool pass = false;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::string detail;
};

/// Index of an order pattern of k points: the permutation listing the points
/// from least to greatest, ranked lexicographically among the k! permutations.
std::size_t pattern_index(std::span<const std::size_t> positions_least_first);
std::size_t factorial(std::size_t k);

/// Counts of the k! order patterns of each tuple, over the same n draws.
std::vector<std::vector<std::uint64_t>> order_pattern_counts(const Sampler& sampler,
                                                             const std::vector<Tuple>& tuples, std::size_t n,
                                                             std::uint64_t seed, unsigned workers = 1);

/// Frequency of `target_order` (a permutation of `points`, least first).
Estimate estimate_order_event(const Sampler& sampler, std::span<const Element> points,
                              std::span<const Element> target_order, std::size_t n, std::uint64_t seed,
                              unsigned workers = 1);

/// Type oracle for the exchangeability precondition; empty disables the check.
using TypeOracle = std::function<TypeCode(std::span<const Element>)>;

/// For each pair (a, b) of equal-type tuples, a 2 x k! chi-square homogeneity
/// test between the order-pattern counts of a and of b, drawn from independent
/// streams. Passes when every Bonferroni-adjusted p-value is >= alpha.
TestVerdict test_exchangeability(const Sampler& sampler, const std::vector<std::pair<Tuple, Tuple>>& pairs,
                                 std::size_t n, std::uint64_t seed, const TypeOracle& types,
                                 double alpha = kAlpha, unsigned workers = 1);

/// Per pair of points: a correlation z-test and a chi-square test on the
/// quartile grid of the eta values (4 x 4 for continuous statistics, coarser
/// when eta is discrete). Passes when every Bonferroni-adjusted p >= alpha.
TestVerdict test_independence(const Sampler& sampler, const std::vector<std::pair<Element, Element>>& pairs,
                              std::size_t n, std::uint64_t seed, double alpha = kAlpha, unsigned workers = 1);

/// Mutual independence of eta on triples: chi-square of the 3-way quartile
/// table against the product of its margins.
TestVerdict test_mutual_independence(const Sampler& sampler, const std::vector<Tuple>& triples, std::size_t n,
                                     std::uint64_t seed, double alpha = kAlpha, unsigned workers = 1);

/// Counts draws with a before b but eta(a) > eta(b). Empty `pairs` checks all
/// pairs of the domain. Passes iff the count is 0.
TestVerdict test_monotone_coupling(const Sampler& sampler, const std::vector<std::pair<Element, Element>>& pairs,
                                   std::size_t n, std::uint64_t seed, unsigned workers = 1);

/// Block-mean variance against the i.i.d. prediction. For each sequence,
/// D = mean_j (m_j - grand)^2 - s^2 / B, with m_j the block means and s^2 the
/// within-sequence variance; D has mean 0 for ergodic (i.i.d.) sources and
/// equals the between-component variance for mixtures. Passes iff |mean D| is
/// within 3 standard errors of 0. The statistic is mean D.
struct ShiftErgodicityResult {
  TestVerdict verdict;
  double effect = 0;       // mean D
  double effect_se = 0;
};
ShiftErgodicityResult test_shift_ergodicity(const SequenceSampler& sampler, std::size_t block_size, std::size_t n,
                                            std::uint64_t seed);

/// Sample covariance of eta(a), eta(b) with a delta-method standard error.
struct CovarianceEstimate {
  double value = 0;
  double stderr_ = 0;
  double mean_a = 0, mean_b = 0;
  std::size_t n = 0;
};
CovarianceEstimate estimate_eta_covariance(const Sampler& sampler, Element a, Element b, std::size_t n,
                                           std::uint64_t seed);

/// Upper-tail chi-square probability.
double chi_square_sf(double statistic, double dof);
/// Two-sided normal p-value for a z score.
double normal_two_sided(double z);

/// Chi-square test of homogeneity/independence for an r x c table of counts;
/// empty rows and columns are dropped. Returns (statistic, dof, p).
struct ChiSquare {
  double statistic = 0;
  double dof = 0;
  double p = 1;
};
ChiSquare chi_square_table(const std::vector<std::vector<double>>& table);

}  // namespace homord
