#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homord/rng.hpp"
#include "homord/structure.hpp"

namespace homord {

/// One draw. Per-point vectors are indexed by position in the sampler's domain.
struct Sample {
  std::vector<Element> order;    // domain elements, least to greatest; empty if none
  std::vector<std::size_t> rank; // rank[i] = position of domain[i] in `order`
  std::vector<double> latent;    // z, or the derived field a sampler orders by
  std::vector<double> eta;       // exposed statistic; empty when not exposed
  std::vector<double> tiebreak;  // recorded fresh uniforms, when used
  std::uint64_t tries = 1;       // rejection attempts spent on this draw

  bool precedes(std::size_t i, std::size_t j) const { return rank[i] < rank[j]; }
};

/// A seedable measure construction on a finite set of points. Draws are pure
/// functions of the RNG state, so instances can be shared across threads.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual std::string name() const = 0;
  virtual void draw(Rng& rng, Sample& out) const = 0;
  virtual bool exposes_eta() const { return true; }
  virtual bool produces_order() const { return true; }

  const std::vector<Element>& domain() const { return domain_; }
  /// Domain position of an element; throws PreconditionError when absent.
  std::size_t index_of(Element e) const;

 protected:
  explicit Sampler(std::vector<Element> domain);
  // Fills order and rank by sorting domain positions with `less`.
  void order_by(Sample& out, const std::function<bool(std::size_t, std::size_t)>& less) const;

 private:
  std::vector<Element> domain_;
  std::vector<std::size_t> position_;  // element -> domain index + 1; 0 when absent
};

/// z i.i.d. uniform on [0, 1); a < b iff z(a) < z(b); eta = z.
class UniformOrderSampler : public Sampler {
 public:
  explicit UniformOrderSampler(std::vector<Element> domain);
  explicit UniformOrderSampler(const FinStructure& s) : UniformOrderSampler(all_elements(s)) {}
  std::string name() const override { return "uniform"; }
  void draw(Rng& rng, Sample& out) const override;

  /// The order a latent vector induces, without randomness.
  static std::vector<Element> order_from_latent(std::span<const Element> domain, std::span<const double> z);
  static std::vector<Element> all_elements(const FinStructure& s);
};

/// A named strict total order on a set of elements, as a rank per element.
struct FixedOrder {
  std::string name;
  std::vector<Element> sequence;  // least to greatest

  static FixedOrder listing(std::string name, std::vector<Element> sequence);
  /// The structure's own order `lt` on `domain`, or its reverse.
  static FixedOrder from_structure(const FinStructure& s, std::span<const Element> domain, bool reverse = false);
  std::size_t rank_of(Element e) const;
  bool less(Element a, Element b) const { return rank_of(a) < rank_of(b); }
};

struct Atom {
  double location = 0;
  double mass = 0;
  std::size_t tie_order = 0;  // index into AtomSpec::orders
};

/// Atomic-plus-uniform law on [0, 1] with a tie-break order per atom.
struct AtomSpec {
  std::vector<Atom> atoms;
  std::vector<FixedOrder> orders;

  double atomic_mass() const;
  /// Throws ValidationError when masses, locations or tie targets are bad.
  void validate(std::span<const Element> domain) const;
  /// Index of the atom at `location`, if any.
  std::optional<std::size_t> atom_at(double location) const;
};

/// z i.i.d. from the AtomSpec law, sampled by branching on atom mass first so
/// that z(a) = p is an exact event. a < b iff z(a) < z(b), or z(a) = z(b) and
/// a precedes b in the tie order of that atom. eta = z.
class AtomOrderSampler : public Sampler {
 public:
  AtomOrderSampler(std::vector<Element> domain, AtomSpec spec);
  std::string name() const override { return "atoms"; }
  void draw(Rng& rng, Sample& out) const override;
  const AtomSpec& spec() const { return spec_; }

 protected:
  double draw_latent(Rng& rng) const;
  void order_sample(Sample& out) const;
  AtomSpec spec_;
};

/// The atom sampler conditioned on z(a) = p for every point a: draws are
/// rejected until all latents hit the atom.
class ConditionedAtomSampler : public AtomOrderSampler {
 public:
  ConditionedAtomSampler(std::vector<Element> points, AtomSpec spec, double atom, std::uint64_t max_tries);
  std::string name() const override { return "atoms|z=p"; }
  void draw(Rng& rng, Sample& out) const override;
  double atom_mass() const { return mass_; }

 private:
  double atom_;
  double mass_;
  std::uint64_t max_tries_;
};

ConditionedAtomSampler condition_on_atom(const AtomSpec& spec, double atom, std::vector<Element> points,
                                         std::uint64_t max_tries = 10'000'000);

/// P entirely below Q; uniform latents order each block.
class PQOrderSampler : public Sampler {
 public:
  explicit PQOrderSampler(const FinStructure& s);
  std::string name() const override { return "pq"; }
  void draw(Rng& rng, Sample& out) const override;
  bool exposes_eta() const override { return false; }

 private:
  std::vector<char> in_p_;
};

/// eta i.i.d. uniform on the S1 sort; xi_a = min of eta over the two
/// neighbours of a in S0; order the S0 sort by xi, exact ties broken by a fresh
/// recorded uniform. The exposed statistic is xi.
class BipartiteMinSampler : public Sampler {
 public:
  explicit BipartiteMinSampler(const FinStructure& s);
  std::string name() const override { return "bimin"; }
  void draw(Rng& rng, Sample& out) const override;
  /// S1 positions of the two neighbours of each domain element.
  const std::vector<std::pair<std::size_t, std::size_t>>& neighbours() const { return nbrs_; }

 private:
  std::size_t points_ = 0;  // |S1|
  std::vector<std::pair<std::size_t, std::size_t>> nbrs_;
};

/// On the M sort: eta_a fair bits, a before b iff g_a(a) < g_b(b) where g is the
/// identity for eta = 0 and the involution for eta = 1. latent = eta bits.
class InvolutionSampler : public Sampler {
 public:
  explicit InvolutionSampler(const FinStructure& s);
  std::string name() const override { return "involution"; }
  void draw(Rng& rng, Sample& out) const override;
  bool exposes_eta() const override { return false; }

 private:
  std::vector<Element> partner_;           // per domain index
  std::vector<std::vector<char>> lt_;      // order of the whole structure
};

/// Uniform random linear functional on F_2^d: fair bits on the basis vectors,
/// extended linearly. eta = latent = xi(v) in {0, 1}; no order.
class DualFunctionalSampler : public Sampler {
 public:
  explicit DualFunctionalSampler(const FinStructure& s);
  std::string name() const override { return "dual"; }
  void draw(Rng& rng, Sample& out) const override;
  bool produces_order() const override { return false; }
  int dimension() const { return d_; }

 private:
  int d_ = 0;
};

/// Harness self-test: uniform latents, but elements adjacent (relation 0) to
/// `anchor` have `beta` added to their key, so edge and non-edge pairs with the
/// anchor get different order laws. Not invariant by construction.
class EdgeBiasedSampler : public Sampler {
 public:
  EdgeBiasedSampler(const FinStructure& s, Element anchor, double beta);
  std::string name() const override { return "biased"; }
  void draw(Rng& rng, Sample& out) const override;

 private:
  std::vector<double> shift_;
};

/// Harness self-test: eta uniform, order an independent uniform permutation.
class BrokenCouplingSampler : public Sampler {
 public:
  explicit BrokenCouplingSampler(std::vector<Element> domain);
  std::string name() const override { return "broken"; }
  void draw(Rng& rng, Sample& out) const override;
};

/// Sources of sequences x_0, ..., x_{L-1} for shift-ergodicity tests.
class SequenceSampler {
 public:
  explicit SequenceSampler(std::size_t length) : length_(length) {}
  virtual ~SequenceSampler() = default;
  virtual std::string name() const = 0;
  virtual void draw(Rng& rng, std::vector<double>& x) const = 0;
  std::size_t length() const { return length_; }

 private:
  std::size_t length_;
};

class IidUniformSequence : public SequenceSampler {
 public:
  using SequenceSampler::SequenceSampler;
  std::string name() const override { return "iid-uniform"; }
  void draw(Rng& rng, std::vector<double>& x) const override;
};

/// With probability w an i.i.d. Bernoulli(p0) sequence, otherwise Bernoulli(p1).
class BernoulliMixtureSequence : public SequenceSampler {
 public:
  BernoulliMixtureSequence(std::size_t length, double p0, double p1, double w = 0.5);
  std::string name() const override { return "bernoulli-mixture"; }
  void draw(Rng& rng, std::vector<double>& x) const override;
  /// Variance of the component mean, w(1-w)(p1-p0)^2.
  double between_variance() const;

 private:
  double p0_, p1_, w_;
};

/// All zeros or all ones, each with probability one half.
class ConstantMixtureSequence : public SequenceSampler {
 public:
  using SequenceSampler::SequenceSampler;
  std::string name() const override { return "constant-mixture"; }
  void draw(Rng& rng, std::vector<double>& x) const override;
};

/// Samples are generated in fixed-size blocks; block b uses the stream
/// derive_seed(seed, b), so results do not depend on how blocks are spread
/// over workers.
inline constexpr std::size_t kSampleBlock = 4096;

/// Calls visit(sample_index, sample) for n draws, in index order.
template <typename Visit>
void for_each_sample(const Sampler& sampler, std::size_t n, std::uint64_t seed, Visit&& visit) {
  Sample sample;
  for (std::size_t start = 0, block = 0; start < n; start += kSampleBlock, ++block) {
    Rng rng(derive_seed(seed, block));
    const std::size_t end = std::min(n, start + kSampleBlock);
    for (std::size_t i = start; i < end; ++i) {
      sampler.draw(rng, sample);
      visit(i, sample);
    }
  }
}

/// CSV with columns sampleIndex, order (space-separated, least to greatest)
/// and one eta_<element> column per element when eta is exposed. A nonempty
/// `points` restricts both to those domain elements. Samplers without an order
/// write their latent values in a `values` column instead.
void write_samples_csv(std::ostream& out, const Sampler& sampler, std::size_t n, std::uint64_t seed,
                       std::span<const Element> points = {});

}  // namespace homord
