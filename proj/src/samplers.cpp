#include "homord/samplers.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "homord/errors.hpp"

namespace homord {

Sampler::Sampler(std::vector<Element> domain) : domain_(std::move(domain)) {
  if (domain_.empty()) throw PreconditionError("sampler domain is empty");
  Element top = 0;
  for (Element e : domain_) {
    if (e < 0) throw PreconditionError("negative element in sampler domain");
    top = std::max(top, e);
  }
  position_.assign(static_cast<std::size_t>(top) + 1, 0);
  for (std::size_t i = 0; i < domain_.size(); ++i) {
    auto& slot = position_[static_cast<std::size_t>(domain_[i])];
    if (slot) throw PreconditionError("repeated element in sampler domain");
    slot = i + 1;
  }
}

std::size_t Sampler::index_of(Element e) const {
  if (e < 0 || static_cast<std::size_t>(e) >= position_.size() || !position_[static_cast<std::size_t>(e)])
    throw PreconditionError("element " + std::to_string(e) + " is not in the sampler's domain");
  return position_[static_cast<std::size_t>(e)] - 1;
}

void Sampler::order_by(Sample& out, const std::function<bool(std::size_t, std::size_t)>& less) const {
  const std::size_t k = domain_.size();
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    if (less(i, j)) return true;
    if (less(j, i)) return false;
    return i < j;
  });
  out.order.resize(k);
  out.rank.resize(k);
  for (std::size_t r = 0; r < k; ++r) {
    out.order[r] = domain_[idx[r]];
    out.rank[idx[r]] = r;
  }
}

// Uniform ------------------------------------------------------------------

UniformOrderSampler::UniformOrderSampler(std::vector<Element> domain) : Sampler(std::move(domain)) {}

std::vector<Element> UniformOrderSampler::all_elements(const FinStructure& s) {
  std::vector<Element> all(s.size());
  std::iota(all.begin(), all.end(), 0);
  return all;
}

std::vector<Element> UniformOrderSampler::order_from_latent(std::span<const Element> domain,
                                                            std::span<const double> z) {
  std::vector<std::size_t> idx(domain.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return z[i] < z[j]; });
  std::vector<Element> order;
  order.reserve(idx.size());
  for (auto i : idx) order.push_back(domain[i]);
  return order;
}

void UniformOrderSampler::draw(Rng& rng, Sample& out) const {
  const std::size_t k = domain().size();
  out.latent.resize(k);
  for (auto& z : out.latent) z = uniform01(rng);
  out.eta = out.latent;
  out.tiebreak.clear();
  out.tries = 1;
  order_by(out, [&](std::size_t i, std::size_t j) { return out.latent[i] < out.latent[j]; });
}

// Fixed orders and atoms -----------------------------------------------------

FixedOrder FixedOrder::listing(std::string name, std::vector<Element> sequence) {
  std::set<Element> seen(sequence.begin(), sequence.end());
  if (seen.size() != sequence.size()) throw ValidationError("fixed order '" + name + "' repeats an element");
  return FixedOrder{std::move(name), std::move(sequence)};
}

FixedOrder FixedOrder::from_structure(const FinStructure& s, std::span<const Element> domain, bool reverse) {
  const auto lt = s.signature().index_of("lt");
  std::vector<Element> seq(domain.begin(), domain.end());
  std::sort(seq.begin(), seq.end(), [&](Element a, Element b) { return s.holds(lt, a, b); });
  if (reverse) std::reverse(seq.begin(), seq.end());
  return listing(reverse ? "reverse" : "structure", std::move(seq));
}

std::size_t FixedOrder::rank_of(Element e) const {
  auto it = std::find(sequence.begin(), sequence.end(), e);
  if (it == sequence.end()) throw ValidationError("fixed order '" + name + "' does not rank " + std::to_string(e));
  return static_cast<std::size_t>(it - sequence.begin());
}

double AtomSpec::atomic_mass() const {
  double total = 0;
  for (const auto& a : atoms) total += a.mass;
  return total;
}

void AtomSpec::validate(std::span<const Element> domain) const {
  std::set<double> locations;
  for (const auto& a : atoms) {
    if (!(a.mass > 0)) throw ValidationError("atom masses must be positive");
    if (!(a.location >= 0 && a.location <= 1)) throw ValidationError("atom locations must lie in [0, 1]");
    if (!locations.insert(a.location).second) throw ValidationError("atom locations must be distinct");
    if (a.tie_order >= orders.size()) throw ValidationError("atom without a tie-break order");
    for (Element e : domain) orders[a.tie_order].rank_of(e);
  }
  if (atomic_mass() > 1 + 1e-12) throw ValidationError("total atomic mass exceeds 1");
}

std::optional<std::size_t> AtomSpec::atom_at(double location) const {
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (atoms[i].location == location) return i;
  return std::nullopt;
}

AtomOrderSampler::AtomOrderSampler(std::vector<Element> domain, AtomSpec spec)
    : Sampler(std::move(domain)), spec_(std::move(spec)) {
  spec_.validate(this->domain());
}

double AtomOrderSampler::draw_latent(Rng& rng) const {
  const double u = uniform01(rng);
  double cumulative = 0;
  for (const auto& a : spec_.atoms) {
    cumulative += a.mass;
    if (u < cumulative) return a.location;
  }
  return uniform01(rng);
}

void AtomOrderSampler::order_sample(Sample& out) const {
  out.eta = out.latent;
  const auto& z = out.latent;
  order_by(out, [&](std::size_t i, std::size_t j) {
    if (z[i] != z[j]) return z[i] < z[j];
    auto atom = spec_.atom_at(z[i]);
    if (!atom) return false;
    return spec_.orders[spec_.atoms[*atom].tie_order].less(domain()[i], domain()[j]);
  });
}

void AtomOrderSampler::draw(Rng& rng, Sample& out) const {
  out.latent.resize(domain().size());
  for (auto& z : out.latent) z = draw_latent(rng);
  out.tiebreak.clear();
  out.tries = 1;
  order_sample(out);
}

ConditionedAtomSampler::ConditionedAtomSampler(std::vector<Element> points, AtomSpec spec, double atom,
                                               std::uint64_t max_tries)
    : AtomOrderSampler(std::move(points), std::move(spec)), atom_(atom), max_tries_(max_tries) {
  auto index = spec_.atom_at(atom);
  if (!index) throw PreconditionError("conditioning location is not an atom: acceptance probability is 0");
  mass_ = spec_.atoms[*index].mass;
}

void ConditionedAtomSampler::draw(Rng& rng, Sample& out) const {
  out.latent.resize(domain().size());
  out.tiebreak.clear();
  for (std::uint64_t tries = 1; tries <= max_tries_; ++tries) {
    bool hit = true;
    for (auto& z : out.latent) {
      z = draw_latent(rng);
      if (z != atom_) {
        hit = false;
        break;
      }
    }
    if (hit) {
      out.tries = tries;
      order_sample(out);
      return;
    }
  }
  throw ResourceError("conditioning exceeded " + std::to_string(max_tries_) +
                      " tries; observed acceptance rate 0/" + std::to_string(max_tries_));
}

ConditionedAtomSampler condition_on_atom(const AtomSpec& spec, double atom, std::vector<Element> points,
                                         std::uint64_t max_tries) {
  return ConditionedAtomSampler(std::move(points), spec, atom, max_tries);
}

// Two predicates -------------------------------------------------------------

PQOrderSampler::PQOrderSampler(const FinStructure& s) : Sampler(UniformOrderSampler::all_elements(s)) {
  auto P = s.signature().find("P"), Q = s.signature().find("Q");
  if (!P || !Q) throw PreconditionError("pq sampler needs a structure with predicates P and Q");
  in_p_.resize(s.size());
  for (std::size_t a = 0; a < s.size(); ++a) {
    const bool p = s.holds(*P, static_cast<Element>(a)), q = s.holds(*Q, static_cast<Element>(a));
    if (p == q) throw ValidationError("element " + std::to_string(a) + " is not in exactly one of P, Q");
    in_p_[a] = p;
  }
}

void PQOrderSampler::draw(Rng& rng, Sample& out) const {
  out.latent.resize(domain().size());
  for (auto& z : out.latent) z = uniform01(rng);
  out.eta.clear();
  out.tiebreak.clear();
  out.tries = 1;
  order_by(out, [&](std::size_t i, std::size_t j) {
    const bool pi = in_p_[static_cast<std::size_t>(domain()[i])], pj = in_p_[static_cast<std::size_t>(domain()[j])];
    if (pi != pj) return pi;
    return out.latent[i] < out.latent[j];
  });
}

// Bipartite minimum ----------------------------------------------------------

namespace {

std::vector<Element> elements_with(const FinStructure& s, std::string_view predicate) {
  const auto rel = s.signature().index_of(predicate);
  std::vector<Element> out;
  for (std::size_t a = 0; a < s.size(); ++a)
    if (s.holds(rel, static_cast<Element>(a))) out.push_back(static_cast<Element>(a));
  return out;
}

}  // namespace

BipartiteMinSampler::BipartiteMinSampler(const FinStructure& s) : Sampler(elements_with(s, "S0")) {
  const auto R = s.signature().index_of("R");
  const auto side = elements_with(s, "S1");
  points_ = side.size();
  for (Element a : domain()) {
    std::vector<std::size_t> nb;
    for (std::size_t j = 0; j < side.size(); ++j)
      if (s.holds(R, a, side[j])) nb.push_back(j);
    if (nb.size() != 2)
      throw ValidationError("S0 element " + std::to_string(a) + " has degree " + std::to_string(nb.size()) +
                            ", expected 2");
    nbrs_.emplace_back(nb[0], nb[1]);
  }
}

void BipartiteMinSampler::draw(Rng& rng, Sample& out) const {
  std::vector<double> eta(points_);
  for (auto& e : eta) e = uniform01(rng);
  const std::size_t k = domain().size();
  out.latent.resize(k);
  out.tiebreak.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.latent[i] = std::min(eta[nbrs_[i].first], eta[nbrs_[i].second]);
  for (auto& t : out.tiebreak) t = uniform01(rng);
  out.eta = out.latent;
  out.tries = 1;
  order_by(out, [&](std::size_t i, std::size_t j) {
    if (out.latent[i] != out.latent[j]) return out.latent[i] < out.latent[j];
    return out.tiebreak[i] < out.tiebreak[j];
  });
}

// Involution -----------------------------------------------------------------

namespace {

std::vector<Element> m_sort(const FinStructure& s) {
  if (s.has_sorts()) return s.elements_of_sort("M");
  const auto lt = s.signature().index_of("lt"), F = s.signature().index_of("F");
  std::vector<Element> out;
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = 0; b < s.size(); ++b)
      if (s.holds(F, static_cast<Element>(a), static_cast<Element>(b)) &&
          s.holds(lt, static_cast<Element>(b), static_cast<Element>(a)))
        out.push_back(static_cast<Element>(a));
  return out;
}

}  // namespace

InvolutionSampler::InvolutionSampler(const FinStructure& s) : Sampler(m_sort(s)) {
  const auto lt = s.signature().index_of("lt"), F = s.signature().index_of("F");
  lt_.assign(s.size(), std::vector<char>(s.size(), 0));
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = 0; b < s.size(); ++b) lt_[a][b] = s.holds(lt, static_cast<Element>(a), static_cast<Element>(b));
  for (Element a : domain()) {
    Element partner = -1;
    for (std::size_t b = 0; b < s.size(); ++b)
      if (s.holds(F, a, static_cast<Element>(b))) partner = static_cast<Element>(b);
    if (partner < 0) throw ValidationError("element " + std::to_string(a) + " has no involution partner");
    partner_.push_back(partner);
  }
}

void InvolutionSampler::draw(Rng& rng, Sample& out) const {
  const std::size_t k = domain().size();
  out.latent.resize(k);
  for (auto& bit : out.latent) bit = coin(rng) ? 1.0 : 0.0;
  out.eta.clear();
  out.tiebreak.clear();
  out.tries = 1;
  auto image = [&](std::size_t i) {
    return static_cast<std::size_t>(out.latent[i] != 0 ? partner_[i] : domain()[i]);
  };
  order_by(out, [&](std::size_t i, std::size_t j) { return lt_[image(i)][image(j)] != 0; });
}

// Dual functional --------------------------------------------------------------

DualFunctionalSampler::DualFunctionalSampler(const FinStructure& s) : Sampler(UniformOrderSampler::all_elements(s)) {
  const std::size_t n = s.size();
  if (n < 2 || !std::has_single_bit(n)) throw PreconditionError("dual sampler needs a vector space over F_2");
  d_ = std::countr_zero(n);
  const auto Z = s.signature().index_of("Z"), S = s.signature().index_of("S");
  if (!s.holds(Z, 0)) throw PreconditionError("dual sampler expects element 0 to be the zero vector");
  for (std::size_t a = 0; a < n; ++a)
    for (int i = 0; i < d_; ++i) {
      const Element t[3] = {static_cast<Element>(a), static_cast<Element>(std::size_t{1} << i),
                            static_cast<Element>(a ^ (std::size_t{1} << i))};
      if (!s.holds(S, t)) throw PreconditionError("element ids are not bit vectors of the addition");
    }
}

void DualFunctionalSampler::draw(Rng& rng, Sample& out) const {
  const std::uint64_t w = rng() >> (64 - d_);
  const std::size_t n = domain().size();
  out.latent.resize(n);
  for (std::size_t v = 0; v < n; ++v) out.latent[v] = std::popcount(v & w) & 1 ? 1.0 : 0.0;
  out.eta = out.latent;
  out.order.clear();
  out.rank.clear();
  out.tiebreak.clear();
  out.tries = 1;
}

// Self-test samplers -----------------------------------------------------------

EdgeBiasedSampler::EdgeBiasedSampler(const FinStructure& s, Element anchor, double beta)
    : Sampler(UniformOrderSampler::all_elements(s)) {
  shift_.resize(s.size());
  for (std::size_t a = 0; a < s.size(); ++a) shift_[a] = s.holds(0, anchor, static_cast<Element>(a)) ? beta : 0;
}

void EdgeBiasedSampler::draw(Rng& rng, Sample& out) const {
  const std::size_t k = domain().size();
  out.latent.resize(k);
  out.eta.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.latent[i] = uniform01(rng);
    out.eta[i] = out.latent[i] + shift_[i];
  }
  out.tiebreak.clear();
  out.tries = 1;
  order_by(out, [&](std::size_t i, std::size_t j) { return out.eta[i] < out.eta[j]; });
}

BrokenCouplingSampler::BrokenCouplingSampler(std::vector<Element> domain) : Sampler(std::move(domain)) {}

void BrokenCouplingSampler::draw(Rng& rng, Sample& out) const {
  const std::size_t k = domain().size();
  out.latent.resize(k);
  for (auto& z : out.latent) z = uniform01(rng);
  out.eta = out.latent;
  out.tiebreak.clear();
  out.tries = 1;
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(std::span<std::size_t>(perm), rng);
  out.order.resize(k);
  out.rank.resize(k);
  for (std::size_t r = 0; r < k; ++r) {
    out.order[r] = domain()[perm[r]];
    out.rank[perm[r]] = r;
  }
}

// Sequences ------------------------------------------------------------------

void IidUniformSequence::draw(Rng& rng, std::vector<double>& x) const {
  x.resize(length());
  for (auto& v : x) v = uniform01(rng);
}

BernoulliMixtureSequence::BernoulliMixtureSequence(std::size_t length, double p0, double p1, double w)
    : SequenceSampler(length), p0_(p0), p1_(p1), w_(w) {
  for (double p : {p0, p1, w})
    if (!(p >= 0 && p <= 1)) throw ValidationError("probabilities must lie in [0, 1]");
}

void BernoulliMixtureSequence::draw(Rng& rng, std::vector<double>& x) const {
  const double p = uniform01(rng) < w_ ? p0_ : p1_;
  x.resize(length());
  for (auto& v : x) v = uniform01(rng) < p ? 1.0 : 0.0;
}

double BernoulliMixtureSequence::between_variance() const { return w_ * (1 - w_) * (p1_ - p0_) * (p1_ - p0_); }

void ConstantMixtureSequence::draw(Rng& rng, std::vector<double>& x) const {
  x.assign(length(), coin(rng) ? 1.0 : 0.0);
}

void write_samples_csv(std::ostream& out, const Sampler& sampler, std::size_t n, std::uint64_t seed,
                       std::span<const Element> points) {
  std::vector<std::size_t> cols;
  std::vector<char> keep(sampler.domain().size(), points.empty() ? 1 : 0);
  if (points.empty()) {
    cols.resize(sampler.domain().size());
    std::iota(cols.begin(), cols.end(), std::size_t{0});
  } else {
    for (Element e : points) {
      cols.push_back(sampler.index_of(e));
      keep[cols.back()] = 1;
    }
  }
  const bool eta = sampler.exposes_eta();
  out << "sampleIndex," << (sampler.produces_order() ? "order" : "values");
  if (eta)
    for (auto c : cols) out << ",eta_" << sampler.domain()[c];
  out << '\n';
  out.precision(17);
  for_each_sample(sampler, n, seed, [&](std::size_t i, const Sample& s) {
    out << i << ',';
    bool first = true;
    if (sampler.produces_order()) {
      for (Element e : s.order) {
        if (!keep[sampler.index_of(e)]) continue;
        out << (first ? "" : " ") << e;
        first = false;
      }
    } else {
      for (auto c : cols) {
        out << (first ? "" : " ") << s.latent[c];
        first = false;
      }
    }
    if (eta)
      for (auto c : cols) out << ',' << s.eta[c];
    out << '\n';
  });
}

}  // namespace homord
