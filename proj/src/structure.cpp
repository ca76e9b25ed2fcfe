#include "homord/structure.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <unordered_set>

#include "homord/errors.hpp"
#include "homord/morphism.hpp"

namespace homord {

namespace {

constexpr std::uint64_t kDenseBitLimit = std::uint64_t{1} << 24;

// n^arity, or nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> code_space(std::size_t n, int arity) {
  std::uint64_t total = 1;
  for (int i = 0; i < arity; ++i) {
    if (n != 0 && total > UINT64_MAX / n) return std::nullopt;
    total *= n;
  }
  return total;
}

}  // namespace

Signature::Signature(std::vector<RelationSymbol> relations) : relations_(std::move(relations)) {
  std::set<std::string> seen;
  for (const auto& r : relations_) {
    if (r.name.empty()) throw ValidationError("relation name must be non-empty");
    if (r.arity < 1) throw ValidationError("relation '" + r.name + "' must have arity >= 1");
    if ((r.symmetric || r.irreflexive) && r.arity != 2)
      throw ValidationError("relation '" + r.name + "': symmetry/irreflexivity need arity 2");
    if (!seen.insert(r.name).second) throw ValidationError("duplicate relation name '" + r.name + "'");
  }
}

std::optional<std::size_t> Signature::find(std::string_view name) const {
  for (std::size_t i = 0; i < relations_.size(); ++i)
    if (relations_[i].name == name) return i;
  return std::nullopt;
}

std::size_t Signature::index_of(std::string_view name) const {
  auto i = find(name);
  if (!i) throw ValidationError("unknown relation '" + std::string(name) + "'");
  return *i;
}

RelationTable::RelationTable(int arity, std::size_t universe, std::vector<std::uint64_t> codes)
    : arity_(arity), universe_(universe), codes_(std::move(codes)) {
  std::sort(codes_.begin(), codes_.end());
  codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
  auto space = code_space(universe, arity);
  if (space && *space <= kDenseBitLimit) {
    dense_.assign((*space + 63) / 64, 0);
    for (auto c : codes_) dense_[c >> 6] |= std::uint64_t{1} << (c & 63);
  }
}

std::uint64_t RelationTable::encode(std::span<const Element> tuple) const {
  std::uint64_t code = 0;
  for (Element e : tuple) code = code * universe_ + static_cast<std::uint64_t>(e);
  return code;
}

Tuple RelationTable::decode(std::uint64_t code) const {
  Tuple t(static_cast<std::size_t>(arity_));
  for (int i = arity_ - 1; i >= 0; --i) {
    t[static_cast<std::size_t>(i)] = static_cast<Element>(code % universe_);
    code /= universe_;
  }
  return t;
}

bool RelationTable::contains_code(std::uint64_t code) const {
  if (!dense_.empty()) return (dense_[code >> 6] >> (code & 63)) & 1;
  return std::binary_search(codes_.begin(), codes_.end(), code);
}

bool RelationTable::contains(std::span<const Element> tuple) const {
  if (tuple.size() != static_cast<std::size_t>(arity_)) return false;
  return contains_code(encode(tuple));
}

const RelationTable& FinStructure::table(std::string_view name) const {
  return tables_[signature_.index_of(name)];
}

bool FinStructure::holds(std::size_t rel, Element a) const {
  const Element t[1] = {a};
  return tables_[rel].contains(t);
}

bool FinStructure::holds(std::size_t rel, Element a, Element b) const {
  const Element t[2] = {a, b};
  return tables_[rel].contains(t);
}

std::vector<Tuple> FinStructure::tuples(std::size_t rel) const {
  std::vector<Tuple> out;
  out.reserve(tables_[rel].size());
  for (auto c : tables_[rel].codes()) out.push_back(tables_[rel].decode(c));
  return out;
}

const std::string& FinStructure::sort_of(Element a) const {
  static const std::string kNone;
  return sorts_.empty() ? kNone : sorts_[static_cast<std::size_t>(a)];
}

std::vector<Element> FinStructure::elements_of_sort(std::string_view label) const {
  std::vector<Element> out;
  for (std::size_t i = 0; i < sorts_.size(); ++i)
    if (sorts_[i] == label) out.push_back(static_cast<Element>(i));
  return out;
}

FinStructure make_structure(Signature signature, std::size_t size, const RelationTables& tables,
                            std::vector<std::string> sorts) {
  if (!sorts.empty() && sorts.size() != size)
    throw ValidationError("sort labels must be given for every element");
  for (const auto& [name, rows] : tables) {
    if (!signature.find(name)) throw ValidationError("relation '" + name + "' not in signature");
  }

  FinStructure s;
  s.size_ = size;
  s.tables_.reserve(signature.size());
  for (const auto& sym : signature.relations()) {
    auto space = code_space(size, sym.arity);
    if (!space) throw ResourceError("relation '" + sym.name + "' does not fit 64-bit tuple codes");
    std::vector<std::uint64_t> codes;
    auto it = tables.find(sym.name);
    if (it != tables.end()) {
      codes.reserve(it->second.size());
      for (const auto& t : it->second) {
        if (t.size() != static_cast<std::size_t>(sym.arity))
          throw ValidationError("arity mismatch in relation '" + sym.name + "'");
        std::uint64_t code = 0;
        for (Element e : t) {
          if (e < 0 || static_cast<std::size_t>(e) >= size)
            throw ValidationError("tuple of '" + sym.name + "' leaves the universe");
          code = code * size + static_cast<std::uint64_t>(e);
        }
        codes.push_back(code);
      }
    }
    RelationTable table(sym.arity, size, std::move(codes));
    if (sym.irreflexive || sym.symmetric) {
      for (auto c : table.codes()) {
        Tuple t = table.decode(c);
        if (sym.irreflexive && t[0] == t[1])
          throw ValidationError("relation '" + sym.name + "' declared irreflexive has a loop");
        const Element rev[2] = {t[1], t[0]};
        if (sym.symmetric && !table.contains(rev))
          throw ValidationError("relation '" + sym.name + "' declared symmetric is missing (" +
                                std::to_string(t[1]) + "," + std::to_string(t[0]) + ")");
      }
    }
    s.tables_.push_back(std::move(table));
  }
  s.signature_ = std::move(signature);
  s.sorts_ = std::move(sorts);
  return s;
}

namespace {

void check_points(const FinStructure& s, std::span<const Element> points) {
  std::vector<char> seen(s.size(), 0);
  for (Element p : points) {
    if (p < 0 || static_cast<std::size_t>(p) >= s.size())
      throw PreconditionError("point " + std::to_string(p) + " outside the universe");
    if (seen[static_cast<std::size_t>(p)]++) throw PreconditionError("repeated point " + std::to_string(p));
  }
}

// Visits every position tuple in k^arity in lexicographic order.
template <typename Visit>
void for_each_position_tuple(std::size_t k, int arity, Visit&& visit) {
  if (k == 0) return;
  std::vector<std::size_t> idx(static_cast<std::size_t>(arity), 0);
  while (true) {
    visit(idx);
    int i = arity - 1;
    while (i >= 0 && ++idx[static_cast<std::size_t>(i)] == k) idx[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) return;
  }
}

}  // namespace

FinStructure induced_substructure(const FinStructure& s, std::span<const Element> points) {
  check_points(s, points);
  const std::size_t k = points.size();
  RelationTables tables;
  Tuple image;
  for (std::size_t r = 0; r < s.signature().size(); ++r) {
    const auto& sym = s.signature()[r];
    auto& rows = tables[sym.name];
    for_each_position_tuple(k, sym.arity, [&](const std::vector<std::size_t>& idx) {
      image.resize(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) image[i] = points[idx[i]];
      if (s.holds(r, image)) rows.emplace_back(idx.begin(), idx.end());
    });
  }
  std::vector<std::string> sorts;
  if (s.has_sorts())
    for (Element p : points) sorts.push_back(s.sort_of(p));
  return make_structure(s.signature(), k, tables, std::move(sorts));
}

std::string TypeCode::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 15]);
  }
  return out;
}

TypeCode TypeCode::from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ValidationError("bad hex digit in type code");
  };
  if (hex.size() % 2) throw ValidationError("type code hex has odd length");
  TypeCode t;
  for (std::size_t i = 0; i < hex.size(); i += 2)
    t.bytes.push_back(static_cast<char>(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
  return t;
}

TypeCode canonical_type(const FinStructure& s, std::span<const Element> points) {
  check_points(s, points);
  const std::size_t k = points.size();
  if (k > 255) throw PreconditionError("type codes support tuples of length <= 255");
  TypeCode code;
  code.bytes.push_back(static_cast<char>(k));
  if (s.has_sorts()) {
    for (Element p : points) {
      const auto& label = s.sort_of(p);
      code.bytes.push_back(static_cast<char>(std::min<std::size_t>(label.size(), 255)));
      code.bytes.append(label, 0, 255);
    }
  }
  unsigned char acc = 0;
  int nbits = 0;
  Tuple image;
  for (std::size_t r = 0; r < s.signature().size(); ++r) {
    for_each_position_tuple(k, s.signature()[r].arity, [&](const std::vector<std::size_t>& idx) {
      image.resize(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) image[i] = points[idx[i]];
      acc = static_cast<unsigned char>(acc << 1 | (s.holds(r, image) ? 1 : 0));
      if (++nbits == 8) {
        code.bytes.push_back(static_cast<char>(acc));
        acc = 0;
        nbits = 0;
      }
    });
  }
  if (nbits) code.bytes.push_back(static_cast<char>(acc << (8 - nbits)));
  return code;
}

std::set<TypeCode> enumerate_types(const FinStructure& s, std::size_t k) {
  if (k > s.size()) throw PreconditionError("k exceeds the structure size");
  std::set<TypeCode> out;
  for_each_distinct_tuple(s.size(), k, [&](std::span<const Element> t) {
    out.insert(canonical_type(s, t));
    return true;
  });
  return out;
}

bool is_isomorphism(const FinStructure& s, const FinStructure& t, std::span<const Element> map) {
  if (!(s.signature() == t.signature()) || s.size() != t.size() || map.size() != s.size()) return false;
  std::vector<char> hit(t.size(), 0);
  for (Element y : map) {
    if (y < 0 || static_cast<std::size_t>(y) >= t.size() || hit[static_cast<std::size_t>(y)]++) return false;
  }
  for (std::size_t a = 0; a < s.size(); ++a)
    if (s.sort_of(static_cast<Element>(a)) != t.sort_of(map[a])) return false;
  Tuple image;
  for (std::size_t r = 0; r < s.signature().size(); ++r) {
    // Same tuple count plus preservation gives reflection for a bijection.
    if (s.table(r).size() != t.table(r).size()) return false;
    for (auto c : s.table(r).codes()) {
      Tuple tup = s.table(r).decode(c);
      image.resize(tup.size());
      for (std::size_t i = 0; i < tup.size(); ++i) image[i] = map[static_cast<std::size_t>(tup[i])];
      if (!t.holds(r, image)) return false;
    }
  }
  return true;
}

std::optional<std::vector<Element>> find_isomorphism(const FinStructure& s, const FinStructure& t) {
  if (!(s.signature() == t.signature()) || s.size() != t.size()) return std::nullopt;
  MorphismSearch search(s, t);
  return search.find_one({});
}

std::optional<std::vector<Element>> find_embedding(const FinStructure& small, const FinStructure& big) {
  if (!(small.signature() == big.signature()) || small.size() > big.size()) return std::nullopt;
  const std::size_t k = small.size();
  std::vector<Element> image;
  std::vector<char> used(big.size(), 0);
  std::vector<Element> prefix;
  std::function<bool()> extend = [&]() {
    const std::size_t i = image.size();
    if (i == k) return true;
    for (std::size_t y = 0; y < big.size(); ++y) {
      if (used[y]) continue;
      image.push_back(static_cast<Element>(y));
      prefix.push_back(static_cast<Element>(i));
      if (canonical_type(small, prefix) == canonical_type(big, image)) {
        used[y] = 1;
        if (extend()) return true;
        used[y] = 0;
      }
      image.pop_back();
      prefix.pop_back();
    }
    return false;
  };
  if (!extend()) return std::nullopt;
  return image;
}

FinStructure relabel(const FinStructure& s, std::span<const Element> new_of_old) {
  if (new_of_old.size() != s.size()) throw PreconditionError("relabelling must cover the universe");
  std::vector<char> hit(s.size(), 0);
  for (Element e : new_of_old)
    if (e < 0 || static_cast<std::size_t>(e) >= s.size() || hit[static_cast<std::size_t>(e)]++)
      throw PreconditionError("relabelling is not a permutation");
  RelationTables tables;
  for (std::size_t r = 0; r < s.signature().size(); ++r) {
    auto& rows = tables[s.signature()[r].name];
    for (auto t : s.tuples(r)) {
      for (auto& e : t) e = new_of_old[static_cast<std::size_t>(e)];
      rows.push_back(std::move(t));
    }
  }
  std::vector<std::string> sorts;
  if (s.has_sorts()) {
    sorts.resize(s.size());
    for (std::size_t x = 0; x < s.size(); ++x) sorts[static_cast<std::size_t>(new_of_old[x])] = s.sort_of(static_cast<Element>(x));
  }
  return make_structure(s.signature(), s.size(), tables, std::move(sorts));
}

}  // namespace homord
