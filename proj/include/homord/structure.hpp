#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace homord {

/// Universe elements are always 0..n-1.
using Element = int;
using Tuple = std::vector<Element>;

struct RelationSymbol {
  std::string name;
  int arity = 1;
  // Declared properties of binary relations, enforced by make_structure.
  bool symmetric = false;
  bool irreflexive = false;

  bool operator==(const RelationSymbol&) const = default;
};

/// A finite relational signature. No function symbols: functions such as an
/// involution are carried as binary relations with a functionality check in
/// the class that uses them.
class Signature {
 public:
  Signature() = default;
  explicit Signature(std::vector<RelationSymbol> relations);

  std::size_t size() const { return relations_.size(); }
  bool empty() const { return relations_.empty(); }
  const RelationSymbol& operator[](std::size_t i) const { return relations_[i]; }
  const std::vector<RelationSymbol>& relations() const { return relations_; }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws ValidationError when the name is unknown.
  std::size_t index_of(std::string_view name) const;

  bool operator==(const Signature&) const = default;

 private:
  std::vector<RelationSymbol> relations_;
};

/// Tuples of one relation, stored as sorted base-n codes with an optional
/// dense bitmap for fast membership.
class RelationTable {
 public:
  RelationTable() = default;
  RelationTable(int arity, std::size_t universe, std::vector<std::uint64_t> codes);

  int arity() const { return arity_; }
  std::size_t size() const { return codes_.size(); }
  bool contains(std::span<const Element> tuple) const;
  bool contains_code(std::uint64_t code) const;
  std::uint64_t encode(std::span<const Element> tuple) const;
  Tuple decode(std::uint64_t code) const;
  const std::vector<std::uint64_t>& codes() const { return codes_; }

  bool operator==(const RelationTable& o) const { return arity_ == o.arity_ && codes_ == o.codes_; }

 private:
  int arity_ = 1;
  std::size_t universe_ = 0;
  std::vector<std::uint64_t> codes_;
  std::vector<std::uint64_t> dense_;  // bit per code; empty when too large
};

/// Relation tables keyed by relation name; absent names are empty relations.
using RelationTables = std::map<std::string, std::vector<Tuple>>;

/// Immutable finite relational structure on {0, ..., n-1}, optionally with a
/// sort label per element.
class FinStructure {
 public:
  FinStructure() = default;

  const Signature& signature() const { return signature_; }
  std::size_t size() const { return size_; }

  const RelationTable& table(std::size_t rel) const { return tables_[rel]; }
  const RelationTable& table(std::string_view name) const;
  bool holds(std::size_t rel, std::span<const Element> tuple) const {
    return tables_[rel].contains(tuple);
  }
  bool holds(std::size_t rel, Element a) const;
  bool holds(std::size_t rel, Element a, Element b) const;
  std::vector<Tuple> tuples(std::size_t rel) const;

  bool has_sorts() const { return !sorts_.empty(); }
  /// Empty string when the structure is unsorted.
  const std::string& sort_of(Element a) const;
  const std::vector<std::string>& sort_labels() const { return sorts_; }
  std::vector<Element> elements_of_sort(std::string_view label) const;

  bool operator==(const FinStructure&) const = default;

 private:
  friend FinStructure make_structure(Signature, std::size_t, const RelationTables&,
                                     std::vector<std::string>);
  Signature signature_;
  std::size_t size_ = 0;
  std::vector<RelationTable> tables_;
  std::vector<std::string> sorts_;
};

/// Validates eagerly: tuple bounds, arities, unknown names, and declared
/// symmetry/irreflexivity. `sorts` is either empty or one label per element.
FinStructure make_structure(Signature signature, std::size_t size, const RelationTables& tables,
                            std::vector<std::string> sorts = {});

/// Structure on {0..k-1} pulled back along i -> points[i].
FinStructure induced_substructure(const FinStructure& s, std::span<const Element> points);

/// Canonical code of the quantifier-free type of a tuple with positions named.
struct TypeCode {
  std::string bytes;

  std::size_t arity() const { return bytes.empty() ? 0 : static_cast<unsigned char>(bytes[0]); }
  std::string hex() const;
  static TypeCode from_hex(std::string_view hex);

  auto operator<=>(const TypeCode&) const = default;
};

TypeCode canonical_type(const FinStructure& s, std::span<const Element> points);

/// All type codes realized by distinct k-tuples. k = 0 yields the empty type.
std::set<TypeCode> enumerate_types(const FinStructure& s, std::size_t k);

/// True when `map` (indexed by elements of s) is a bijection onto t that
/// preserves and reflects every relation and sort label.
bool is_isomorphism(const FinStructure& s, const FinStructure& t, std::span<const Element> map);

/// Relation-preserving bijection s -> t, if any.
std::optional<std::vector<Element>> find_isomorphism(const FinStructure& s, const FinStructure& t);

/// Injective map small -> big that is an isomorphism onto its induced image.
std::optional<std::vector<Element>> find_embedding(const FinStructure& small, const FinStructure& big);

/// Isomorphic copy in which element x is renamed new_of_old[x].
FinStructure relabel(const FinStructure& s, std::span<const Element> new_of_old);

/// Calls `visit` for every sequence of k distinct elements; stops early when
/// `visit` returns false.
template <typename Visit>
void for_each_distinct_tuple(std::size_t n, std::size_t k, Visit&& visit) {
  if (k > n) return;
  Tuple t(k);
  std::vector<char> used(n, 0);
  std::size_t depth = 0;
  std::vector<std::size_t> next(k + 1, 0);
  if (k == 0) {
    visit(std::span<const Element>(t));
    return;
  }
  while (true) {
    if (depth == k) {
      if (!visit(std::span<const Element>(t))) return;
      --depth;
      used[t[depth]] = 0;
      continue;
    }
    std::size_t& c = next[depth];
    while (c < n && used[c]) ++c;
    if (c == n) {
      if (depth == 0) return;
      c = 0;
      --depth;
      used[t[depth]] = 0;
      continue;
    }
    t[depth] = static_cast<Element>(c);
    used[c] = 1;
    ++c;
    ++depth;
    if (depth < k) next[depth] = 0;
  }
}

}  // namespace homord
