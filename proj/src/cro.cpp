#include "homord/cro.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "homord/errors.hpp"

namespace homord {

namespace {

using SparseRow = std::vector<std::pair<std::size_t, mpq_class>>;

std::size_t max_size_for(ClassKind kind) {
  switch (kind) {
    case ClassKind::pure_set:
    case ClassKind::two_predicate_PQ: return 6;
    case ClassKind::graph:
    case ClassKind::kn_free_graph:
    case ClassKind::tournament:
    case ClassKind::linear_order: return 5;
    default: return 0;
  }
}

// All labelled members of the class on {0..m-1}.
std::vector<FinStructure> labelled_members(const FraisseClassSpec& spec, std::size_t m) {
  const auto& sig = spec.signature();
  std::vector<FinStructure> out;
  std::vector<std::pair<Element, Element>> pairs;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) pairs.emplace_back(static_cast<Element>(a), static_cast<Element>(b));
  switch (spec.kind()) {
    case ClassKind::pure_set: out.push_back(make_structure(sig, m, {})); break;
    case ClassKind::graph:
    case ClassKind::kn_free_graph:
    case ClassKind::tournament:
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs.size()); ++mask) {
        RelationTables t;
        auto& e = t["E"];
        for (std::size_t i = 0; i < pairs.size(); ++i) {
          auto [a, b] = pairs[i];
          const bool bit = mask >> i & 1;
          if (spec.kind() == ClassKind::tournament) {
            e.push_back(bit ? Tuple{a, b} : Tuple{b, a});
          } else if (bit) {
            e.push_back({a, b});
            e.push_back({b, a});
          }
        }
        auto s = make_structure(sig, m, t);
        if (spec.accepts(s)) out.push_back(std::move(s));
      }
      break;
    case ClassKind::linear_order: {
      std::vector<Element> perm(m);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        RelationTables t;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = i + 1; j < m; ++j) t["lt"].push_back({perm[i], perm[j]});
        out.push_back(make_structure(sig, m, t));
      } while (std::next_permutation(perm.begin(), perm.end()));
      break;
    }
    case ClassKind::two_predicate_PQ:
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        RelationTables t;
        for (std::size_t a = 0; a < m; ++a) t[(mask >> a & 1) ? "Q" : "P"].push_back({static_cast<Element>(a)});
        out.push_back(make_structure(sig, m, t));
      }
      break;
    default: break;
  }
  return out;
}

std::vector<std::size_t> column_order(std::size_t columns, const std::vector<std::size_t>& priority) {
  std::vector<std::size_t> position(columns, 0);
  std::vector<char> seen(columns, 0);
  std::size_t next = 0;
  for (auto c : priority) {
    if (c < columns && !seen[c]) {
      seen[c] = 1;
      position[c] = next++;
    }
  }
  for (std::size_t c = 0; c < columns; ++c)
    if (!seen[c]) position[c] = next++;
  return position;
}

// row - factor * pivot, both sorted by column position.
SparseRow subtract(const SparseRow& row, const mpq_class& factor, const SparseRow& pivot,
                   const std::vector<std::size_t>& pos) {
  SparseRow out;
  out.reserve(row.size() + pivot.size());
  std::size_t i = 0, j = 0;
  while (i < row.size() || j < pivot.size()) {
    if (j == pivot.size() || (i < row.size() && pos[row[i].first] < pos[pivot[j].first])) {
      out.push_back(row[i++]);
    } else if (i == row.size() || pos[pivot[j].first] < pos[row[i].first]) {
      out.emplace_back(pivot[j].first, -factor * pivot[j].second);
      ++j;
    } else {
      mpq_class v = row[i].second - factor * pivot[j].second;
      if (v != 0) out.emplace_back(row[i].first, v);
      ++i;
      ++j;
    }
  }
  return out;
}

// Row echelon form; returns pivot rows keyed by the position of their leading column.
std::map<std::size_t, SparseRow> echelon(const std::vector<SparseRow>& rows, const std::vector<std::size_t>& pos) {
  std::map<std::size_t, SparseRow> pivots;
  for (SparseRow row : rows) {
    std::sort(row.begin(), row.end(), [&](const auto& x, const auto& y) { return pos[x.first] < pos[y.first]; });
    row.erase(std::remove_if(row.begin(), row.end(), [](const auto& t) { return t.second == 0; }), row.end());
    while (!row.empty()) {
      const std::size_t lead = pos[row.front().first];
      auto it = pivots.find(lead);
      if (it == pivots.end()) {
        const mpq_class scale = row.front().second;
        for (auto& t : row) t.second /= scale;
        pivots.emplace(lead, std::move(row));
        break;
      }
      row = subtract(row, row.front().second, it->second, pos);
    }
  }
  return pivots;
}

std::vector<SparseRow> coefficient_rows(const std::vector<CRORow>& rows) {
  std::vector<SparseRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.terms);
  return out;
}

}  // namespace

std::vector<OrderedType> enumerate_ordered_types(const FraisseClassSpec& spec, std::size_t m) {
  const std::size_t bound = max_size_for(spec.kind());
  if (bound == 0 || !spec.hereditary())
    throw PreconditionError("ordered-type enumeration supports hereditary relational classes only, not " + spec.name());
  if (m > bound)
    throw ResourceError("ordered-type enumeration for " + spec.name() + " is bounded by size " + std::to_string(bound));
  std::vector<OrderedType> out;
  std::vector<Element> identity(m);
  std::iota(identity.begin(), identity.end(), 0);
  for (auto& member : labelled_members(spec, m)) {
    OrderedType t;
    t.size = m;
    t.code = canonical_type(member, identity);
    t.base = t.code;
    std::vector<Element> perm = identity;
    do {
      TypeCode c = canonical_type(member, perm);
      if (c == t.code) ++t.count;
      if (c < t.base) t.base = c;
    } while (std::next_permutation(perm.begin(), perm.end()));
    t.representative = std::move(member);
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.code < y.code; });
  return out;
}

std::vector<mpq_class> CROSystem::uniform() const {
  std::vector<mpq_class> x;
  for (const auto& v : variables) {
    mpz_class f = 1;
    for (std::size_t i = 2; i <= v.size; ++i) f *= static_cast<unsigned long>(i);
    x.emplace_back(mpz_class(1), f);
  }
  return x;
}

bool CROSystem::satisfies(const std::vector<mpq_class>& x) const {
  if (x.size() != variables.size()) return false;
  for (const auto& v : x)
    if (v < 0) return false;
  for (const auto& row : rows) {
    mpq_class lhs = 0;
    for (const auto& [i, c] : row.terms) lhs += c * x[i];
    if (lhs != row.rhs) return false;
  }
  return true;
}

CROSystem build_cro_system(const FraisseClassSpec& spec, std::size_t n) {
  if (n < 1) throw PreconditionError("truncation size must be at least 1");
  CROSystem sys;
  sys.class_name = spec.name();
  sys.n = n;
  for (std::size_t m = 1; m <= n; ++m)
    for (auto& t : enumerate_ordered_types(spec, m)) sys.variables.push_back(std::move(t));
  for (std::size_t i = 0; i < sys.variables.size(); ++i) sys.index.emplace(sys.variables[i].code, i);

  // Level mass, one row per base class.
  std::map<TypeCode, std::vector<std::size_t>> by_base;
  for (std::size_t i = 0; i < sys.variables.size(); ++i) by_base[sys.variables[i].base].push_back(i);
  for (const auto& [base, members] : by_base) {
    CRORow row;
    for (auto i : members) row.terms.emplace_back(i, mpq_class(static_cast<unsigned long>(sys.variables[i].count)));
    row.rhs = 1;
    sys.rows.push_back(std::move(row));
  }
  sys.mass_rows = sys.rows.size();

  // One-point consistency for every base of size 2..n.
  std::set<std::vector<std::pair<std::size_t, int>>> seen;
  for (const auto& [base, members] : by_base) {
    const auto& B = sys.variables[members.front()].representative;
    const std::size_t m1 = B.size();
    if (m1 < 2) continue;
    for (std::size_t v = 0; v < m1; ++v) {
      std::vector<Element> rest;
      for (std::size_t a = 0; a < m1; ++a)
        if (a != v) rest.push_back(static_cast<Element>(a));
      std::sort(rest.begin(), rest.end());
      do {
        std::map<std::size_t, int> coeff;
        coeff[sys.index.at(canonical_type(B, rest))] -= 1;
        for (std::size_t p = 0; p <= rest.size(); ++p) {
          std::vector<Element> ext = rest;
          ext.insert(ext.begin() + static_cast<std::ptrdiff_t>(p), static_cast<Element>(v));
          coeff[sys.index.at(canonical_type(B, ext))] += 1;
        }
        std::vector<std::pair<std::size_t, int>> key(coeff.begin(), coeff.end());
        if (!seen.insert(key).second) continue;
        CRORow row;
        for (auto [i, c] : key)
          if (c != 0) row.terms.emplace_back(i, mpq_class(c));
        row.rhs = 0;
        sys.rows.push_back(std::move(row));
      } while (std::next_permutation(rest.begin(), rest.end()));
    }
  }
  sys.consistency_rows = sys.rows.size() - sys.mass_rows;
  if (!sys.satisfies(sys.uniform())) throw std::logic_error("uniform assignment fails the consistency system");
  return sys;
}

std::size_t exact_rank(const std::vector<CRORow>& rows, std::size_t columns,
                       const std::vector<std::size_t>& column_priority) {
  return echelon(coefficient_rows(rows), column_order(columns, column_priority)).size();
}

UniquenessReport uniqueness_report(const CROSystem& system, std::size_t dirac_limit) {
  UniquenessReport report;
  report.variables = system.variables.size();
  report.equations = system.rows.size();
  report.uniform_feasible = system.satisfies(system.uniform());
  report.rank = exact_rank(system.rows, report.variables);
  report.nullspace_dim = report.variables - report.rank;

  // Dirac search: one base class at a time in size order, choosing the single
  // type that carries mass 1. Only types with count 1 can do so.
  std::map<TypeCode, std::vector<std::size_t>> by_base;
  for (std::size_t i = 0; i < system.variables.size(); ++i) by_base[system.variables[i].base].push_back(i);
  std::vector<std::vector<std::size_t>> classes;
  for (auto& [base, members] : by_base) classes.push_back(members);
  std::stable_sort(classes.begin(), classes.end(), [&](const auto& x, const auto& y) {
    return system.variables[x.front()].size < system.variables[y.front()].size;
  });
  std::vector<std::size_t> class_of(system.variables.size());
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (auto i : classes[c]) class_of[i] = c;
  // Consistency rows are checked once every variable in them is assigned.
  std::vector<std::vector<std::size_t>> rows_ready_at(classes.size());
  for (std::size_t r = system.mass_rows; r < system.rows.size(); ++r) {
    std::size_t last = 0;
    for (const auto& [i, c] : system.rows[r].terms) last = std::max(last, class_of[i]);
    rows_ready_at[last].push_back(r);
  }

  std::vector<int> x(system.variables.size(), -1);
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t)> search = [&](std::size_t c) {
    if (!report.dirac_search_complete) return;
    if (c == classes.size()) {
      if (report.dirac_solutions.size() >= dirac_limit) {
        report.dirac_search_complete = false;
        return;
      }
      report.dirac_solutions.push_back(chosen);
      return;
    }
    for (auto pick : classes[c]) {
      if (system.variables[pick].count != 1) continue;
      for (auto i : classes[c]) x[i] = i == pick ? 1 : 0;
      bool ok = true;
      for (auto r : rows_ready_at[c]) {
        long sum = 0;
        for (const auto& [i, coeff] : system.rows[r].terms) sum += coeff.get_num().get_si() * x[i];
        if (sum != 0) {
          ok = false;
          break;
        }
      }
      if (ok) {
        chosen.push_back(pick);
        search(c + 1);
        chosen.pop_back();
      }
    }
    for (auto i : classes[c]) x[i] = -1;
  };
  search(0);

  for (const auto& sol : report.dirac_solutions) {
    std::vector<mpq_class> point(system.variables.size(), 0);
    for (auto i : sol) point[i] = 1;
    if (!system.satisfies(point)) throw std::logic_error("Dirac candidate fails the equality system");
  }
  return report;
}

ProjectedDimension projected_dimension(const CROSystem& system, std::size_t level) {
  ProjectedDimension out;
  const std::size_t V = system.variables.size();
  std::vector<std::size_t> target, others;
  for (std::size_t i = 0; i < V; ++i) (system.variables[i].size == level ? target : others).push_back(i);
  out.target_variables = target.size();
  if (target.empty()) return out;

  // rank([A; E_T]) - rank(A) = dim(kernel) - dim(kernel with x_T = 0).
  std::vector<CRORow> augmented = system.rows;
  for (auto t : target) augmented.push_back(CRORow{{{t, mpq_class(1)}}, 0});
  out.by_rank = exact_rank(augmented, V) - exact_rank(system.rows, V);

  // Eliminate every non-target variable first; echelon rows that lead in the
  // target block constrain the projection.
  const auto pos = column_order(V, others);
  auto pivots = echelon(coefficient_rows(system.rows), pos);
  std::size_t surviving = 0;
  for (const auto& [lead, row] : pivots)
    if (lead >= others.size()) ++surviving;
  out.by_elimination = target.size() - surviving;
  return out;
}

}  // namespace homord
