#include <doctest.h>

#include <cstdint>
#include <map>
#include <numeric>

#include "homord/cro.hpp"
#include "homord/errors.hpp"

using namespace homord;

namespace {

// Dense rank modulo a large prime; a lower bound on the rational rank that is
// equal to it unless the prime divides some minor.
std::size_t rank_mod_p(const std::vector<CRORow>& rows, std::size_t columns) {
  constexpr std::uint64_t p = 1'000'000'007ULL;
  auto reduce = [](const mpq_class& q) {
    mpz_class num = q.get_num() % mpz_class(static_cast<unsigned long>(p));
    if (num < 0) num += static_cast<unsigned long>(p);
    mpz_class den = q.get_den() % mpz_class(static_cast<unsigned long>(p));
    mpz_class inv;
    mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), mpz_class(static_cast<unsigned long>(p)).get_mpz_t());
    return static_cast<std::uint64_t>(mpz_class(num * inv % static_cast<unsigned long>(p)).get_ui());
  };
  auto power = [](std::uint64_t b, std::uint64_t e) {
    std::uint64_t r = 1;
    for (b %= p; e; e >>= 1, b = b * b % p)
      if (e & 1) r = r * b % p;
    return r;
  };
  std::vector<std::vector<std::uint64_t>> m(rows.size(), std::vector<std::uint64_t>(columns, 0));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [c, v] : rows[r].terms) m[r][c] = reduce(v);
  std::size_t rank = 0;
  for (std::size_t c = 0; c < columns && rank < m.size(); ++c) {
    std::size_t piv = rank;
    while (piv < m.size() && m[piv][c] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[rank]);
    const std::uint64_t inv = power(m[rank][c], p - 2);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || m[r][c] == 0) continue;
      const std::uint64_t f = m[r][c] * inv % p;
      for (std::size_t k = c; k < columns; ++k) m[r][k] = (m[r][k] + (p - f) * m[rank][k]) % p;
    }
    ++rank;
  }
  return rank;
}

std::size_t factorial_of(std::size_t m) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= m; ++i) f *= i;
  return f;
}

}  // namespace

TEST_CASE("ordered types of graphs are labelled graphs") {
  const auto spec = FraisseClassSpec::parse("graph");
  const std::size_t unlabelled[] = {0, 1, 2, 4, 11};
  for (std::size_t m = 1; m <= 4; ++m) {
    const auto types = enumerate_ordered_types(spec, m);
    CHECK(types.size() == (std::size_t{1} << (m * (m - 1) / 2)));
    // Orbit-stabilizer: the orders of one base split into types of size |Aut|.
    std::map<TypeCode, std::size_t> orders_per_base;
    for (const auto& t : types) orders_per_base[t.base] += t.count;
    CHECK(orders_per_base.size() == unlabelled[m]);
    for (const auto& [base, total] : orders_per_base) CHECK(total == factorial_of(m));
  }
}

TEST_CASE("ordered types of small classes") {
  CHECK(enumerate_ordered_types(FraisseClassSpec::parse("linear_order"), 4).size() == 24);
  CHECK(enumerate_ordered_types(FraisseClassSpec::parse("tournament"), 3).size() == 8);
  CHECK(enumerate_ordered_types(FraisseClassSpec::parse("kn_free_graph:3"), 3).size() == 7);
  const auto pure = enumerate_ordered_types(FraisseClassSpec::parse("pure_set"), 5);
  REQUIRE(pure.size() == 1);
  CHECK(pure.front().count == 120);
  CHECK(enumerate_ordered_types(FraisseClassSpec::parse("two_predicate_PQ"), 3).size() == 8);
  CHECK_THROWS_AS(enumerate_ordered_types(FraisseClassSpec::parse("graph"), 6), ResourceError);
  CHECK_THROWS_AS(build_cro_system(FraisseClassSpec::parse("bipartite_deg2"), 3), PreconditionError);
  CHECK_THROWS_AS(build_cro_system(FraisseClassSpec::parse("f2_vector_space:2"), 2), PreconditionError);
}

TEST_CASE("graph system sizes and uniform feasibility") {
  const auto spec = FraisseClassSpec::parse("graph");
  auto two = build_cro_system(spec, 2);
  CHECK(two.variables.size() == 3);  // the point, the non-edge and the edge
  CHECK(std::count_if(two.variables.begin(), two.variables.end(), [](const auto& v) { return v.size == 2; }) == 2);
  auto four = build_cro_system(spec, 4);
  CHECK(four.variables.size() == 75);
  CHECK(four.mass_rows == 1 + 2 + 4 + 11);
  CHECK(four.satisfies(four.uniform()));
  auto report = uniqueness_report(four);
  CHECK(report.uniform_feasible);
  CHECK(report.rank == rank_mod_p(four.rows, four.variables.size()));
  CHECK(report.nullspace_dim == report.variables - report.rank);
  CHECK(report.nullspace_dim > 0);
  CHECK(report.dirac_solutions.empty());  // the edgeless pair has count 2
}

TEST_CASE("pure sets have a unique solution and no Dirac point") {
  const auto spec = FraisseClassSpec::parse("pure_set");
  for (std::size_t n = 2; n <= 5; ++n) {
    const auto sys = build_cro_system(spec, n);
    const auto report = uniqueness_report(sys);
    CHECK(report.uniform_feasible);
    CHECK(report.nullspace_dim == 0);
    CHECK(report.dirac_solutions.empty());
    CHECK(report.dirac_search_complete);
  }
}

TEST_CASE("linear orders: identity and reverse are the Dirac points") {
  const auto sys = build_cro_system(FraisseClassSpec::parse("linear_order"), 4);
  const auto report = uniqueness_report(sys);
  CHECK(report.uniform_feasible);
  CHECK(report.nullspace_dim >= 1);
  CHECK(report.rank == rank_mod_p(sys.rows, sys.variables.size()));
  REQUIRE(report.dirac_solutions.size() == 2);
  // Each solution picks, at every size, the type whose order agrees (or
  // disagrees) with lt on every pair.
  for (const auto& sol : report.dirac_solutions) {
    int agree = 0, disagree = 0;
    for (auto i : sol) {
      const auto& rep = sys.variables[i].representative;
      const std::size_t m = rep.size();
      bool all_up = true, all_down = true;
      for (std::size_t a = 0; a + 1 < m; ++a) {
        all_up &= rep.holds(0, static_cast<Element>(a), static_cast<Element>(a + 1));
        all_down &= rep.holds(0, static_cast<Element>(a + 1), static_cast<Element>(a));
      }
      agree += all_up;
      disagree += all_down;
    }
    CHECK((agree == 4 || disagree == 4));
  }
}

TEST_CASE("Dirac search limit is reported") {
  const auto sys = build_cro_system(FraisseClassSpec::parse("linear_order"), 3);
  const auto report = uniqueness_report(sys, 1);
  CHECK(report.dirac_solutions.size() == 1);
  CHECK_FALSE(report.dirac_search_complete);
}

TEST_CASE("projected dimension agrees both ways and shrinks with n") {
  const auto spec = FraisseClassSpec::parse("graph");
  const auto three = build_cro_system(spec, 3);
  const auto four = build_cro_system(spec, 4);
  const auto p3 = projected_dimension(three, 3);
  const auto p4 = projected_dimension(four, 3);
  CHECK(p3.by_rank == p3.by_elimination);
  CHECK(p4.by_rank == p4.by_elimination);
  CHECK(p3.target_variables == 8);
  CHECK(p4.by_rank <= p3.by_rank);
  // At the top level nothing above constrains the size-3 masses beyond their own rows.
  CHECK(p3.by_rank <= p3.target_variables);
  MESSAGE("graph projected dims: n=3 " << p3.by_rank << ", n=4 " << p4.by_rank);
}

TEST_CASE("two predicates: block symmetry rules out Dirac points") {
  const auto sys = build_cro_system(FraisseClassSpec::parse("two_predicate_PQ"), 3);
  const auto report = uniqueness_report(sys);
  CHECK(report.uniform_feasible);
  CHECK(report.rank == rank_mod_p(sys.rows, sys.variables.size()));
  // Two P points can be swapped, so each order of them carries mass 1/2.
  CHECK(report.dirac_solutions.empty());
  CHECK(report.dirac_search_complete);
}

TEST_CASE("exact rank respects column priority only in the pivots") {
  std::vector<CRORow> rows{{{{0, 1}, {1, 1}}, 0}, {{{1, 1}, {2, 1}}, 0}, {{{0, 1}, {2, -1}}, 0}};
  CHECK(exact_rank(rows, 3) == 2);
  CHECK(exact_rank(rows, 3, {2, 1}) == 2);
  CHECK(rank_mod_p(rows, 3) == 2);
}
