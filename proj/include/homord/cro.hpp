#pragma once

#include <cstddef>
#include <cstdint>
#include <gmpxx.h>
#include <map>
#include <string>
#include <vector>

#include "homord/builders.hpp"
#include "homord/structure.hpp"

namespace homord {

/// An isomorphism type of an ordered class member (A, <). The representative
/// lives on {0..m-1} with < the natural order, so `code` is the type of the
/// identity tuple. `count` is the number of linear orders of a fixed copy of the
/// base that fall in this type, which equals |Aut(base)|.
struct OrderedType {
  std::size_t size = 0;
  TypeCode code;
  TypeCode base;  // isomorphism class of the unordered structure
  std::uint64_t count = 0;
  FinStructure representative;
};

/// Ordered types of class members of exactly `m` elements, sorted by code.
/// Bounds: m <= 5 for graph, kn_free_graph, tournament and linear_order;
/// m <= 6 for pure_set and two_predicate_PQ. Only hereditary relational
/// classes are supported.
std::vector<OrderedType> enumerate_ordered_types(const FraisseClassSpec& spec, std::size_t m);

struct CRORow {
  std::vector<std::pair<std::size_t, mpq_class>> terms;  // sorted by variable
  mpq_class rhs;
};

/// Equalities on one unknown per ordered type of size 1..n:
/// level mass (for each base B: sum of count * x over types of B equals 1) and
/// one-point consistency (for B, a point v and an order < of B - v: the masses
/// of the orders of B extending < sum to the mass of (B - v, <)).
/// Nonnegativity of every unknown is implicit.
struct CROSystem {
  std::string class_name;
  std::size_t n = 0;
  std::vector<OrderedType> variables;  // ordered by size, then code
  std::map<TypeCode, std::size_t> index;
  std::vector<CRORow> rows;
  std::size_t mass_rows = 0;
  std::size_t consistency_rows = 0;

  /// Every order of every size-m member equally likely: x = 1/m!.
  std::vector<mpq_class> uniform() const;
  bool satisfies(const std::vector<mpq_class>& x) const;
};

/// Builds the system and checks exactly that the uniform assignment solves it.
CROSystem build_cro_system(const FraisseClassSpec& spec, std::size_t n);

/// Rank of the coefficient matrix (right-hand sides ignored), by exact sparse
/// elimination. Columns listed in `column_priority` are eliminated first.
std::size_t exact_rank(const std::vector<CRORow>& rows, std::size_t columns,
                       const std::vector<std::size_t>& column_priority = {});

struct UniquenessReport {
  bool uniform_feasible = false;
  std::size_t variables = 0;
  std::size_t equations = 0;
  std::size_t rank = 0;
  std::size_t nullspace_dim = 0;
  /// Each solution lists the variables set to 1; all others are 0.
  std::vector<std::vector<std::size_t>> dirac_solutions;
  bool dirac_search_complete = true;
};

/// Uniform feasibility by substitution, nullspace dimension at the (strictly
/// positive) uniform point, and an exhaustive search for 0/1 solutions.
UniquenessReport uniqueness_report(const CROSystem& system, std::size_t dirac_limit = 10'000);

/// Dimension of the projection of the solution set onto the variables of one
/// size, computed two independent ways: rank([A; E_T]) - rank(A), and by
/// eliminating all other variables first (Fourier-Motzkin on equalities is
/// Gaussian elimination) and counting the surviving constraints on T.
struct ProjectedDimension {
  std::size_t by_rank = 0;
  std::size_t by_elimination = 0;
  std::size_t target_variables = 0;
};
ProjectedDimension projected_dimension(const CROSystem& system, std::size_t level);

}  // namespace homord
