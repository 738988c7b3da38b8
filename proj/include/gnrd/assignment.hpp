#pragma once

#include "gnrd/types.hpp"

#include <string_view>
#include <vector>

namespace gnrd {

/// Permutation matching generated index i to real index perm[i], together
/// with its total cost sum_i c(i, perm[i]).
struct Assignment {
    std::vector<Index> perm;
    double cost = 0.0;
};

enum class AssignMethod { hungarian, auction, greedy, brute };

AssignMethod parse_assign_method(std::string_view name);
std::string_view to_string(AssignMethod method) noexcept;

inline constexpr Index kBruteForceMaxN = 9;

/// Exhaustive search over all n! permutations; n <= 9.
Assignment brute_force_assign(const MatrixRef& c);

/// Hungarian method with row/column potentials, O(n^3).
Assignment hungarian(const MatrixRef& c);

struct AuctionOptions {
    double epsilon = 1e-6;       // final bid increment
    double scaling_factor = 4.0; // epsilon divisor between phases
};

/// Forward auction with epsilon-scaling. The result is within n * epsilon of
/// optimal; on integer costs any epsilon < 1/n gives an exact optimum.
Assignment auction(const MatrixRef& c, const AuctionOptions& options);
Assignment auction(const MatrixRef& c, double epsilon);

/// Columns in index order each take the cheapest still-unassigned row (ties
/// to the lowest row index). Upper bound on the optimal cost.
Assignment greedy_assign(const MatrixRef& c);

Assignment solve_assignment(const MatrixRef& c, AssignMethod method);

/// Uniform-marginal transport value of an assignment: cost / n.
double assignment_to_ot_value(const Assignment& a, Index n);

double assignment_cost(const MatrixRef& c, const std::vector<Index>& perm);
bool is_permutation(const std::vector<Index>& perm);

}  // namespace gnrd
