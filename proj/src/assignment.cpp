#include "gnrd/assignment.hpp"

#include "gnrd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace gnrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_square_finite(const MatrixRef& c, std::string_view who) {
    if (c.rows() != c.cols()) {
        throw ConfigError(std::string(who) + ": cost matrix must be square, got " + std::to_string(c.rows()) +
                          "x" + std::to_string(c.cols()));
    }
    if (!c.allFinite()) throw ConfigError(std::string(who) + ": cost matrix has NaN or infinite entries");
}

Assignment make_assignment(const MatrixRef& c, std::vector<Index> perm) {
    Assignment a;
    a.cost = assignment_cost(c, perm);
    a.perm = std::move(perm);
    return a;
}

}  // namespace

AssignMethod parse_assign_method(std::string_view name) {
    if (name == "hungarian") return AssignMethod::hungarian;
    if (name == "auction") return AssignMethod::auction;
    if (name == "greedy") return AssignMethod::greedy;
    if (name == "brute") return AssignMethod::brute;
    throw ConfigError("unknown assignment method '" + std::string(name) + "'");
}

std::string_view to_string(AssignMethod method) noexcept {
    switch (method) {
        case AssignMethod::hungarian: return "hungarian";
        case AssignMethod::auction: return "auction";
        case AssignMethod::greedy: return "greedy";
        case AssignMethod::brute: return "brute";
    }
    return "unknown";
}

double assignment_cost(const MatrixRef& c, const std::vector<Index>& perm) {
    double total = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) total += c(static_cast<Index>(i), perm[i]);
    return total;
}

bool is_permutation(const std::vector<Index>& perm) {
    std::vector<bool> seen(perm.size(), false);
    for (Index j : perm) {
        if (j < 0 || j >= static_cast<Index>(perm.size()) || seen[j]) return false;
        seen[j] = true;
    }
    return true;
}

Assignment brute_force_assign(const MatrixRef& c) {
    check_square_finite(c, "brute_force_assign");
    const Index n = c.rows();
    if (n > kBruteForceMaxN) {
        throw ConfigError("brute_force_assign: n = " + std::to_string(n) + " exceeds the limit of " +
                          std::to_string(kBruteForceMaxN));
    }
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::vector<Index> best = perm;
    double best_cost = kInf;
    do {
        const double cost = assignment_cost(c, perm);
        if (cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return make_assignment(c, std::move(best));
}

Assignment hungarian(const MatrixRef& c) {
    check_square_finite(c, "hungarian");
    const Index n = c.rows();
    // 1-based potentials; column 0 is the virtual start of each augmenting path.
    Vector u = Vector::Zero(n + 1);
    Vector v = Vector::Zero(n + 1);
    std::vector<Index> row_of_col(n + 1, 0);
    std::vector<Index> way(n + 1, 0);

    for (Index row = 1; row <= n; ++row) {
        row_of_col[0] = row;
        Index col0 = 0;
        Vector minv = Vector::Constant(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[col0] = true;
            const Index i0 = row_of_col[col0];
            double delta = kInf;
            Index col1 = 0;
            for (Index j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double reduced = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (reduced < minv[j]) {
                    minv[j] = reduced;
                    way[j] = col0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
        } while (row_of_col[col0] != 0);
        do {
            const Index col1 = way[col0];
            row_of_col[col0] = row_of_col[col1];
            col0 = col1;
        } while (col0 != 0);
    }

    std::vector<Index> perm(n);
    for (Index j = 1; j <= n; ++j) perm[row_of_col[j] - 1] = j - 1;
    return make_assignment(c, std::move(perm));
}

Assignment auction(const MatrixRef& c, double epsilon) {
    AuctionOptions options;
    options.epsilon = epsilon;
    return auction(c, options);
}

Assignment auction(const MatrixRef& c, const AuctionOptions& options) {
    check_square_finite(c, "auction");
    if (!(options.epsilon > 0.0)) throw ConfigError("auction: epsilon must be positive");
    if (!(options.scaling_factor > 1.0)) throw ConfigError("auction: scaling factor must exceed 1");
    const Index n = c.rows();
    if (n == 0) return {};

    // Rows bid for columns; a row's value for column j is -c(i, j) - price[j].
    Vector price = Vector::Zero(n);
    std::vector<Index> col_of_row(n, -1);
    std::vector<Index> row_of_col(n, -1);

    const double spread = c.maxCoeff() - c.minCoeff();
    double eps = std::max(options.epsilon, spread / options.scaling_factor);
    while (true) {
        std::fill(col_of_row.begin(), col_of_row.end(), -1);
        std::fill(row_of_col.begin(), row_of_col.end(), -1);
        std::vector<Index> unassigned(n);
        std::iota(unassigned.rbegin(), unassigned.rend(), Index{0});

        while (!unassigned.empty()) {
            const Index row = unassigned.back();
            unassigned.pop_back();

            Index best_col = -1;
            double best = -kInf;
            double second = -kInf;
            for (Index j = 0; j < n; ++j) {
                const double value = -c(row, j) - price[j];
                if (value > best) {
                    second = best;
                    best = value;
                    best_col = j;
                } else if (value > second) {
                    second = value;
                }
            }
            const double increment = (second == -kInf ? 0.0 : best - second) + eps;
            price[best_col] += increment;

            const Index previous = row_of_col[best_col];
            if (previous >= 0) {
                col_of_row[previous] = -1;
                unassigned.push_back(previous);
            }
            row_of_col[best_col] = row;
            col_of_row[row] = best_col;
        }

        if (eps <= options.epsilon) break;
        eps = std::max(options.epsilon, eps / options.scaling_factor);
    }
    return make_assignment(c, std::move(col_of_row));
}

Assignment greedy_assign(const MatrixRef& c) {
    check_square_finite(c, "greedy_assign");
    const Index n = c.rows();
    // Unassigned rows kept in an unordered pool with O(1) removal via slot map.
    std::vector<Index> pool(n);
    std::vector<Index> slot(n);
    std::iota(pool.begin(), pool.end(), Index{0});
    std::iota(slot.begin(), slot.end(), Index{0});

    std::vector<Index> perm(n, -1);
    for (Index col = 0; col < n; ++col) {
        Index best_row = -1;
        double best = kInf;
        for (Index row : pool) {
            const double value = c(row, col);
            if (value < best || (value == best && row < best_row)) {
                best = value;
                best_row = row;
            }
        }
        perm[best_row] = col;
        const Index hole = slot[best_row];
        pool[hole] = pool.back();
        slot[pool[hole]] = hole;
        pool.pop_back();
    }
    return make_assignment(c, std::move(perm));
}

Assignment solve_assignment(const MatrixRef& c, AssignMethod method) {
    switch (method) {
        case AssignMethod::hungarian: return hungarian(c);
        case AssignMethod::auction: {
            AuctionOptions options;
            options.epsilon = 1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff()) / std::max<Index>(1, c.rows());
            return auction(c, options);
        }
        case AssignMethod::greedy: return greedy_assign(c);
        case AssignMethod::brute: return brute_force_assign(c);
    }
    throw ConfigError("unknown assignment method");
}

double assignment_to_ot_value(const Assignment& a, Index n) {
    return a.cost / static_cast<double>(n);
}

}  // namespace gnrd
