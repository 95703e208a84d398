#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seqcal {

/// Linear program in computational standard form:
///
///     minimize    c . x
///     subject to  A x = b,   lo <= x <= hi   (hi entries may be +infinity)
///
/// Columns are stored sparse; every row must be covered by the constraint
/// matrix. Bounds with lo == hi pin a variable.
struct LpProblem {
    std::size_t rows = 0;
    std::vector<double> b;
    std::vector<double> c;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<std::vector<std::pair<std::int32_t, double>>> cols;

    std::size_t num_cols() const { return c.size(); }

    std::size_t add_col(double cost, double lower, double upper,
                        std::vector<std::pair<std::int32_t, double>> entries) {
        c.push_back(cost);
        lo.push_back(lower);
        hi.push_back(upper);
        cols.push_back(std::move(entries));
        return c.size() - 1;
    }
};

struct LpDiagnostics {
    long iterations = 0;
    double duality_gap = 0.0;      ///< primal objective minus certified dual bound
    double primal_residual = 0.0;  ///< max |(A x - b)_i| at the reported solution
};

struct LpSolution {
    std::vector<double> x;
    std::vector<double> y;   ///< row duals
    std::vector<double> dj;  ///< reduced costs c_j - y . A_j
    double objective = 0.0;
    double dual_objective = 0.0;
    LpDiagnostics diag;
};

class LpError : public std::runtime_error {
public:
    enum class Kind { Infeasible, Unbounded, IterationLimit, Numerical };
    LpError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

inline constexpr double kLpInf = std::numeric_limits<double>::infinity();

/// Two-phase bounded-variable revised simplex. Returns an optimal basic
/// solution with a weak-duality certificate (diag.duality_gap is rigorous
/// whenever every variable with a wrong-signed reduced cost has finite
/// bounds, which holds for every program built in this project). Throws
/// LpError on infeasible/unbounded/non-converged programs.
LpSolution solve_lp(const LpProblem& prob, long max_iters = 0);

}  // namespace seqcal
