#include <cmath>
#include <vector>

#include "doctest.h"
#include "seqcal/lp.hpp"

using namespace seqcal;

TEST_CASE("bounded knapsack-style LP reaches the exact optimum") {
    // min -x1 - 2 x2   s.t.  x1 + x2 = 1,  0 <= xi <= 0.75
    LpProblem prob;
    prob.rows = 1;
    prob.b = {1.0};
    prob.add_col(-1.0, 0.0, 0.75, {{0, 1.0}});
    prob.add_col(-2.0, 0.0, 0.75, {{0, 1.0}});

    LpSolution sol = solve_lp(prob);
    CHECK(sol.objective == doctest::Approx(-1.75).epsilon(1e-12));
    CHECK(sol.x[0] == doctest::Approx(0.25));
    CHECK(sol.x[1] == doctest::Approx(0.75));
    CHECK(sol.diag.duality_gap <= 1e-9);
    CHECK(sol.diag.primal_residual <= 1e-9);
    CHECK(sol.dual_objective <= sol.objective + 1e-9);
}

TEST_CASE("transportation LP with a known optimal matching") {
    // Two supplies (1 each) to two demands (1 each); costs favor the
    // diagonal: min x11 + 3 x12 + 3 x21 + x22.
    LpProblem prob;
    prob.rows = 4;
    prob.b = {1.0, 1.0, 1.0, 1.0};  // two supply rows, two demand rows
    prob.add_col(1.0, 0.0, kLpInf, {{0, 1.0}, {2, 1.0}});  // x11
    prob.add_col(3.0, 0.0, kLpInf, {{0, 1.0}, {3, 1.0}});  // x12
    prob.add_col(3.0, 0.0, kLpInf, {{1, 1.0}, {2, 1.0}});  // x21
    prob.add_col(1.0, 0.0, kLpInf, {{1, 1.0}, {3, 1.0}});  // x22

    LpSolution sol = solve_lp(prob);
    CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sol.x[0] == doctest::Approx(1.0));
    CHECK(sol.x[3] == doctest::Approx(1.0));
    CHECK(sol.diag.duality_gap <= 1e-9);
}

TEST_CASE("pinned variables (lo == hi) are respected") {
    // min x1  s.t.  x1 + x2 = 2,  x2 pinned at 0.5, x1 in [0, 5]
    LpProblem prob;
    prob.rows = 1;
    prob.b = {2.0};
    prob.add_col(1.0, 0.0, 5.0, {{0, 1.0}});
    prob.add_col(0.0, 0.5, 0.5, {{0, 1.0}});

    LpSolution sol = solve_lp(prob);
    CHECK(sol.x[1] == doctest::Approx(0.5));
    CHECK(sol.objective == doctest::Approx(1.5));
}

TEST_CASE("a variable untouched by constraints rides its bound") {
    // min -x1  with x1 in [0, 2] and a dummy equality row on x2. The
    // optimizer must park x1 at its upper bound.
    LpProblem prob;
    prob.rows = 1;
    prob.b = {1.0};
    prob.add_col(-1.0, 0.0, 2.0, {});
    prob.add_col(0.0, 0.0, kLpInf, {{0, 1.0}});

    LpSolution sol = solve_lp(prob);
    CHECK(sol.objective == doctest::Approx(-2.0));
    CHECK(sol.x[0] == doctest::Approx(2.0));
}

TEST_CASE("infeasible program throws with the matching kind") {
    // x = 1 and x = 2 simultaneously.
    LpProblem prob;
    prob.rows = 2;
    prob.b = {1.0, 2.0};
    prob.add_col(0.0, 0.0, kLpInf, {{0, 1.0}, {1, 1.0}});

    try {
        solve_lp(prob);
        FAIL("expected LpError");
    } catch (const LpError& e) {
        CHECK(e.kind() == LpError::Kind::Infeasible);
    }
}

TEST_CASE("unbounded program throws with the matching kind") {
    // min -x with x unbounded above and no constraint on it.
    LpProblem prob;
    prob.rows = 1;
    prob.b = {1.0};
    prob.add_col(-1.0, 0.0, kLpInf, {});
    prob.add_col(0.0, 0.0, kLpInf, {{0, 1.0}});

    try {
        solve_lp(prob);
        FAIL("expected LpError");
    } catch (const LpError& e) {
        CHECK(e.kind() == LpError::Kind::Unbounded);
    }
}

TEST_CASE("iteration limit surfaces as an error, not a wrong answer") {
    LpProblem prob;
    prob.rows = 4;
    prob.b = {1.0, 1.0, 1.0, 1.0};
    prob.add_col(1.0, 0.0, kLpInf, {{0, 1.0}, {2, 1.0}});
    prob.add_col(3.0, 0.0, kLpInf, {{0, 1.0}, {3, 1.0}});
    prob.add_col(3.0, 0.0, kLpInf, {{1, 1.0}, {2, 1.0}});
    prob.add_col(1.0, 0.0, kLpInf, {{1, 1.0}, {3, 1.0}});

    try {
        solve_lp(prob, 1);
        FAIL("expected LpError");
    } catch (const LpError& e) {
        CHECK(e.kind() == LpError::Kind::IterationLimit);
    }
}

TEST_CASE("degenerate right-hand side solves cleanly") {
    // min x1 + x2  s.t.  x1 - x2 = 0, x1 + x2 = 0, xi in [0, 1]
    LpProblem prob;
    prob.rows = 2;
    prob.b = {0.0, 0.0};
    prob.add_col(1.0, 0.0, 1.0, {{0, 1.0}, {1, 1.0}});
    prob.add_col(1.0, 0.0, 1.0, {{0, -1.0}, {1, 1.0}});

    LpSolution sol = solve_lp(prob);
    CHECK(sol.objective == doctest::Approx(0.0));
    CHECK(sol.diag.primal_residual <= 1e-9);
}
