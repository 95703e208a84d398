#include "seqcal/lp.hpp"

#include <algorithm>
#include <cmath>

namespace seqcal {

namespace {

enum class VarState : std::uint8_t { Basic, AtLo, AtHi };

constexpr double kPivotEps = 1e-11;
constexpr double kSuspectPivot = 1e-7;
constexpr double kFeasTol = 1e-9;
constexpr double kJitter = 1e-7;

/// Deterministic hash of a column index to (0, 1); used to jitter costs so
/// results stay bit-reproducible across runs and thread counts.
double unit_hash(std::size_t j) {
    std::uint64_t z = (static_cast<std::uint64_t>(j) + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

/// Working state of the revised simplex: dense basis inverse plus the usual
/// variable bookkeeping. Sized for the small/medium programs this project
/// produces (a few hundred rows), where a dense inverse is both simple and
/// fast.
class Simplex {
public:
    Simplex(const LpProblem& prob, long max_iters)
        : rows_(prob.rows), b_(prob.b), lo_(prob.lo), hi_(prob.hi), cols_(prob.cols) {
        max_iters_ = max_iters > 0
                         ? max_iters
                         : 200000 + 200 * static_cast<long>(rows_ + prob.num_cols());
        // Artificial columns (one per row) make the initial basis; structural
        // variables start at their finite lower bound (or upper when lower is
        // unbounded -- no column in this project is free in both directions).
        n_struct_ = prob.num_cols();
        state_.assign(n_struct_, VarState::AtLo);
        xval_.assign(n_struct_, 0.0);
        for (std::size_t j = 0; j < n_struct_; ++j) {
            if (std::isfinite(lo_[j])) {
                state_[j] = VarState::AtLo;
                xval_[j] = lo_[j];
            } else if (std::isfinite(hi_[j])) {
                state_[j] = VarState::AtHi;
                xval_[j] = hi_[j];
            } else {
                throw LpError(LpError::Kind::Numerical, "lp: free variables are not supported");
            }
        }
        std::vector<double> resid = b_;
        for (std::size_t j = 0; j < n_struct_; ++j) {
            if (xval_[j] == 0.0) continue;
            for (auto [r, v] : cols_[j]) resid[static_cast<std::size_t>(r)] -= v * xval_[j];
        }
        art_sign_.resize(rows_);
        basis_.resize(rows_);
        xb_.resize(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            art_sign_[i] = resid[i] >= 0.0 ? 1.0 : -1.0;
            basis_[i] = static_cast<std::int64_t>(n_struct_ + i);
            xb_[i] = std::abs(resid[i]);
            lo_.push_back(0.0);
            hi_.push_back(kLpInf);
            state_.push_back(VarState::Basic);
            xval_.push_back(xb_[i]);
        }
        binv_.assign(rows_ * rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) binv_[i * rows_ + i] = art_sign_[i];
        barred_.assign(lo_.size(), 0);
    }

    void run_phase1() {
        // The tiny deterministic jitter breaks the cost ties that make highly
        // degenerate instances stall for millions of pivots. The run finishes
        // against the exact artificial objective, so the feasibility verdict
        // below is taken on unperturbed data.
        cost_.resize(lo_.size());
        for (std::size_t j = 0; j < lo_.size(); ++j) cost_[j] = kJitter * unit_hash(j);
        for (std::size_t i = 0; i < rows_; ++i) cost_[n_struct_ + i] += 1.0;
        optimize();
        cost_.assign(lo_.size(), 0.0);
        for (std::size_t i = 0; i < rows_; ++i) cost_[n_struct_ + i] = 1.0;
        polish();
        double infeas = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            if (static_cast<std::size_t>(basis_[i]) >= n_struct_) infeas += xb_[i];
        const double scale = 1.0 + max_abs(b_);
        if (infeas > kFeasTol * scale)
            throw LpError(LpError::Kind::Infeasible, "lp: infeasible (phase 1 objective " +
                                                         std::to_string(infeas) + ")");
        // Pin artificials at zero for phase 2; any still basic stay parked.
        for (std::size_t i = 0; i < rows_; ++i) hi_[n_struct_ + i] = 0.0;
        for (std::size_t j = n_struct_; j < lo_.size(); ++j)
            if (state_[j] != VarState::Basic) xval_[j] = 0.0;
    }

    void run_phase2(const std::vector<double>& c) {
        cost_.assign(lo_.size(), 0.0);
        std::copy(c.begin(), c.end(), cost_.begin());
        const double scale = 1.0 + max_abs(cost_);
        for (std::size_t j = 0; j < n_struct_; ++j) cost_[j] += scale * kJitter * unit_hash(j);
        optimize();
        // Drop the jitter and finish against the exact costs; from the
        // perturbed optimum this converges in a handful of pivots.
        std::copy(c.begin(), c.end(), cost_.begin());
        polish();
    }

    LpSolution extract(const LpProblem& prob) {
        refactorize();
        LpSolution sol;
        sol.x.assign(n_struct_, 0.0);
        for (std::size_t j = 0; j < n_struct_; ++j) sol.x[j] = xval_[j];
        for (std::size_t i = 0; i < rows_; ++i) {
            const auto bj = static_cast<std::size_t>(basis_[i]);
            if (bj < n_struct_) sol.x[bj] = xb_[i];
        }
        sol.y = dual_prices();
        sol.dj.resize(n_struct_);
        sol.objective = 0.0;
        for (std::size_t j = 0; j < n_struct_; ++j) {
            sol.dj[j] = cost_[j] - price_col(sol.y, j);
            sol.objective += prob.c[j] * sol.x[j];
        }
        // Weak duality: y'b + sum_j min over [lo_j, hi_j] of dj * x_j is a
        // valid lower bound on the optimum for any y. With the polish pass
        // the wrong-signed dj are zero to machine precision, so this bound
        // certifies the gap.
        double dual = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) dual += sol.y[i] * b_[i];
        for (std::size_t j = 0; j < n_struct_; ++j) {
            if (state_[j] == VarState::Basic) continue;
            const double term = sol.dj[j] >= 0.0 ? sol.dj[j] * lo_[j] : sol.dj[j] * hi_[j];
            if (std::isfinite(term))
                dual += term;
            else
                dual = -kLpInf;  // wrong sign against an infinite bound: no certificate
        }
        sol.dual_objective = dual;
        sol.diag.iterations = iters_;
        sol.diag.duality_gap = sol.objective - dual;
        double resid = 0.0;
        std::vector<double> ax(rows_, 0.0);
        for (std::size_t j = 0; j < n_struct_; ++j) {
            if (sol.x[j] == 0.0) continue;
            for (auto [r, v] : prob.cols[j]) ax[static_cast<std::size_t>(r)] += v * sol.x[j];
        }
        for (std::size_t i = 0; i < rows_; ++i) resid = std::max(resid, std::abs(ax[i] - b_[i]));
        sol.diag.primal_residual = resid;
        return sol;
    }

private:
    static double max_abs(const std::vector<double>& v) {
        double m = 0.0;
        for (double t : v) m = std::max(m, std::abs(t));
        return m;
    }

    const std::vector<std::pair<std::int32_t, double>>& column(std::size_t j) const {
        if (j < n_struct_) return cols_[j];
        art_col_[0] = {static_cast<std::int32_t>(j - n_struct_), art_sign_[j - n_struct_]};
        return art_col_;
    }

    double price_col(const std::vector<double>& y, std::size_t j) const {
        double d = 0.0;
        for (auto [r, v] : column(j)) d += y[static_cast<std::size_t>(r)] * v;
        return d;
    }

    std::vector<double> dual_prices() const {
        std::vector<double> y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double cb = cost_[static_cast<std::size_t>(basis_[i])];
            if (cb == 0.0) continue;
            const double* row = &binv_[i * rows_];
            for (std::size_t k = 0; k < rows_; ++k) y[k] += cb * row[k];
        }
        return y;
    }

    void refactorize() {
        // Rebuild binv_ from the basis columns by Gauss-Jordan with partial
        // pivoting, then recompute the basic values from the bound values.
        std::vector<double> m(rows_ * rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (auto [r, v] : column(static_cast<std::size_t>(basis_[i])))
                m[static_cast<std::size_t>(r) * rows_ + i] = v;
        std::vector<double> inv(rows_ * rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) inv[i * rows_ + i] = 1.0;
        for (std::size_t col = 0; col < rows_; ++col) {
            std::size_t piv = col;
            double best = std::abs(m[col * rows_ + col]);
            for (std::size_t r = col + 1; r < rows_; ++r) {
                const double cand = std::abs(m[r * rows_ + col]);
                if (cand > best) {
                    best = cand;
                    piv = r;
                }
            }
            if (best < 1e-13)
                throw LpError(LpError::Kind::Numerical, "lp: singular basis during refactorization");
            if (piv != col) {
                for (std::size_t k = 0; k < rows_; ++k) {
                    std::swap(m[piv * rows_ + k], m[col * rows_ + k]);
                    std::swap(inv[piv * rows_ + k], inv[col * rows_ + k]);
                }
            }
            const double d = m[col * rows_ + col];
            for (std::size_t k = 0; k < rows_; ++k) {
                m[col * rows_ + k] /= d;
                inv[col * rows_ + k] /= d;
            }
            for (std::size_t r = 0; r < rows_; ++r) {
                if (r == col) continue;
                const double f = m[r * rows_ + col];
                if (f == 0.0) continue;
                for (std::size_t k = 0; k < rows_; ++k) {
                    m[r * rows_ + k] -= f * m[col * rows_ + k];
                    inv[r * rows_ + k] -= f * inv[col * rows_ + k];
                }
            }
        }
        binv_ = std::move(inv);
        std::vector<double> rhs = b_;
        for (std::size_t j = 0; j < lo_.size(); ++j) {
            if (state_[j] == VarState::Basic || xval_[j] == 0.0) continue;
            for (auto [r, v] : column(j)) rhs[static_cast<std::size_t>(r)] -= v * xval_[j];
        }
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            const double* row = &binv_[i * rows_];
            for (std::size_t k = 0; k < rows_; ++k) s += row[k] * rhs[k];
            xb_[i] = s;
        }
    }

    /// One simplex run against the current cost_ vector.
    void optimize() {
        const double cost_scale = 1.0 + max_abs(cost_);
        long stall = 0;
        bool strict = false;      // final cleanup pass at machine tolerance
        bool anti_cycle = false;  // Bland's rule while a degenerate streak lasts
        for (;;) {
            if (++iters_ > max_iters_)
                throw LpError(LpError::Kind::IterationLimit, "lp: iteration limit exceeded");
            const bool bland = strict || anti_cycle;
            const std::vector<double> y = dual_prices();
            std::size_t enter = SIZE_MAX;
            double best = bland ? 0.0 : 1e-9 * cost_scale;
            for (std::size_t j = 0; j < lo_.size(); ++j) {
                if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
                if (barred_[j] > iters_) continue;
                const double d = cost_[j] - price_col(y, j);
                const double viol = state_[j] == VarState::AtLo ? -d : d;
                if (bland) {
                    if (viol > 1e-12 * cost_scale) {
                        enter = j;
                        break;
                    }
                } else if (viol > best) {
                    best = viol;
                    enter = j;
                }
            }
            if (enter == SIZE_MAX) {
                if (!strict) {
                    // Strict pass: clear even tiny violations so the final
                    // dual certificate is machine-precision clean.
                    strict = true;
                    continue;
                }
                return;
            }
            const double dir = state_[enter] == VarState::AtLo ? 1.0 : -1.0;
            std::vector<double> w(rows_, 0.0);
            for (auto [r, v] : column(enter)) {
                const std::size_t rr = static_cast<std::size_t>(r);
                for (std::size_t i = 0; i < rows_; ++i) w[i] += binv_[i * rows_ + rr] * v;
            }
            // Ratio test: entering moves by dir*theta, basic values by -dir*theta*w.
            // Ties are broken toward the largest pivot for stability, except
            // under Bland's rule, where the smallest basic index must leave
            // for the termination guarantee to hold.
            double theta = hi_[enter] - lo_[enter];  // bound-flip limit (may be inf)
            std::size_t leave = SIZE_MAX;
            double leave_pivot = 0.0;
            bool leave_at_hi = false;
            auto better_tie = [&](std::size_t i, double wi) {
                if (leave == SIZE_MAX) return true;
                if (bland) return basis_[i] < basis_[leave];
                return std::abs(wi) > std::abs(leave_pivot);
            };
            for (std::size_t i = 0; i < rows_; ++i) {
                const double rate = -dir * w[i];
                if (rate > kPivotEps) {
                    const double cap = hi_[static_cast<std::size_t>(basis_[i])];
                    if (!std::isfinite(cap)) continue;
                    const double t = (cap - xb_[i]) / rate;
                    if (t < theta - 1e-12 || (t < theta + 1e-12 && better_tie(i, w[i]))) {
                        theta = std::max(t, 0.0);
                        leave = i;
                        leave_pivot = w[i];
                        leave_at_hi = true;
                    }
                } else if (rate < -kPivotEps) {
                    const double floor_v = lo_[static_cast<std::size_t>(basis_[i])];
                    const double t = (xb_[i] - floor_v) / (-rate);
                    if (t < theta - 1e-12 || (t < theta + 1e-12 && better_tie(i, w[i]))) {
                        theta = std::max(t, 0.0);
                        leave = i;
                        leave_pivot = w[i];
                        leave_at_hi = false;
                    }
                }
            }
            if (!std::isfinite(theta))
                throw LpError(LpError::Kind::Unbounded, "lp: unbounded objective");
            if (leave != SIZE_MAX && std::abs(leave_pivot) < kSuspectPivot &&
                since_refactor_ > 0) {
                // A tiny pivot computed from a drifted inverse may be pure
                // rounding noise on a dependent column; only a fresh
                // factorization can vouch for it. Rebuild and re-price.
                refactorize();
                since_refactor_ = 0;
                continue;
            }
            if (theta > 1e-12) {
                stall = 0;
                anti_cycle = false;  // real progress; back to steepest pricing
            } else if (++stall > 50) {
                anti_cycle = true;
            }
            for (std::size_t i = 0; i < rows_; ++i) xb_[i] -= dir * theta * w[i];
            if (leave == SIZE_MAX) {
                // Bound flip: entering variable crosses to its other bound.
                state_[enter] = state_[enter] == VarState::AtLo ? VarState::AtHi : VarState::AtLo;
                xval_[enter] = state_[enter] == VarState::AtLo ? lo_[enter] : hi_[enter];
                continue;
            }
            const std::size_t out = static_cast<std::size_t>(basis_[leave]);
            const VarState enter_was = state_[enter];
            state_[out] = leave_at_hi ? VarState::AtHi : VarState::AtLo;
            xval_[out] = leave_at_hi ? hi_[out] : lo_[out];
            const double enter_from = enter_was == VarState::AtLo ? lo_[enter] : hi_[enter];
            basis_[leave] = static_cast<std::int64_t>(enter);
            state_[enter] = VarState::Basic;
            xb_[leave] = enter_from + dir * theta;
            // Elementary row update of the dense inverse.
            const double piv = w[leave];
            double* prow = &binv_[leave * rows_];
            for (std::size_t k = 0; k < rows_; ++k) prow[k] /= piv;
            for (std::size_t i = 0; i < rows_; ++i) {
                if (i == leave || w[i] == 0.0) continue;
                const double f = w[i];
                double* row = &binv_[i * rows_];
                for (std::size_t k = 0; k < rows_; ++k) row[k] -= f * prow[k];
            }
            // A pivot this small may have let a dependent column into the
            // basis, so verify it with a fresh factorization right away; on
            // failure undo the exchange and bar the column for a while.
            if (std::abs(piv) < kSuspectPivot || ++since_refactor_ >= 64) {
                try {
                    refactorize();
                } catch (const LpError&) {
                    basis_[leave] = static_cast<std::int64_t>(out);
                    state_[out] = VarState::Basic;
                    state_[enter] = enter_was;
                    barred_[enter] = iters_ + 64;
                    refactorize();  // the pre-pivot basis, known factorizable
                }
                since_refactor_ = 0;
            }
        }
    }

    /// Final accuracy pass: refactorize and re-run (Bland kicks in via the
    /// strict pass inside optimize, so this converges immediately in the
    /// common case).
    void polish() {
        refactorize();
        optimize();
    }

    std::size_t rows_;
    std::vector<double> b_;
    std::vector<double> lo_, hi_;
    const std::vector<std::vector<std::pair<std::int32_t, double>>>& cols_;
    std::size_t n_struct_ = 0;
    std::vector<double> cost_;
    std::vector<double> art_sign_;
    std::vector<std::int64_t> basis_;
    std::vector<double> xb_;
    std::vector<double> xval_;
    std::vector<VarState> state_;
    std::vector<double> binv_;
    std::vector<long> barred_;
    mutable std::vector<std::pair<std::int32_t, double>> art_col_{1};
    long iters_ = 0;
    long max_iters_ = 0;
    long since_refactor_ = 0;
};

}  // namespace

LpSolution solve_lp(const LpProblem& prob, long max_iters) {
    if (prob.b.size() != prob.rows || prob.cols.size() != prob.num_cols() ||
        prob.lo.size() != prob.num_cols() || prob.hi.size() != prob.num_cols())
        throw std::invalid_argument("lp: inconsistent problem dimensions");
    for (const auto& col : prob.cols)
        for (auto [r, v] : col) {
            (void)v;
            if (r < 0 || static_cast<std::size_t>(r) >= prob.rows)
                throw std::invalid_argument("lp: column entry row out of range");
        }
    if (prob.rows == 0) {
        // Pure box minimization: each variable sits at its cheaper bound.
        LpSolution sol;
        sol.x.resize(prob.num_cols());
        sol.dj = prob.c;
        for (std::size_t j = 0; j < prob.num_cols(); ++j) {
            const double at = prob.c[j] >= 0.0 ? prob.lo[j] : prob.hi[j];
            if (!std::isfinite(at)) throw LpError(LpError::Kind::Unbounded, "lp: unbounded objective");
            sol.x[j] = at;
            sol.objective += prob.c[j] * at;
        }
        sol.dual_objective = sol.objective;
        return sol;
    }
    Simplex s(prob, max_iters);
    s.run_phase1();
    s.run_phase2(prob.c);
    return s.extract(prob);
}

}  // namespace seqcal
