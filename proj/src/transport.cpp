#include "seqcal/transport.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace seqcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Steps sharing (prediction value, outcome) are interchangeable for every
/// transport computation, so plans are solved per class and expanded back.
struct StepClass {
    double p = 0.0;
    int bit = 0;
    double weight = 0.0;
    std::vector<std::int32_t> steps;
};

std::vector<StepClass> step_classes(const Transcript& t) {
    std::map<std::pair<double, int>, std::vector<std::int32_t>> groups;
    for (std::size_t i = 0; i < t.size(); ++i)
        groups[{t.p[i], t.x[i]}].push_back(static_cast<std::int32_t>(i));
    std::vector<StepClass> out;
    out.reserve(groups.size());
    for (auto& [key, steps] : groups) {
        StepClass c;
        c.p = key.first;
        c.bit = key.second;
        c.weight = static_cast<double>(steps.size());
        c.steps = std::move(steps);
        out.push_back(std::move(c));
    }
    return out;
}

/// Drops numerically empty columns and renormalizes every row to mass one.
TransportPlan tidy_plan(std::vector<double> destinations, std::vector<std::vector<double>> rows) {
    std::vector<double> totals(destinations.size(), 0.0);
    for (auto& row : rows)
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] < 0.0 && row[j] > -1e-11) row[j] = 0.0;
            totals[j] += row[j];
        }
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < destinations.size(); ++j)
        if (totals[j] > 1e-11) keep.push_back(j);
    TransportPlan plan;
    plan.destinations.reserve(keep.size());
    for (std::size_t j : keep) plan.destinations.push_back(destinations[j]);
    plan.rows.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& row = plan.rows[i];
        row.resize(keep.size());
        double sum = 0.0;
        for (std::size_t k = 0; k < keep.size(); ++k) {
            row[k] = rows[i][keep[k]];
            sum += row[k];
        }
        if (sum <= 0.0) throw std::runtime_error("plan construction: empty row");
        for (double& v : row) v /= sum;
    }
    return plan;
}

void require_calibrated(const Transcript& t, const TransportPlan& plan, const char* who) {
    const double resid = plan_calibration_residual(t, plan);
    if (resid > 1e-9)
        throw std::invalid_argument(std::string(who) +
                                    ": input plan is not calibrated (residual " +
                                    std::to_string(resid) + ")");
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid-restricted lower transport distance
// ---------------------------------------------------------------------------

namespace {

struct MasterSolve {
    LpSolution sol;
    std::vector<std::size_t> work;  // grid indices, sorted
};

MasterSolve solve_master(const std::vector<StepClass>& classes, long K,
                         const std::set<std::size_t>& work_set) {
    MasterSolve ms;
    ms.work.assign(work_set.begin(), work_set.end());
    const std::size_t C = classes.size();
    const std::size_t W = ms.work.size();
    LpProblem lp;
    lp.rows = C + W;
    lp.b.assign(C + W, 0.0);
    for (std::size_t c = 0; c < C; ++c) lp.b[c] = classes[c].weight;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t w = 0; w < W; ++w) {
            const double g = static_cast<double>(ms.work[w]) / static_cast<double>(K);
            std::vector<std::pair<std::int32_t, double>> entries;
            entries.push_back({static_cast<std::int32_t>(c), 1.0});
            const double coef = static_cast<double>(classes[c].bit) - g;
            if (coef != 0.0) entries.push_back({static_cast<std::int32_t>(C + w), coef});
            lp.add_col(std::abs(classes[c].p - g), 0.0, classes[c].weight, std::move(entries));
        }
    }
    ms.sol = solve_lp(lp);
    return ms;
}

}  // namespace

LowerCaldistResult lower_caldist_grid(const Transcript& t, long K) {
    t.validate();
    const long T = static_cast<long>(t.size());
    if (K <= 0) K = std::max<long>(1000, 10 * T);
    if (K < 2) throw std::invalid_argument("lower_caldist_grid: K must be >= 2");
    const std::vector<StepClass> classes = step_classes(t);
    const std::size_t C = classes.size();
    if (C + 16 > 4000)
        throw std::invalid_argument("lower_caldist_grid: too many distinct (prediction, outcome) classes");

    // Working destinations: always the ends of the grid (zeros->0 / ones->1
    // is feasible), plus the grid points bracketing every source value.
    std::set<std::size_t> work{0, static_cast<std::size_t>(K)};
    for (const auto& cls : classes) {
        const double scaled = cls.p * static_cast<double>(K);
        const auto lo = static_cast<std::size_t>(std::floor(scaled));
        work.insert(std::min<std::size_t>(lo, K));
        work.insert(std::min<std::size_t>(lo + 1, K));
    }

    MasterSolve ms;
    long total_iters = 0;
    bool certified = false;
    for (int round = 0; round < 200 && !certified; ++round) {
        if (work.size() > 2000)
            throw std::runtime_error("lower_caldist_grid: destination generation did not converge");
        ms = solve_master(classes, K, work);
        total_iters += ms.sol.diag.iterations;
        // Dual feasibility test for every grid point outside the working
        // set: its (free) calibration multiplier z must satisfy
        //     y_c + (bit_c - g) z <= |p_c - g|   for every class c,
        // which is an interval condition on z.
        std::vector<std::pair<double, std::size_t>> violated;
        std::set<std::size_t>::const_iterator next_in_work = work.begin();
        for (std::size_t j = 0; j <= static_cast<std::size_t>(K); ++j) {
            while (next_in_work != work.end() && *next_in_work < j) ++next_in_work;
            if (next_in_work != work.end() && *next_in_work == j) continue;
            const double g = static_cast<double>(j) / static_cast<double>(K);
            double lo = -kInf, hi = kInf, direct = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                const double slack = std::abs(classes[c].p - g) - ms.sol.y[c];
                const double coef = static_cast<double>(classes[c].bit) - g;
                if (coef > 0.0)
                    hi = std::min(hi, slack / coef);
                else if (coef < 0.0)
                    lo = std::max(lo, slack / coef);
                else
                    direct = std::max(direct, -slack);
            }
            const double viol = std::max(direct, lo - hi);
            // Zero-tolerance would chase rounding noise on the dual prices
            // forever (alternative optima leave many points tight at zero).
            // Omitting a point violated by at most eps can lower the true
            // optimum by at most eps times the total mass, which is far
            // inside every bound this value feeds into.
            if (viol > 1e-9) violated.push_back({viol, j});
        }
        if (violated.empty()) {
            certified = true;
        } else {
            std::sort(violated.begin(), violated.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
            const std::size_t add = std::min<std::size_t>(violated.size(), 16);
            for (std::size_t k = 0; k < add; ++k) work.insert(violated[k].second);
        }
    }
    if (!certified)
        throw std::runtime_error("lower_caldist_grid: destination generation did not converge");

    LowerCaldistResult out;
    out.value = ms.sol.objective;
    out.diag = ms.sol.diag;
    out.diag.iterations = total_iters;
    if (!(out.diag.duality_gap <= 1e-9))
        throw std::runtime_error("lower_caldist_grid: optimality certificate failed (gap " +
                                 std::to_string(out.diag.duality_gap) + ")");

    const std::size_t W = ms.work.size();
    std::vector<double> dests(W);
    for (std::size_t w = 0; w < W; ++w)
        dests[w] = static_cast<double>(ms.work[w]) / static_cast<double>(K);
    std::vector<std::vector<double>> rows(t.size(), std::vector<double>(W, 0.0));
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t w = 0; w < W; ++w) {
            const double share = ms.sol.x[c * W + w] / classes[c].weight;
            if (share == 0.0) continue;
            for (std::int32_t step : classes[c].steps) rows[static_cast<std::size_t>(step)][w] = share;
        }
    out.plan = tidy_plan(std::move(dests), std::move(rows));
    if (!plan_calibration_check(t, out.plan, 1e-9))
        throw std::runtime_error("lower_caldist_grid: solved plan failed the calibration check");
    return out;
}

// ---------------------------------------------------------------------------
// Monotone rearrangement and rounding
// ---------------------------------------------------------------------------

TransportPlan monotone_rearrange(const Transcript& t, const TransportPlan& plan) {
    plan.validate(t.size());
    const std::size_t S = plan.destinations.size();
    TransportPlan out;
    out.destinations = plan.destinations;
    out.rows.assign(t.size(), std::vector<double>(S, 0.0));
    for (int bit = 0; bit <= 1; ++bit) {
        std::vector<std::size_t> steps;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t.x[i] == bit) steps.push_back(i);
        if (steps.empty()) continue;
        std::stable_sort(steps.begin(), steps.end(),
                         [&](std::size_t a, std::size_t b) { return t.p[a] < t.p[b]; });
        std::vector<double> pooled(S, 0.0);
        for (std::size_t i : steps)
            for (std::size_t j = 0; j < S; ++j) pooled[j] += plan.rows[i][j];
        // Refill one unit per step from the pooled mass in ascending
        // destination order: the one-dimensional optimal coupling.
        std::size_t j = 0;
        for (std::size_t k = 0; k < steps.size(); ++k) {
            auto& row = out.rows[steps[k]];
            double need = 1.0;
            while (need > 0.0) {
                while (j + 1 < S && pooled[j] <= 0.0) ++j;
                if (j + 1 == S) {
                    row[j] += need;  // absorb terminal rounding crumbs
                    pooled[j] -= need;
                    break;
                }
                const double take = std::min(need, pooled[j]);
                row[j] += take;
                pooled[j] -= take;
                need -= take;
            }
        }
    }
    return out;
}

RoundResult round_plan(const Transcript& t, const TransportPlan& plan) {
    require_calibrated(t, plan, "round_plan");
    const TransportPlan mono = monotone_rearrange(t, plan);
    const std::size_t S = mono.destinations.size();

    // A step is pure when its (rearranged) row is concentrated on a single
    // destination; everything else is mixed. Tiny crumbs do not count.
    std::vector<std::int64_t> col_of_step(t.size(), -1);  // destination index for pure steps
    std::vector<std::int64_t> pure_count(S, 0), pure_ones(S, 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::int64_t support_col = -1;
        bool pure = true;
        for (std::size_t j = 0; j < S; ++j) {
            if (mono.rows[i][j] <= 1e-12) continue;
            if (support_col >= 0) {
                pure = false;
                break;
            }
            support_col = static_cast<std::int64_t>(j);
        }
        if (pure && support_col >= 0) {
            col_of_step[i] = support_col;
            ++pure_count[support_col];
            pure_ones[support_col] += t.x[i];
        }
    }

    RoundResult out;
    out.q.q.resize(t.size());
    out.q.block.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (col_of_step[i] >= 0) {
            const std::size_t j = static_cast<std::size_t>(col_of_step[i]);
            out.q.q[i] = static_cast<double>(pure_ones[j]) / static_cast<double>(pure_count[j]);
            out.q.block[i] = static_cast<std::int32_t>(j);
        } else {
            out.q.q[i] = static_cast<double>(t.x[i]);
            out.q.block[i] = static_cast<std::int32_t>(S + t.x[i]);
        }
        out.cost += std::abs(t.p[i] - out.q.q[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Consolidation
// ---------------------------------------------------------------------------

TransportPlan consolidate_general(const Transcript& t, const TransportPlan& plan, long m) {
    if (m < 1) throw std::invalid_argument("consolidate_general: need at least one interval");
    require_calibrated(t, plan, "consolidate_general");
    const std::size_t S = plan.destinations.size();
    const std::size_t M = static_cast<std::size_t>(m);
    // Interval of each destination: [i/m, (i+1)/m), the last one closed.
    std::vector<std::size_t> interval_of(S);
    for (std::size_t j = 0; j < S; ++j)
        interval_of[j] = std::min<std::size_t>(
            static_cast<std::size_t>(std::floor(plan.destinations[j] * static_cast<double>(m))), M - 1);
    std::vector<double> ones_mass(M, 0.0), total_mass(M, 0.0);
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < S; ++j) {
            const double v = plan.rows[i][j];
            if (v == 0.0) continue;
            total_mass[interval_of[j]] += v;
            ones_mass[interval_of[j]] += v * static_cast<double>(t.x[i]);
        }
    // One destination per nonempty interval: the interval's outcome-mass
    // average, which sits inside the interval because the input is
    // calibrated. Numerically degenerate neighbors (possible when an
    // interval holds only crumbs of mass) are merged so destinations stay
    // strictly increasing; merging keeps the average exact.
    struct Pool {
        double ones, total;
        std::vector<std::size_t> intervals;
        double mu() const { return ones / total; }
    };
    std::vector<Pool> pools;
    for (std::size_t k = 0; k < M; ++k) {
        if (total_mass[k] <= 0.0) continue;
        Pool cur{ones_mass[k], total_mass[k], {k}};
        while (!pools.empty() && pools.back().mu() >= cur.mu()) {
            Pool& prev = pools.back();
            cur.ones += prev.ones;
            cur.total += prev.total;
            cur.intervals.insert(cur.intervals.end(), prev.intervals.begin(), prev.intervals.end());
            pools.pop_back();
        }
        pools.push_back(std::move(cur));
    }
    std::vector<double> dests(pools.size());
    std::vector<std::size_t> col(M, 0);
    for (std::size_t g = 0; g < pools.size(); ++g) {
        dests[g] = pools[g].mu();
        for (std::size_t k : pools[g].intervals) col[k] = g;
    }
    std::vector<std::vector<double>> rows(t.size(), std::vector<double>(dests.size(), 0.0));
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < S; ++j) {
            const double v = plan.rows[i][j];
            if (v == 0.0) continue;
            rows[i][col[interval_of[j]]] += v;
        }
    return tidy_plan(std::move(dests), std::move(rows));
}

namespace {

/// Distinct source values extended by the endpoints of [0, 1].
std::vector<double> source_knots(const Transcript& t) {
    std::set<double> values(t.p.begin(), t.p.end());
    values.insert(0.0);
    values.insert(1.0);
    return std::vector<double>(values.begin(), values.end());
}

std::size_t interval_index(const std::vector<double>& knots, double d) {
    // i with knots[i] <= d < knots[i+1]; d == 1 joins the last interval.
    const auto it = std::upper_bound(knots.begin(), knots.end(), d);
    const std::size_t i = static_cast<std::size_t>(it - knots.begin());
    if (i == 0) throw std::logic_error("interval_index: destination below 0");
    return std::min(i - 1, knots.size() - 2);
}

}  // namespace

std::vector<IntervalTally> interval_tallies(const Transcript& t, const TransportPlan& plan) {
    plan.validate(t.size());
    const std::vector<double> knots = source_knots(t);
    std::vector<IntervalTally> tallies(knots.size() - 1);
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        tallies[k].lo = knots[k];
        tallies[k].hi = knots[k + 1];
    }
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < plan.destinations.size(); ++j) {
            const double v = plan.rows[i][j];
            if (v == 0.0) continue;
            IntervalTally& tally = tallies[interval_index(knots, plan.destinations[j])];
            const bool from_left = t.p[i] <= tally.lo;
            if (from_left) {
                (t.x[i] ? tally.unit_l1 : tally.unit_l0) += v;
            } else {
                (t.x[i] ? tally.unit_r1 : tally.unit_r0) += v;
            }
        }
    for (auto& tally : tallies) {
        tally.delta_l = tally.unit_l1 - (tally.unit_l0 + tally.unit_l1) * tally.lo;
        tally.delta_r = tally.unit_r1 - (tally.unit_r0 + tally.unit_r1) * tally.hi;
    }
    return tallies;
}

TransportPlan consolidate_sparse(const Transcript& t, const TransportPlan& plan) {
    require_calibrated(t, plan, "consolidate_sparse");
    const std::vector<double> knots = source_knots(t);
    const std::size_t I = knots.size() - 1;

    // Contributions of each step to (interval, side); the outcome is the
    // step's own bit. side 0 = entered from the left endpoint, 1 = right.
    struct Share {
        std::int32_t step;
        double mass;
    };
    std::vector<std::array<std::vector<Share>, 2>> contrib(I);
    std::vector<std::array<std::array<double, 2>, 2>> mass(I);  // [side][bit]
    for (auto& m : mass) m = {{{0.0, 0.0}, {0.0, 0.0}}};
    for (std::size_t s = 0; s < t.size(); ++s)
        for (std::size_t j = 0; j < plan.destinations.size(); ++j) {
            const double v = plan.rows[s][j];
            if (v == 0.0) continue;
            const std::size_t i = interval_index(knots, plan.destinations[j]);
            const int side = t.p[s] <= knots[i] ? 0 : 1;
            contrib[i][side].push_back({static_cast<std::int32_t>(s), v});
            mass[i][side][t.x[s]] += v;
        }

    // Final destination shares per (interval, side, bit): fraction settling
    // at the entry endpoint plus the leftover's target from the case split.
    struct Route {
        double endpoint_frac[2] = {0.0, 0.0};  // by bit
        double target[2] = {0.0, 0.0};         // leftover destination by bit
    };
    std::vector<std::array<Route, 2>> routes(I);
    std::map<double, std::size_t> dest_index;
    auto dest_col = [&](double v) {
        return dest_index.emplace(v, dest_index.size()).first;  // insert or find
    };

    for (std::size_t i = 0; i < I; ++i) {
        double leftover[2][2];  // [side][bit]
        for (int side = 0; side < 2; ++side) {
            const double e = side == 0 ? knots[i] : knots[i + 1];
            const double u0 = mass[i][side][0];
            const double u1 = mass[i][side][1];
            // Settle coexisting outcome mass at the endpoint in calibrated
            // proportion (ones : zeros = e : 1-e); at the boundary values
            // only the consistent outcome can settle.
            const double r0 = (1.0 - e) > 0.0 ? u0 / (1.0 - e) : kInf;
            const double r1 = e > 0.0 ? u1 / e : kInf;
            double mu = std::min(r0, r1);
            if (!std::isfinite(mu)) mu = 0.0;
            const double settled1 = mu * e;
            const double settled0 = mu * (1.0 - e);
            Route& route = routes[i][side];
            route.endpoint_frac[0] = u0 > 0.0 ? settled0 / u0 : 0.0;
            route.endpoint_frac[1] = u1 > 0.0 ? settled1 / u1 : 0.0;
            leftover[side][0] = std::max(u0 - settled0, 0.0);
            leftover[side][1] = std::max(u1 - settled1, 0.0);
            for (int bit = 0; bit < 2; ++bit)
                if (leftover[side][bit] <= 1e-12) {
                    // Crumb-sized surplus is absorbed at the endpoint.
                    if (mass[i][side][bit] > 0.0) route.endpoint_frac[bit] = 1.0;
                    leftover[side][bit] = 0.0;
                }
        }
        const double l0 = leftover[0][0], l1 = leftover[0][1];
        const double r0 = leftover[1][0], r1 = leftover[1][1];
        double target_ones = 1.0, target_zeros = 0.0;
        if (l1 > 0.0 && r0 > 0.0) {
            // Ones short of zeros on the left, zeros short of ones on the
            // right: merge everything at the calibrated mix.
            target_ones = target_zeros = l1 / (l1 + r0);
        } else if (l0 > 0.0 && r1 > 0.0) {
            // Opposite orientation: merging at the mix competes with walking
            // the surplus out to the boundary values; take the cheaper.
            const double v = r1 / (l0 + r1);
            const double merge_cost = l0 * std::abs(v - knots[i]) + r1 * std::abs(knots[i + 1] - v);
            const double boundary_cost = l0 * knots[i] + r1 * (1.0 - knots[i + 1]);
            if (merge_cost <= boundary_cost) target_ones = target_zeros = v;
        }
        // Same-signed surpluses fall through to the defaults: extra ones go
        // to 1, extra zeros to 0 (each a calibrated destination).
        for (int side = 0; side < 2; ++side) {
            routes[i][side].target[0] = target_zeros;
            routes[i][side].target[1] = target_ones;
        }
        // Touch the destinations so the column set is complete.
        for (int side = 0; side < 2; ++side) {
            const double e = side == 0 ? knots[i] : knots[i + 1];
            for (int bit = 0; bit < 2; ++bit) {
                if (mass[i][side][bit] <= 0.0) continue;
                if (routes[i][side].endpoint_frac[bit] > 0.0) dest_col(e);
                if (routes[i][side].endpoint_frac[bit] < 1.0) dest_col(routes[i][side].target[bit]);
            }
        }
    }

    std::vector<double> dests(dest_index.size());
    std::vector<std::size_t> order(dest_index.size());
    {
        std::size_t k = 0;
        for (auto& [value, idx] : dest_index) {
            dests[k] = value;
            order[idx] = k;
            ++k;
        }
    }
    std::vector<std::vector<double>> rows(t.size(), std::vector<double>(dests.size(), 0.0));
    for (std::size_t i = 0; i < I; ++i)
        for (int side = 0; side < 2; ++side) {
            const double e = side == 0 ? knots[i] : knots[i + 1];
            const Route& route = routes[i][side];
            for (const Share& share : contrib[i][side]) {
                const int bit = t.x[static_cast<std::size_t>(share.step)];
                const double settled = share.mass * route.endpoint_frac[bit];
                if (settled > 0.0) rows[share.step][order[dest_index.at(e)]] += settled;
                const double moved = share.mass - settled;
                if (moved > 0.0) rows[share.step][order[dest_index.at(route.target[bit])]] += moved;
            }
        }
    return tidy_plan(std::move(dests), std::move(rows));
}

UpperBoundResult caldist_upper_bound(const Transcript& t, ConsolidateMode mode, long K) {
    LowerCaldistResult lower = lower_caldist_grid(t, K);
    TransportPlan consolidated =
        mode == ConsolidateMode::General
            ? consolidate_general(t, lower.plan,
                                  static_cast<long>(std::ceil(std::sqrt(static_cast<double>(t.size())))))
            : consolidate_sparse(t, lower.plan);
    RoundResult rounded = round_plan(t, consolidated);
    UpperBoundResult out;
    out.value = rounded.cost;
    out.q = std::move(rounded.q);
    out.diag = lower.diag;
    return out;
}

bool technical_inequalities_check(double alpha, double beta, double p, double* slack1,
                                  double* slack2) {
    if (!(0.0 <= alpha && alpha <= beta && beta <= 1.0 && 0.0 <= p && p <= 1.0))
        throw std::invalid_argument("technical_inequalities_check: need 0 <= alpha <= beta <= 1, p in [0,1]");
    const double lhs1 = p * std::abs(p - alpha) + (1.0 - p) * std::abs(p - beta);
    const double rhs1 = 2.0 * (std::abs(p * (1.0 - alpha) - (1.0 - p) * beta) +
                               (beta - alpha) * std::min(p * (1.0 - alpha), (1.0 - p) * beta));
    const double lhs2 = std::min((1.0 - p) * std::abs(p - alpha) + p * std::abs(p - beta),
                                 (1.0 - p) * alpha + p * (1.0 - beta));
    const double rhs2 = 10.0 * (std::abs((1.0 - p) * alpha - p * (1.0 - beta)) +
                                (beta - alpha) * std::min((1.0 - p) * alpha, p * (1.0 - beta)));
    const double s1 = rhs1 - lhs1;
    const double s2 = rhs2 - lhs2;
    if (slack1) *slack1 = s1;
    if (slack2) *slack2 = s2;
    return s1 >= -1e-12 && s2 >= -1e-12;
}

}  // namespace seqcal
