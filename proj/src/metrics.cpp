#include "seqcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace seqcal {

double ece(const Transcript& t) {
    const BiasProfile prof = bias_profile(t);
    double total = 0.0;
    for (double d : prof.delta) total += std::abs(d);
    return total;
}

SmceResult smce(const Transcript& t) {
    const BiasProfile prof = bias_profile(t);
    const std::size_t m = prof.size();
    // Variables: f_1..f_m in [-1, 1]; one ranged slack per adjacent pair
    // turns |f_{i+1} - f_i| <= gap_i into an equality row.
    LpProblem lp;
    lp.rows = m - 1;
    lp.b.resize(m - 1);
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<std::pair<std::int32_t, double>> entries;
        if (j + 1 < m) entries.push_back({static_cast<std::int32_t>(j), -1.0});
        if (j > 0) entries.push_back({static_cast<std::int32_t>(j - 1), 1.0});
        lp.add_col(-prof.delta[j], -1.0, 1.0, std::move(entries));
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double gap = prof.alpha[i + 1] - prof.alpha[i];
        lp.b[i] = gap;
        lp.add_col(0.0, 0.0, 2.0 * gap, {{static_cast<std::int32_t>(i), 1.0}});
    }
    const LpSolution sol = solve_lp(lp);
    SmceResult out;
    out.value = -sol.objective;
    out.diag = sol.diag;
    if (!(out.diag.duality_gap <= 1e-9))
        throw std::runtime_error("smce: optimality certificate failed (duality gap " +
                                 std::to_string(out.diag.duality_gap) + ")");
    auto& w = out.witness;
    if (prof.alpha.front() > 0.0) {
        w.knot_x.push_back(0.0);
        w.knot_f.push_back(sol.x[0]);
    }
    for (std::size_t j = 0; j < m; ++j) {
        w.knot_x.push_back(prof.alpha[j]);
        w.knot_f.push_back(sol.x[j]);
    }
    if (prof.alpha.back() < 1.0) {
        w.knot_x.push_back(1.0);
        w.knot_f.push_back(sol.x[m - 1]);
    }
    return out;
}

TwoPointResult two_point_witness(double alpha, double beta, double delta_a, double delta_b) {
    if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0))
        throw std::invalid_argument("two_point_witness: values outside [0,1]");
    if (alpha > beta) {
        std::swap(alpha, beta);
        std::swap(delta_a, delta_b);
    }
    TwoPointResult out;
    if (delta_a * delta_b >= 0.0) {
        const double s = (delta_a + delta_b) >= 0.0 ? 1.0 : -1.0;
        out.witness.knot_x = {0.0, 1.0};
        out.witness.knot_f = {s, s};
        out.value = std::abs(delta_a) + std::abs(delta_b);
        return out;
    }
    const bool anchor_a = std::abs(delta_a) >= std::abs(delta_b);
    const double anchor = anchor_a ? alpha : beta;
    const double s = (anchor_a ? delta_a : delta_b) > 0.0 ? 1.0 : -1.0;
    auto tent = [&](double v) { return s * (1.0 - std::abs(v - anchor)); };
    auto& w = out.witness;
    if (anchor > 0.0) {
        w.knot_x.push_back(0.0);
        w.knot_f.push_back(tent(0.0));
    }
    w.knot_x.push_back(anchor);
    w.knot_f.push_back(s);
    if (anchor < 1.0) {
        w.knot_x.push_back(1.0);
        w.knot_f.push_back(tent(1.0));
    }
    out.value = std::abs(delta_a + delta_b) +
                (beta - alpha) * std::min(std::abs(delta_a), std::abs(delta_b));
    return out;
}

namespace {

/// Exact-arithmetic context for the partition oracle: predictions as
/// integers over a common power-of-ten denominator, costs as integers over
/// lcm(1..T) * 10^d. Available when the transcript carries plain decimal
/// literals and T is small enough for the scaling to fit in 64 bits.
struct ExactCtx {
    bool ok = false;
    std::int64_t denom = 1;              // 10^d
    std::int64_t lcm = 1;                // lcm of all possible block sizes
    std::vector<std::int64_t> pnum;      // prediction numerators
};

bool parse_plain_decimal(const std::string& s, int max_digits, std::int64_t& num, int& digits) {
    std::size_t i = 0;
    if (i < s.size() && s[i] == '+') ++i;
    std::int64_t intpart = 0;
    bool any = false;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        intpart = intpart * 10 + (s[i] - '0');
        if (intpart > 1) return false;  // predictions live in [0,1]
        ++i;
        any = true;
    }
    std::int64_t frac = 0;
    digits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            if (++digits > max_digits) return false;
            frac = frac * 10 + (s[i] - '0');
            ++i;
            any = true;
        }
    }
    if (i != s.size() || !any) return false;
    std::int64_t scale = 1;
    for (int k = 0; k < digits; ++k) scale *= 10;
    num = intpart * scale + frac;
    return true;
}

ExactCtx make_exact_ctx(const Transcript& t) {
    ExactCtx ctx;
    if (t.p_text.empty() || t.size() > 16) return ctx;
    constexpr int kMaxDigits = 12;
    std::vector<std::int64_t> nums(t.size());
    std::vector<int> digs(t.size());
    int dmax = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!parse_plain_decimal(t.p_text[i], kMaxDigits, nums[i], digs[i])) return ctx;
        dmax = std::max(dmax, digs[i]);
    }
    ctx.denom = 1;
    for (int k = 0; k < dmax; ++k) ctx.denom *= 10;
    ctx.pnum.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::int64_t scale = 1;
        for (int k = digs[i]; k < dmax; ++k) scale *= 10;
        ctx.pnum[i] = nums[i] * scale;
    }
    ctx.lcm = 1;
    for (std::int64_t s = 2; s <= static_cast<std::int64_t>(t.size()); ++s)
        ctx.lcm = std::lcm(ctx.lcm, s);
    ctx.ok = true;
    return ctx;
}

}  // namespace

CaldistResult caldist_exact(const Transcript& t, int cap) {
    const std::size_t T = t.size();
    if (cap < 1) throw std::invalid_argument("caldist_exact: cap must be positive");
    if (T > static_cast<std::size_t>(cap))
        throw std::invalid_argument("caldist_exact: transcript length " + std::to_string(T) +
                                    " exceeds enumeration cap " + std::to_string(cap));
    const ExactCtx exact = make_exact_ctx(t);

    std::vector<int> a(T, 0);   // restricted growth string: block id per step
    std::vector<int> mx(T, 0);  // running maximum of a
    std::vector<int> best = a;
    double best_cost_f = std::numeric_limits<double>::infinity();
    __int128 best_cost_i = -1;

    std::vector<std::int32_t> size(T), ones(T);
    for (;;) {
        const int blocks = mx[T - 1] + 1;
        std::fill(size.begin(), size.begin() + blocks, 0);
        std::fill(ones.begin(), ones.begin() + blocks, 0);
        for (std::size_t i = 0; i < T; ++i) {
            ++size[a[i]];
            ones[a[i]] += t.x[i];
        }
        if (exact.ok) {
            __int128 cost = 0;
            for (std::size_t i = 0; i < T; ++i) {
                const std::int64_t s = size[a[i]];
                const std::int64_t diff =
                    exact.pnum[i] * s - static_cast<std::int64_t>(ones[a[i]]) * exact.denom;
                cost += static_cast<__int128>(std::abs(diff)) * (exact.lcm / s);
            }
            if (best_cost_i < 0 || cost < best_cost_i) {
                best_cost_i = cost;
                best = a;
            }
        } else {
            double cost = 0.0;
            for (std::size_t i = 0; i < T; ++i)
                cost += std::abs(t.p[i] - static_cast<double>(ones[a[i]]) / size[a[i]]);
            if (cost < best_cost_f) {
                best_cost_f = cost;
                best = a;
            }
        }
        // Advance to the next restricted growth string.
        std::size_t i = T - 1;
        while (i > 0 && a[i] == mx[i - 1] + 1) --i;
        if (i == 0) break;
        ++a[i];
        mx[i] = std::max(mx[i - 1], a[i]);
        for (std::size_t k = i + 1; k < T; ++k) {
            a[k] = 0;
            mx[k] = mx[k - 1];
        }
    }

    CaldistResult out;
    const int blocks = 1 + *std::max_element(best.begin(), best.end());
    std::fill(size.begin(), size.begin() + blocks, 0);
    std::fill(ones.begin(), ones.begin() + blocks, 0);
    for (std::size_t i = 0; i < T; ++i) {
        ++size[best[i]];
        ones[best[i]] += t.x[i];
    }
    out.certificate.q.resize(T);
    out.certificate.block.assign(best.begin(), best.end());
    double cost = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
        out.certificate.q[i] = static_cast<double>(ones[best[i]]) / size[best[i]];
        cost += std::abs(t.p[i] - out.certificate.q[i]);
    }
    out.value = cost;
    return out;
}

CalibratedPredictions bucket_mean_predictions(const Transcript& t) {
    const BiasProfile prof = bias_profile(t);
    CalibratedPredictions out;
    out.q.resize(t.size());
    out.block.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto it = std::lower_bound(prof.alpha.begin(), prof.alpha.end(), t.p[i]);
        const std::size_t g = static_cast<std::size_t>(it - prof.alpha.begin());
        // Group frequency = alpha + Delta_alpha / n_alpha.
        out.q[i] = t.p[i] + prof.delta[g] / static_cast<double>(prof.count[g]);
        out.block[i] = static_cast<std::int32_t>(g);
    }
    return out;
}

}  // namespace seqcal
