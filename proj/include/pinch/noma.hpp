#pragma once

// NOMA downlink with successive interference cancellation: decoding order,
// per-user achievable rates, sum rate and Jain fairness.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "pinch/channel.hpp"
#include "pinch/scenario.hpp"

namespace pinch {

/// Power-allocation coefficients indexed by SIC rank (0 = weakest user).
class PowerAllocation {
public:
    explicit PowerAllocation(std::vector<double> alpha) : alpha_(std::move(alpha)) {
        if (alpha_.empty()) throw std::invalid_argument("PowerAllocation: no users");
        double total = 0.0;
        for (double a : alpha_) {
            if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("PowerAllocation: negative coefficient");
            total += a;
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("PowerAllocation: coefficients must sum to 1");
    }

    /// alpha_n = 1/N for every user.
    static PowerAllocation fixed(std::size_t n_users) {
        return PowerAllocation(std::vector<double>(n_users, 1.0 / static_cast<double>(n_users)));
    }

    std::size_t size() const { return alpha_.size(); }
    double operator[](std::size_t rank) const { return alpha_[rank]; }
    std::span<const double> coefficients() const { return alpha_; }

private:
    std::vector<double> alpha_;
};

struct RateReport {
    std::vector<std::size_t> order;  // users by ascending gain; order[m] is the rank-m user
    std::vector<double> rates;       // per user, bits/s/Hz, indexed by user
    std::vector<double> gains;       // sorted ascending, gains[m] belongs to order[m]
    double sum_rate = 0.0;
    double fairness = 1.0;
};

/// Ascending-gain permutation; equal gains keep ascending user index.
inline std::vector<std::size_t> sic_order(std::span<const double> gains) {
    std::vector<std::size_t> order(gains.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gains[a] < gains[b]; });
    return order;
}

/// Rates by SIC rank. The rank-m user cancels ranks < m and sees ranks > m as
/// interference; the strongest user is interference free.
inline std::vector<double> user_rates(std::span<const double> sorted_gains, const PowerAllocation& alloc,
                                      double noise_watts) {
    const std::size_t n = sorted_gains.size();
    if (alloc.size() != n) throw std::invalid_argument("user_rates: allocation size mismatch");
    std::vector<double> rates(n, 0.0);
    double above = 0.0;  // sum of alpha over ranks > m
    for (std::size_t m = n; m-- > 0;) {
        const double g = sorted_gains[m];
        rates[m] = std::log2(1.0 + alloc[m] * g / (g * above + noise_watts));
        above += alloc[m];
    }
    return rates;
}

/// (sum r)^2 / (N sum r^2); all-zero rates count as perfectly fair.
inline double jain_fairness(std::span<const double> rates) {
    if (rates.empty()) throw std::invalid_argument("jain_fairness: no rates");
    double s = 0.0;
    double s2 = 0.0;
    for (double r : rates) {
        if (r < 0.0) throw std::invalid_argument("jain_fairness: negative rate");
        s += r;
        s2 += r * r;
    }
    if (s2 == 0.0) return 1.0;
    return s * s / (static_cast<double>(rates.size()) * s2);
}

/// Builds the full report from per-user gains.
inline RateReport rates_from_gains(std::span<const double> gains, const PowerAllocation& alloc, double noise_watts) {
    RateReport report;
    report.order = sic_order(gains);
    report.gains.reserve(gains.size());
    for (auto u : report.order) report.gains.push_back(gains[u]);
    const auto ranked = user_rates(report.gains, alloc, noise_watts);
    report.rates.assign(gains.size(), 0.0);
    for (std::size_t m = 0; m < ranked.size(); ++m) report.rates[report.order[m]] = ranked[m];
    for (double r : ranked) report.sum_rate += r;
    report.fairness = jain_fairness(report.rates);
    return report;
}

inline RateReport sum_rate(const ActiveSet& active, const Deployment& deployment, const SystemConfig& config,
                           const PowerAllocation& alloc, WaveguideModel model = {}) {
    const auto channel = effective_channel(deployment.users, active, deployment, config, model);
    return rates_from_gains(channel.gains, alloc, dbm_to_watts(config.noise_dbm));
}

}  // namespace pinch
