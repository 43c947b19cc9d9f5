#pragma once

// Independent reference evaluation of the downlink sum rate, written straight
// from the physical model without touching the library. Real/imaginary parts
// are accumulated by hand and interference terms are summed explicitly per
// rank, so no code path is shared with the implementation under test.

#include <array>
#include <cmath>
#include <vector>

namespace oracle {

using Vec3 = std::array<double, 3>;

struct Params {
    double carrier_hz;
    double n_eff;
    double kappa_db_per_m;
    double pt_dbm;
    double noise_dbm;
    bool waveguide_phase = true;
    bool waveguide_loss = true;
};

inline double norm3(const Vec3& a, const Vec3& b) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

/// |h_n|^2 for every user.
inline std::vector<double> gains(const std::vector<Vec3>& users, const std::vector<Vec3>& antennas, const Vec3& feed,
                                 const Params& p) {
    const double pi = 3.14159265358979323846;
    const double c = 299792458.0;
    const double lambda = c / p.carrier_hz;
    const double lambda_g = lambda / p.n_eff;
    const double eta = c / (4.0 * pi * p.carrier_hz);
    const double pt = std::pow(10.0, p.pt_dbm / 10.0) / 1000.0;
    std::vector<double> out;
    for (const auto& u : users) {
        double re = 0.0, im = 0.0;
        for (const auto& a : antennas) {
            const double r = norm3(u, a);
            const double in_guide = norm3(feed, a);
            const double theta = p.waveguide_phase ? 2.0 * pi * in_guide / lambda_g : 0.0;
            const double loss_db = p.waveguide_loss ? p.kappa_db_per_m * in_guide : 0.0;
            const double power = pt / static_cast<double>(antennas.size()) * std::pow(10.0, -loss_db / 10.0);
            const double amp = eta / r * std::sqrt(power);
            const double phase = -(2.0 * pi * r / lambda) - theta;
            re += amp * std::cos(phase);
            im += amp * std::sin(phase);
        }
        out.push_back(re * re + im * im);
    }
    return out;
}

/// Sum of SIC rates. alpha_by_rank[m] belongs to the m-th weakest user.
inline double sum_rate(const std::vector<double>& g, const std::vector<double>& alpha_by_rank, double noise_dbm) {
    const double noise = std::pow(10.0, noise_dbm / 10.0) / 1000.0;
    const std::size_t n = g.size();
    // Rank users by selection: weakest first, lower index wins ties.
    std::vector<std::size_t> order;
    std::vector<bool> taken(n, false);
    for (std::size_t m = 0; m < n; ++m) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i] && (best == n || g[i] < g[best])) best = i;
        }
        taken[best] = true;
        order.push_back(best);
    }
    double total = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double gm = g[order[m]];
        double interference = 0.0;
        for (std::size_t i = m + 1; i < n; ++i) interference += alpha_by_rank[i] * gm;
        const double sinr = alpha_by_rank[m] * gm / (interference + noise);
        total += std::log(1.0 + sinr) / std::log(2.0);
    }
    return total;
}

}  // namespace oracle
