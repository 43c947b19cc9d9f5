#pragma once

// Free-space spherical-wave coefficients, in-waveguide phase and attenuation,
// and the coherent effective channel h_n(S) seen by each user.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "pinch/scenario.hpp"

namespace pinch {

using Complex = std::complex<double>;

/// Set of activated antennas. Grid positions are stored as sorted, distinct
/// 0-based indices into Deployment::positions. Off-grid points are only used
/// by baselines that place antennas at arbitrary coordinates.
class ActiveSet {
public:
    ActiveSet() = default;

    explicit ActiveSet(std::vector<std::size_t> indices, std::vector<Point3> off_grid = {})
        : indices_(std::move(indices)), off_grid_(std::move(off_grid)) {
        std::sort(indices_.begin(), indices_.end());
        if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
            throw std::invalid_argument("ActiveSet: duplicate position index");
        }
    }

    static ActiveSet off_grid_only(std::vector<Point3> points) { return ActiveSet({}, std::move(points)); }

    const std::vector<std::size_t>& indices() const { return indices_; }
    const std::vector<Point3>& off_grid() const { return off_grid_; }

    std::size_t size() const { return indices_.size() + off_grid_.size(); }
    bool empty() const { return size() == 0; }

    /// Resolves every active antenna to a coordinate, grid entries first.
    std::vector<Point3> points(std::span<const Point3> grid) const {
        std::vector<Point3> out;
        out.reserve(size());
        for (auto l : indices_) {
            if (l >= grid.size()) throw std::out_of_range("ActiveSet: position index out of range");
            out.push_back(grid[l]);
        }
        out.insert(out.end(), off_grid_.begin(), off_grid_.end());
        return out;
    }

    friend bool operator==(const ActiveSet&, const ActiveSet&) = default;

private:
    std::vector<std::size_t> indices_;
    std::vector<Point3> off_grid_;
};

struct EffectiveChannel {
    std::vector<Complex> per_user;
    std::vector<double> gains;  // |h_n(S)|^2
};

/// Switches for the in-waveguide effects. A conventional fixed-antenna array
/// has neither.
struct WaveguideModel {
    bool phase = true;
    bool loss = true;
};

/// eta * exp(-j 2 pi r / lambda) / r.
inline Complex free_space_coeff(const Point3& user, const Point3& antenna, double lambda, double eta) {
    const double r = distance(user, antenna);
    if (!(r > 0.0)) {
        throw std::domain_error("free_space_coeff: user and antenna are co-located");
    }
    return std::polar(eta / r, -2.0 * std::numbers::pi * r / lambda);
}

inline double waveguide_phase(const Point3& feed, const Point3& antenna, double lambda_g) {
    return 2.0 * std::numbers::pi * distance(feed, antenna) / lambda_g;
}

/// Equal power split over the active set, attenuated along the dielectric.
inline double antenna_power(double pt_watts, std::size_t set_size, double kappa_db_per_m,
                            double dist_from_feed) {
    if (set_size == 0) {
        throw std::invalid_argument("antenna_power: empty active set");
    }
    return pt_watts / static_cast<double>(set_size) * std::pow(10.0, -kappa_db_per_m * dist_from_feed / 10.0);
}

inline EffectiveChannel effective_channel(std::span<const Point3> users, const ActiveSet& active,
                                          const Deployment& deployment, const SystemConfig& config,
                                          WaveguideModel model = {}) {
    EffectiveChannel out;
    out.per_user.assign(users.size(), Complex{});
    out.gains.assign(users.size(), 0.0);
    if (active.empty()) return out;

    const auto rf = derived_rf(config);
    const double pt = dbm_to_watts(config.pt_dbm);
    const double kappa = model.loss ? config.kappa_db_per_m : 0.0;
    const auto antennas = active.points(deployment.positions);

    // Per-antenna feed term exp(-j theta_l) sqrt(p_l), shared by all users.
    std::vector<Complex> feed_terms;
    feed_terms.reserve(antennas.size());
    for (const auto& a : antennas) {
        const double dist = distance(deployment.feed, a);
        const double theta = model.phase ? waveguide_phase(deployment.feed, a, rf.lambda_g) : 0.0;
        feed_terms.push_back(std::polar(std::sqrt(antenna_power(pt, antennas.size(), kappa, dist)), -theta));
    }

    for (std::size_t n = 0; n < users.size(); ++n) {
        Complex h{};
        for (std::size_t i = 0; i < antennas.size(); ++i) {
            h += free_space_coeff(users[n], antennas[i], rf.lambda, rf.eta) * feed_terms[i];
        }
        out.per_user[n] = h;
        out.gains[n] = std::norm(h);
    }
    return out;
}

/// Per-(user, grid position) channel contributions at unit total power,
/// cached so that evaluating many candidate sets on one drop only costs a
/// sum per user. h_n(S) = sqrt(P_t / |S|) * sum_{l in S} unit(n, l).
class ChannelTable {
public:
    ChannelTable(const Deployment& deployment, const SystemConfig& config)
        : n_users_(deployment.users.size()),
          n_positions_(deployment.positions.size()),
          sqrt_pt_(std::sqrt(dbm_to_watts(config.pt_dbm))),
          unit_(n_users_ * n_positions_) {
        const auto rf = derived_rf(config);
        for (std::size_t l = 0; l < n_positions_; ++l) {
            const auto& a = deployment.positions[l];
            const double dist = distance(deployment.feed, a);
            const Complex feed = std::polar(std::sqrt(antenna_power(1.0, 1, config.kappa_db_per_m, dist)),
                                            -waveguide_phase(deployment.feed, a, rf.lambda_g));
            for (std::size_t n = 0; n < n_users_; ++n) {
                unit_[n * n_positions_ + l] = free_space_coeff(deployment.users[n], a, rf.lambda, rf.eta) * feed;
            }
        }
    }

    std::size_t users() const { return n_users_; }
    std::size_t positions() const { return n_positions_; }

    Complex unit(std::size_t user, std::size_t position) const { return unit_[user * n_positions_ + position]; }

    /// Gains |h_n(S)|^2 for a set of grid indices (any order; summed ascending).
    void gains(std::span<const std::size_t> sorted_indices, std::vector<double>& out) const {
        out.assign(n_users_, 0.0);
        if (sorted_indices.empty()) return;
        const double scale = sqrt_pt_ / std::sqrt(static_cast<double>(sorted_indices.size()));
        for (std::size_t n = 0; n < n_users_; ++n) {
            Complex h{};
            const Complex* row = unit_.data() + n * n_positions_;
            for (auto l : sorted_indices) h += row[l];
            out[n] = std::norm(h * scale);
        }
    }

private:
    std::size_t n_users_;
    std::size_t n_positions_;
    double sqrt_pt_;
    std::vector<Complex> unit_;
};

}  // namespace pinch
