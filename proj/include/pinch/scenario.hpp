#pragma once

// Scenario geometry, RF constants, unit conversions and seeded user drops.
//
// Coordinates: the waveguide runs along the x-axis at y = 0, z = height,
// starting at the feed point (0, 0, height). Users live on the ground plane
// inside x in [0, d1], y in [-d2/2, d2/2].

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pinch {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Point3&, const Point3&) = default;
};

inline double distance(const Point3& a, const Point3& b) {
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

inline bool is_finite(const Point3& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SystemConfig {
    double d1 = 10.0;              // waveguide / area length [m]
    double d2 = 6.0;               // area width [m]
    double height = 3.0;           // waveguide height [m]
    double carrier_hz = 28e9;
    double n_eff = 1.4;
    double kappa_db_per_m = 0.1;
    double pt_dbm = 30.0;
    double noise_dbm = -90.0;
    std::size_t n_users = 2;
    std::size_t k_antennas = 2;
    std::size_t l_positions = 20;
    std::uint64_t seed = 1;

    double wavelength() const { return kSpeedOfLight / carrier_hz; }

    double position_spacing() const {
        return d1 / static_cast<double>(l_positions - 1);
    }

    /// Throws ConfigError naming the first violated constraint.
    void validate() const {
        auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
        if (!(d1 > 0.0) || !std::isfinite(d1)) fail("d1 must be positive");
        if (!(d2 > 0.0) || !std::isfinite(d2)) fail("d2 must be positive");
        if (!(height > 0.0) || !std::isfinite(height)) fail("height must be positive");
        if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz)) fail("carrier_hz must be positive");
        if (!(n_eff >= 1.0) || !std::isfinite(n_eff)) fail("n_eff must be >= 1");
        if (!(kappa_db_per_m >= 0.0) || !std::isfinite(kappa_db_per_m)) fail("kappa_db_per_m must be >= 0");
        if (!std::isfinite(pt_dbm)) fail("pt_dbm must be finite");
        if (!std::isfinite(noise_dbm)) fail("noise_dbm must be finite");
        if (n_users < 1) fail("n_users must be >= 1");
        if (l_positions < 2) fail("l_positions must be >= 2");
        if (k_antennas < 1 || k_antennas > l_positions) fail("k_antennas must be in [1, l_positions]");
        if (position_spacing() < wavelength() / 2.0) fail("position spacing d1/(l_positions-1) is below half a wavelength");
    }
};

struct RfConstants {
    double lambda;    // free-space wavelength [m]
    double lambda_g;  // guided wavelength [m]
    double eta;       // c / (4 pi f_c) [m]
};

inline RfConstants derived_rf(const SystemConfig& config) {
    const double lambda = kSpeedOfLight / config.carrier_hz;
    return {lambda, lambda / config.n_eff, lambda / (4.0 * std::numbers::pi)};
}

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline Point3 feed_point(const SystemConfig& config) { return {0.0, 0.0, config.height}; }

/// Candidate pinching positions, uniformly spaced over [0, d1], ascending in x.
inline std::vector<Point3> build_positions(const SystemConfig& config) {
    if (config.l_positions < 2) {
        throw ConfigError("build_positions: l_positions must be >= 2");
    }
    const std::size_t last = config.l_positions - 1;
    std::vector<Point3> positions;
    positions.reserve(config.l_positions);
    for (std::size_t l = 0; l <= last; ++l) {
        const double x = (l == last) ? config.d1
                                     : config.d1 * static_cast<double>(l) / static_cast<double>(last);
        positions.push_back({x, 0.0, config.height});
    }
    return positions;
}

// ---------------------------------------------------------------------------
// Random streams

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class Stream : std::uint64_t { users = 0x75736572ULL, matching = 0x6d617463ULL };

/// Seed for one (stream, trial) pair. User drops and initial matchings come
/// from different streams, so every scheme sees the same drop for a trial.
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index) {
    return splitmix64(splitmix64(master ^ static_cast<std::uint64_t>(stream)) + index);
}

/// Uniform double in [0, 1) using the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, bound) by rejection; bound > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = Rng::max() - Rng::max() % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % bound;
}

inline std::vector<Point3> sample_users(const SystemConfig& config, Rng& rng) {
    std::vector<Point3> users;
    users.reserve(config.n_users);
    for (std::size_t n = 0; n < config.n_users; ++n) {
        const double x = config.d1 * uniform01(rng);
        const double y = config.d2 * (uniform01(rng) - 0.5);
        users.push_back({x, y, 0.0});
    }
    return users;
}

struct Deployment {
    std::vector<Point3> users;
    std::vector<Point3> positions;
    Point3 feed;

    static Deployment with_users(const SystemConfig& config, std::vector<Point3> users) {
        return {std::move(users), build_positions(config), feed_point(config)};
    }

    static Deployment sample(const SystemConfig& config, Rng& rng) {
        return with_users(config, sample_users(config, rng));
    }
};

/// FNV-1a over the raw coordinates; used to audit that schemes share drops.
inline std::uint64_t drop_digest(const Deployment& deployment) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& p : deployment.users) {
        mix(p.x);
        mix(p.y);
        mix(p.z);
    }
    return h;
}

}  // namespace pinch
