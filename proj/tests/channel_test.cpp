#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracle.hpp"
#include "pinch/channel.hpp"

namespace pinch {
namespace {

constexpr double kPi = std::numbers::pi;

SystemConfig config28() {
    SystemConfig c;
    c.d1 = 10.0;
    c.d2 = 6.0;
    c.height = 3.0;
    c.l_positions = 20;
    c.n_users = 3;
    c.k_antennas = 4;
    c.pt_dbm = 30.0;
    return c;
}

TEST(FreeSpaceCoeff, UnitDistanceMagnitudeIsEta) {
    const auto rf = derived_rf(config28());
    const auto h = free_space_coeff({0, 0, 0}, {1, 0, 0}, rf.lambda, rf.eta);
    EXPECT_NEAR(std::abs(h), rf.eta, 1e-18);
}

TEST(FreeSpaceCoeff, InverseDistance) {
    const auto rf = derived_rf(config28());
    const auto h1 = free_space_coeff({0, 0, 0}, {0, 1, 0}, rf.lambda, rf.eta);
    const auto h2 = free_space_coeff({0, 0, 0}, {0, 2, 0}, rf.lambda, rf.eta);
    EXPECT_NEAR(std::abs(h2) / std::abs(h1), 0.5, 1e-15);
}

TEST(FreeSpaceCoeff, UserBelowAntennaAtThreeMetres) {
    const auto rf = derived_rf(config28());
    const auto h = free_space_coeff({5, 0, 0}, {5, 0, 3}, rf.lambda, rf.eta);
    EXPECT_NEAR(std::abs(h), 2.8400864043e-4, 1e-14);
    EXPECT_NEAR(std::arg(h), std::remainder(-2.0 * kPi * 3.0 / rf.lambda, 2.0 * kPi), 1e-9);
}

TEST(FreeSpaceCoeff, RejectsCoLocation) {
    const auto rf = derived_rf(config28());
    EXPECT_THROW(free_space_coeff({1, 2, 3}, {1, 2, 3}, rf.lambda, rf.eta), std::domain_error);
}

TEST(WaveguidePhase, Examples) {
    const auto rf = derived_rf(config28());
    const Point3 feed{0, 0, 3};
    EXPECT_EQ(waveguide_phase(feed, feed, rf.lambda_g), 0.0);
    EXPECT_NEAR(waveguide_phase(feed, {rf.lambda_g / 2.0, 0, 3}, rf.lambda_g), kPi, 1e-12);
    EXPECT_NEAR(waveguide_phase(feed, {2.0, 0, 3}, rf.lambda_g), 2.0 * kPi * 261.5142506353512, 1e-9);
}

TEST(AntennaPower, Examples) {
    EXPECT_EQ(antenna_power(1.0, 4, 0.0, 7.5), 0.25);
    EXPECT_NEAR(antenna_power(1.0, 1, 0.1, 10.0), 0.7943282347242815, 1e-15);
    EXPECT_EQ(antenna_power(2.0, 2, 0.1, 0.0), 1.0);
    EXPECT_THROW(antenna_power(1.0, 0, 0.1, 1.0), std::invalid_argument);
}

TEST(ActiveSet, SortsAndRejectsDuplicates) {
    ActiveSet s({5, 1, 3});
    EXPECT_EQ(s.indices(), (std::vector<std::size_t>{1, 3, 5}));
    EXPECT_THROW(ActiveSet({2, 2}), std::invalid_argument);
    SystemConfig c = config28();
    const auto grid = build_positions(c);
    EXPECT_THROW(ActiveSet({99}).points(grid), std::out_of_range);
}

TEST(EffectiveChannel, EmptySetIsZero) {
    SystemConfig c = config28();
    const auto d = Deployment::with_users(c, {{1, 1, 0}, {4, -2, 0}, {9, 0.5, 0}});
    const auto ch = effective_channel(d.users, ActiveSet{}, d, c);
    for (double g : ch.gains) EXPECT_EQ(g, 0.0);
}

TEST(EffectiveChannel, SingleAntennaAtFeed) {
    SystemConfig c = config28();
    c.kappa_db_per_m = 0.0;
    const auto d = Deployment::with_users(c, {{1, 1, 0}, {4, -2, 0}});
    const auto ch = effective_channel(d.users, ActiveSet({0}), d, c);
    const auto rf = derived_rf(c);
    for (std::size_t n = 0; n < d.users.size(); ++n) {
        const double r = distance(d.users[n], d.feed);
        EXPECT_NEAR(ch.gains[n], 1.0 * rf.eta * rf.eta / (r * r), 1e-12 * ch.gains[n]);
        EXPECT_NEAR(ch.gains[n], std::norm(ch.per_user[n]), 1e-12 * ch.gains[n]);
    }
}

TEST(EffectiveChannel, DestructiveInterferenceCancels) {
    // Two antennas equidistant from the user, fed with a half guided
    // wavelength offset and no loss: equal amplitudes, opposite phases.
    SystemConfig c = config28();
    c.kappa_db_per_m = 0.0;
    const auto rf = derived_rf(c);
    const double x0 = 2.0;
    const double x1 = x0 + rf.lambda_g / 2.0;
    const Point3 user{(x0 + x1) / 2.0, 1.0, 0.0};
    const auto d = Deployment::with_users(c, {user});
    const auto active = ActiveSet::off_grid_only({{x0, 0, c.height}, {x1, 0, c.height}});
    const auto ch = effective_channel(d.users, active, d, c);
    const double single = rf.eta / distance(user, {x0, 0, c.height}) * std::sqrt(0.5);
    EXPECT_LT(std::abs(ch.per_user[0]), 1e-9 * single);
}

TEST(EffectiveChannel, MatchesIndependentOracle) {
    SystemConfig c = config28();
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = Deployment::sample(c, rng);
        const ActiveSet s({static_cast<std::size_t>(trial % 5), 7, 13});
        const auto ch = effective_channel(d.users, s, d, c);
        std::vector<oracle::Vec3> users, antennas;
        for (auto& u : d.users) users.push_back({u.x, u.y, u.z});
        for (auto& a : s.points(d.positions)) antennas.push_back({a.x, a.y, a.z});
        const auto ref = oracle::gains(users, antennas, {0, 0, c.height},
                                       {c.carrier_hz, c.n_eff, c.kappa_db_per_m, c.pt_dbm, c.noise_dbm});
        for (std::size_t n = 0; n < ref.size(); ++n) EXPECT_NEAR(ch.gains[n], ref[n], 1e-9 * ref[n]);
    }
}

TEST(EffectiveChannel, WaveguideModelSwitches) {
    SystemConfig c = config28();
    c.kappa_db_per_m = 0.5;
    const auto d = Deployment::with_users(c, {{6, 1, 0}});
    const ActiveSet far({19});
    const auto lossy = effective_channel(d.users, far, d, c);
    const auto lossless = effective_channel(d.users, far, d, c, {.phase = true, .loss = false});
    // 10 m at 0.5 dB/m is 5 dB.
    EXPECT_NEAR(lossy.gains[0] / lossless.gains[0], std::pow(10.0, -0.5), 1e-12);
    const auto no_phase = effective_channel(d.users, far, d, c, {.phase = false, .loss = false});
    EXPECT_NEAR(no_phase.gains[0], lossless.gains[0], 1e-12 * lossless.gains[0]);
}

TEST(ChannelTable, AgreesWithDirectEvaluation) {
    SystemConfig c = config28();
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const auto d = Deployment::sample(c, rng);
        const ChannelTable table(d, c);
        std::vector<std::size_t> idx;
        for (std::size_t l = trial % 3; l < c.l_positions; l += 3 + trial % 4) idx.push_back(l);
        std::vector<double> g;
        table.gains(idx, g);
        const auto direct = effective_channel(d.users, ActiveSet(idx), d, c);
        for (std::size_t n = 0; n < g.size(); ++n) EXPECT_NEAR(g[n], direct.gains[n], 1e-10 * direct.gains[n] + 1e-30);
    }
}

}  // namespace
}  // namespace pinch
