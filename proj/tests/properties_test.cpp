// Randomised invariant checks. Each property runs over 10,000 generated
// instances drawn from a fixed seed.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pinch/activation.hpp"
#include "pinch/noma.hpp"
#include "random_instance.hpp"

namespace pinch {
namespace {

using testing_support::random_instance;

constexpr int kCases = 10000;

TEST(Properties, TriangleInequalityBound) {
    Rng rng(101);
    for (int i = 0; i < kCases; ++i) {
        const auto inst = random_instance(rng);
        const auto& c = inst.config;
        const auto& d = inst.deployment;
        const auto ch = effective_channel(d.users, inst.active, d, c);
        const auto rf = derived_rf(c);
        const double pt = dbm_to_watts(c.pt_dbm);
        for (std::size_t n = 0; n < d.users.size(); ++n) {
            double bound = 0.0;
            for (const auto& a : inst.active.points(d.positions)) {
                const double p = antenna_power(pt, inst.active.size(), c.kappa_db_per_m, distance(d.feed, a));
                bound += std::sqrt(p) * rf.eta / distance(d.users[n], a);
            }
            ASSERT_LE(std::abs(ch.per_user[n]), bound * (1.0 + 1e-12));
            ASSERT_NEAR(ch.gains[n], std::norm(ch.per_user[n]), 1e-12 * ch.gains[n]);
        }
    }
}

TEST(Properties, PowerConservation) {
    Rng rng(102);
    for (int i = 0; i < kCases; ++i) {
        const auto inst = random_instance(rng);
        const auto& c = inst.config;
        const double pt = dbm_to_watts(c.pt_dbm);
        double total = 0.0;
        for (const auto& a : inst.active.points(inst.deployment.positions)) {
            total += antenna_power(pt, inst.active.size(), c.kappa_db_per_m, distance(inst.deployment.feed, a));
        }
        ASSERT_LE(total, pt * (1.0 + 1e-12));
        const bool lossless = c.kappa_db_per_m == 0.0;
        const bool all_at_feed = inst.active.indices() == std::vector<std::size_t>{0};
        if (lossless || all_at_feed) {
            ASSERT_NEAR(total, pt, 1e-12 * pt);
        } else {
            ASSERT_LT(total, pt);
        }
    }
}

TEST(Properties, SumRateUpperBound) {
    Rng rng(103);
    for (int i = 0; i < kCases; ++i) {
        const auto inst = random_instance(rng);
        const auto& c = inst.config;
        const auto rep = sum_rate(inst.active, inst.deployment, c, PowerAllocation::fixed(c.n_users));
        const double noise = dbm_to_watts(c.noise_dbm);
        const double bound = std::log2(1.0 + rep.gains.back() / noise);
        ASSERT_LE(rep.sum_rate, bound * (1.0 + 1e-12));
        double total = 0.0;
        for (double r : rep.rates) {
            ASSERT_GE(r, 0.0);
            total += r;
        }
        ASSERT_NEAR(rep.sum_rate, total, 1e-12 * std::max(1.0, total));
    }
}

TEST(Properties, SicDecodability) {
    // The rank-m user must decode every weaker user's symbol at least as
    // well as that user decodes it itself.
    Rng rng(104);
    for (int i = 0; i < kCases; ++i) {
        const auto inst = random_instance(rng);
        const auto& c = inst.config;
        const auto alloc = PowerAllocation::fixed(c.n_users);
        const auto rep = sum_rate(inst.active, inst.deployment, c, alloc);
        const double noise = dbm_to_watts(c.noise_dbm);
        const auto& g = rep.gains;
        for (std::size_t j = 0; j < g.size(); ++j) {
            double above = 0.0;
            for (std::size_t q = j + 1; q < g.size(); ++q) above += alloc[q];
            const double own = alloc[j] * g[j] / (above * g[j] + noise);
            for (std::size_t m = j + 1; m < g.size(); ++m) {
                const double at_m = alloc[j] * g[m] / (above * g[m] + noise);
                ASSERT_GE(at_m, own * (1.0 - 1e-12));
            }
        }
    }
}

TEST(Properties, JainIndexRange) {
    Rng rng(105);
    for (int i = 0; i < kCases; ++i) {
        const std::size_t n = 1 + uniform_below(rng, 12);
        std::vector<double> rates(n);
        for (auto& r : rates) r = (uniform01(rng) < 0.3) ? 0.0 : 10.0 * uniform01(rng);
        const double j = jain_fairness(rates);
        ASSERT_GE(j, 1.0 / static_cast<double>(n) - 1e-12);
        ASSERT_LE(j, 1.0 + 1e-12);
    }
}

TEST(Properties, MatchingInjectiveAfterEveryMove) {
    Rng rng(106);
    for (int i = 0; i < kCases; ++i) {
        const std::size_t L = 2 + uniform_below(rng, 15);
        const std::size_t K = 1 + uniform_below(rng, L);
        Matching m(K, L);
        for (int step = 0; step < 20; ++step) {
            const std::size_t k = uniform_below(rng, K);
            const std::size_t l = uniform_below(rng, L);
            if (m.is_free(l)) {
                Move{k, m.position_of(k), l, 0}.apply(m);
            } else if (m.position_of(k) == l) {
                Move{k, l, std::nullopt, 0}.apply(m);
            }
            ASSERT_TRUE(m.is_consistent());
            ASSERT_LE(m.active_count(), K);
            const auto idx = m.active_indices();
            ASSERT_TRUE(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
        }
    }
}

TEST(Properties, MatchingStaysOneToOneAlongTrajectory) {
    Rng rng(107);
    for (int i = 0; i < 1000; ++i) {
        auto inst = random_instance(rng);
        const auto& c = inst.config;
        const auto& d = inst.deployment;
        const auto alloc = PowerAllocation::fixed(c.n_users);
        Matching initial = random_matching(c, d, rng);
        const auto result = matching_activation(c, d, alloc, initial);
        Matching replay = initial;
        for (const auto& move : result.trajectory.moves) {
            ASSERT_EQ(replay.position_of(move.antenna), move.from);
            move.apply(replay);
            ASSERT_TRUE(replay.is_consistent());
        }
        ASSERT_EQ(replay, result.matching);
    }
}

TEST(Properties, PermutingUsersPermutesRates) {
    Rng rng(108);
    for (int i = 0; i < kCases; ++i) {
        auto inst = random_instance(rng);
        auto& c = inst.config;
        const auto alloc = PowerAllocation::fixed(c.n_users);
        const auto base = sum_rate(inst.active, inst.deployment, c, alloc);
        std::vector<std::size_t> perm(c.n_users);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::reverse(perm.begin(), perm.end());
        Deployment shuffled = inst.deployment;
        for (std::size_t n = 0; n < perm.size(); ++n) shuffled.users[n] = inst.deployment.users[perm[n]];
        const auto rep = sum_rate(inst.active, shuffled, c, alloc);
        ASSERT_NEAR(rep.sum_rate, base.sum_rate, 1e-12 * std::max(1.0, base.sum_rate));
        ASSERT_NEAR(rep.fairness, base.fairness, 1e-12);
        for (std::size_t n = 0; n < perm.size(); ++n) ASSERT_NEAR(rep.rates[n], base.rates[perm[n]], 1e-12);
    }
}

TEST(Properties, PowerScalesGainsLinearly) {
    Rng rng(109);
    for (int i = 0; i < kCases; ++i) {
        auto inst = random_instance(rng);
        const auto a = effective_channel(inst.deployment.users, inst.active, inst.deployment, inst.config);
        SystemConfig louder = inst.config;
        louder.pt_dbm += 7.0;
        const double beta = std::pow(10.0, 0.7);
        const auto b = effective_channel(inst.deployment.users, inst.active, inst.deployment, louder);
        for (std::size_t n = 0; n < a.gains.size(); ++n) ASSERT_NEAR(b.gains[n], beta * a.gains[n], 1e-9 * beta * a.gains[n]);
    }
}

TEST(Properties, OrderOfActiveSetIrrelevant) {
    Rng rng(110);
    for (int i = 0; i < kCases; ++i) {
        auto inst = random_instance(rng);
        const auto& d = inst.deployment;
        auto pts = inst.active.points(d.positions);
        const auto a = effective_channel(d.users, ActiveSet::off_grid_only(pts), d, inst.config);
        std::reverse(pts.begin(), pts.end());
        const auto b = effective_channel(d.users, ActiveSet::off_grid_only(pts), d, inst.config);
        for (std::size_t n = 0; n < a.gains.size(); ++n) {
            ASSERT_NEAR(std::abs(b.per_user[n] - a.per_user[n]), 0.0, 1e-9 * std::abs(a.per_user[n]) + 1e-300);
        }
    }
}

TEST(Properties, SingleAntennaGainMonotoneInLossAndDistance) {
    Rng rng(111);
    for (int i = 0; i < kCases; ++i) {
        auto inst = random_instance(rng);
        auto& c = inst.config;
        const auto& d = inst.deployment;
        const ActiveSet single({inst.active.indices().front()});
        const auto a = effective_channel(d.users, single, d, c);
        SystemConfig lossier = c;
        lossier.kappa_db_per_m += 0.05;
        const auto b = effective_channel(d.users, single, d, lossier);
        for (std::size_t n = 0; n < a.gains.size(); ++n) ASSERT_LE(b.gains[n], a.gains[n]);
        // Farther user directly below the same antenna line sees less.
        const auto pos = d.positions[single.indices().front()];
        const std::vector<Point3> pair{{pos.x, 1.0, 0.0}, {pos.x, 2.0, 0.0}};
        const auto ch = effective_channel(pair, single, d, c);
        ASSERT_GE(ch.gains[0], ch.gains[1]);
    }
}

TEST(Properties, SingletonOptimumDominatesUnderLoss) {
    Rng rng(112);
    for (int i = 0; i < 2000; ++i) {
        auto inst = random_instance(rng);
        auto c = inst.config;
        c.kappa_db_per_m = 0.0;
        const auto alloc = PowerAllocation::fixed(c.n_users);
        const auto lossless = exhaustive_search(UtilityEvaluator(inst.deployment, c, alloc), c.l_positions, 1);
        c.kappa_db_per_m = 0.2;
        const auto lossy = exhaustive_search(UtilityEvaluator(inst.deployment, c, alloc), c.l_positions, 1);
        ASSERT_GE(lossless.sum_rate, lossy.sum_rate);
    }
}

}  // namespace
}  // namespace pinch
