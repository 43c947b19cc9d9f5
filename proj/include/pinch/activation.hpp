#pragma once

// Antenna activation: the one-sided matching between pinching antennas and
// pre-configured waveguide positions, plus the baseline activation schemes.
//
// Preferences carry externalities: an antenna prefers a new state exactly when
// the system sum rate strictly increases, so every player ranks states by the
// same utility U(Phi) = sum_n R_n(Phi).

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinch/channel.hpp"
#include "pinch/noma.hpp"
#include "pinch/scenario.hpp"

namespace pinch {

/// Antenna -> position-or-unmatched. Each position hosts at most one antenna.
class Matching {
public:
    Matching(std::size_t antennas, std::size_t positions)
        : position_of_(antennas), occupant_(positions) {}

    std::size_t antennas() const { return position_of_.size(); }
    std::size_t positions() const { return occupant_.size(); }

    std::optional<std::size_t> position_of(std::size_t antenna) const { return position_of_.at(antenna); }
    std::optional<std::size_t> occupant(std::size_t position) const { return occupant_.at(position); }
    bool is_free(std::size_t position) const { return !occupant_.at(position).has_value(); }

    /// Activates `antenna` at a free `position`, releasing its previous one.
    void assign(std::size_t antenna, std::size_t position) {
        if (!is_free(position)) throw std::logic_error("Matching: position already occupied");
        release(antenna);
        position_of_[antenna] = position;
        occupant_[position] = antenna;
    }

    void release(std::size_t antenna) {
        if (auto l = position_of_.at(antenna)) {
            occupant_[*l].reset();
            position_of_[antenna].reset();
        }
    }

    /// Occupied position indices in ascending order.
    std::vector<std::size_t> active_indices() const {
        std::vector<std::size_t> out;
        for (std::size_t l = 0; l < occupant_.size(); ++l) {
            if (occupant_[l]) out.push_back(l);
        }
        return out;
    }

    ActiveSet active_set() const { return ActiveSet(active_indices()); }
    std::size_t active_count() const { return active_indices().size(); }

    /// Every image in range, at most one antenna per position, and the two
    /// directions of the map agree.
    bool is_consistent() const {
        std::size_t matched = 0;
        for (std::size_t k = 0; k < position_of_.size(); ++k) {
            if (auto l = position_of_[k]) {
                if (*l >= occupant_.size() || occupant_[*l] != k) return false;
                ++matched;
            }
        }
        std::size_t occupied = 0;
        for (std::size_t l = 0; l < occupant_.size(); ++l) {
            if (auto k = occupant_[l]) {
                if (*k >= position_of_.size() || position_of_[*k] != l) return false;
                ++occupied;
            }
        }
        return matched == occupied && occupied <= position_of_.size();
    }

    friend bool operator==(const Matching&, const Matching&) = default;

private:
    std::vector<std::optional<std::size_t>> position_of_;
    std::vector<std::optional<std::size_t>> occupant_;
};

/// One unilateral deviation: relocate/activate at `to`, or deactivate when
/// `to` is empty.
struct Move {
    std::size_t antenna = 0;
    std::optional<std::size_t> from;
    std::optional<std::size_t> to;
    std::size_t cycle = 0;

    void apply(Matching& m) const {
        if (to) {
            m.assign(antenna, *to);
        } else {
            m.release(antenna);
        }
    }

    friend bool operator==(const Move&, const Move&) = default;
};

struct Trajectory {
    std::vector<double> utilities;  // U(Phi_0) < U(Phi_1) < ...
    std::vector<Move> moves;        // moves[i] takes Phi_i to Phi_{i+1}
    std::size_t cycles = 0;
    std::size_t evaluations = 0;    // utility calls inside cycles
    std::vector<std::size_t> evaluations_per_cycle;
};

/// Anything that scores a sorted set of grid position indices.
template <typename U>
concept SetUtility = requires(const U& u, std::span<const std::size_t> s) {
    { u(s) } -> std::convertible_to<double>;
};

template <SetUtility U>
double evaluate(const U& utility, const Matching& m) {
    const auto idx = m.active_indices();
    return utility(std::span<const std::size_t>(idx));
}

/// Sum-rate utility over grid-position sets for one drop.
class UtilityEvaluator {
public:
    UtilityEvaluator(const Deployment& deployment, const SystemConfig& config, PowerAllocation alloc)
        : table_(deployment, config), alloc_(std::move(alloc)), noise_(dbm_to_watts(config.noise_dbm)) {
        if (alloc_.size() != deployment.users.size()) {
            throw std::invalid_argument("UtilityEvaluator: allocation size does not match user count");
        }
    }

    double operator()(std::span<const std::size_t> sorted_indices) const {
        table_.gains(sorted_indices, scratch_);
        return rates_from_gains(scratch_, alloc_, noise_).sum_rate;
    }

    RateReport report(std::span<const std::size_t> sorted_indices) const {
        table_.gains(sorted_indices, scratch_);
        return rates_from_gains(scratch_, alloc_, noise_);
    }

    std::size_t positions() const { return table_.positions(); }

private:
    ChannelTable table_;
    PowerAllocation alloc_;
    double noise_;
    mutable std::vector<double> scratch_;
};

/// All K antennas placed on K distinct uniformly random positions.
inline Matching random_matching(const SystemConfig& config, const Deployment& deployment, Rng& rng) {
    const std::size_t L = deployment.positions.size();
    const std::size_t K = config.k_antennas;
    if (K > L) throw std::invalid_argument("random_matching: more antennas than positions");
    std::vector<std::size_t> pool(L);
    for (std::size_t l = 0; l < L; ++l) pool[l] = l;
    Matching m(K, L);
    for (std::size_t k = 0; k < K; ++k) {
        const auto j = k + static_cast<std::size_t>(uniform_below(rng, L - k));
        std::swap(pool[k], pool[j]);
        m.assign(k, pool[k]);
    }
    return m;
}

struct ActivationResult {
    Matching matching;
    Trajectory trajectory;
};

/// Sweeps antennas k = 0..K-1 and positions l = 0..L-1 in order. A free
/// position is tried as a relocation target; the antenna's own position is
/// tried as a deactivation. A deviation is kept only on strict utility
/// increase. Stops after the first full cycle without any accepted move.
template <SetUtility U>
ActivationResult matching_activation(const U& utility, Matching initial) {
    if (!initial.is_consistent()) throw std::invalid_argument("matching_activation: inconsistent initial matching");

    ActivationResult result{std::move(initial), {}};
    Matching& phi = result.matching;
    Trajectory& traj = result.trajectory;

    double current = evaluate(utility, phi);
    traj.utilities.push_back(current);

    for (bool changed = true; changed;) {
        changed = false;
        ++traj.cycles;
        std::size_t evals = 0;
        for (std::size_t k = 0; k < phi.antennas(); ++k) {
            for (std::size_t l = 0; l < phi.positions(); ++l) {
                Move move{k, phi.position_of(k), std::nullopt, traj.cycles};
                if (phi.is_free(l)) {
                    move.to = l;
                } else if (phi.position_of(k) != l) {
                    continue;
                }
                Matching candidate = phi;
                move.apply(candidate);
                const double u = evaluate(utility, candidate);
                ++evals;
                if (u > current) {
                    phi = std::move(candidate);
                    current = u;
                    traj.utilities.push_back(u);
                    traj.moves.push_back(move);
                    changed = true;
                }
            }
        }
        traj.evaluations += evals;
        traj.evaluations_per_cycle.push_back(evals);
    }
    return result;
}

inline ActivationResult matching_activation(const SystemConfig& config, const Deployment& deployment,
                                            const PowerAllocation& alloc, Matching initial) {
    if (initial.positions() != deployment.positions.size()) {
        throw std::invalid_argument("matching_activation: matching and deployment disagree on position count");
    }
    return matching_activation(UtilityEvaluator(deployment, config, alloc), std::move(initial));
}

struct StabilityVerdict {
    bool stable = true;
    std::optional<Move> improving;  // certificate when not stable
    double utility = 0.0;
    double improved_utility = 0.0;
};

/// Checks every unilateral relocation/deactivation for a strict improvement.
/// Swaps between antennas are not deviations here.
template <SetUtility U>
StabilityVerdict check_stability(const Matching& matching, const U& utility) {
    StabilityVerdict verdict;
    verdict.utility = evaluate(utility, matching);
    verdict.improved_utility = verdict.utility;
    for (std::size_t k = 0; k < matching.antennas(); ++k) {
        for (std::size_t l = 0; l < matching.positions(); ++l) {
            Move move{k, matching.position_of(k), std::nullopt, 0};
            if (matching.is_free(l)) {
                move.to = l;
            } else if (matching.position_of(k) != l) {
                continue;
            }
            Matching candidate = matching;
            move.apply(candidate);
            const double u = evaluate(utility, candidate);
            if (u > verdict.utility) {
                verdict.stable = false;
                verdict.improving = move;
                verdict.improved_utility = u;
                return verdict;
            }
        }
    }
    return verdict;
}

inline StabilityVerdict check_stability(const Matching& matching, const SystemConfig& config,
                                        const Deployment& deployment, const PowerAllocation& alloc) {
    return check_stability(matching, UtilityEvaluator(deployment, config, alloc));
}

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultExhaustiveBudget = 1'000'000;

/// sum_{k=1..K} C(L, k), saturating at uint64 max.
inline std::uint64_t candidate_count(std::size_t L, std::size_t K) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t total = 0;
    std::uint64_t c = 1;  // C(L, 0)
    for (std::size_t k = 1; k <= std::min(K, L); ++k) {
        // C(L, k) = C(L, k-1) * (L - k + 1) / k, exact at every step.
        const std::uint64_t num = L - k + 1;
        if (c > kMax / num) return kMax;
        c = c * num / k;
        if (total > kMax - c) return kMax;
        total += c;
    }
    return total;
}

struct ExhaustiveResult {
    ActiveSet best;
    double sum_rate = 0.0;
    std::uint64_t candidates = 0;
};

/// Evaluates every nonempty set of at most K grid positions. Ties go to the
/// lexicographically smallest index sequence.
template <SetUtility U>
ExhaustiveResult exhaustive_search(const U& utility, std::size_t L, std::size_t k_antennas,
                                   std::uint64_t budget = kDefaultExhaustiveBudget) {
    const auto count = candidate_count(L, k_antennas);
    if (count > budget) {
        throw BudgetExceeded("exhaustive_search: " + std::to_string(count) + " candidate sets exceed budget of " +
                             std::to_string(budget));
    }

    ExhaustiveResult result;
    std::vector<std::size_t> best;
    double best_u = -std::numeric_limits<double>::infinity();
    for (std::size_t size = 1; size <= std::min(k_antennas, L); ++size) {
        std::vector<std::size_t> set(size);
        for (std::size_t i = 0; i < size; ++i) set[i] = i;
        while (true) {
            const double u = utility(std::span<const std::size_t>(set));
            ++result.candidates;
            if (u > best_u || (u == best_u && std::lexicographical_compare(set.begin(), set.end(), best.begin(), best.end()))) {
                best_u = u;
                best = set;
            }
            // Next combination in lexicographic order.
            std::size_t i = size;
            while (i > 0 && set[i - 1] == L - size + (i - 1)) --i;
            if (i == 0) break;
            ++set[i - 1];
            for (std::size_t j = i; j < size; ++j) set[j] = set[j - 1] + 1;
        }
    }
    result.best = ActiveSet(best);
    result.sum_rate = best_u;
    return result;
}

inline ExhaustiveResult exhaustive_search(const SystemConfig& config, const Deployment& deployment,
                                          const PowerAllocation& alloc,
                                          std::uint64_t budget = kDefaultExhaustiveBudget) {
    return exhaustive_search(UtilityEvaluator(deployment, config, alloc), deployment.positions.size(),
                             config.k_antennas, budget);
}

/// Antenna k sits on the waveguide right above user k, for k < min(K, N).
/// Coincident placements collapse into a single antenna.
inline ActiveSet distance_based_activation(const SystemConfig& config, const Deployment& deployment) {
    const std::size_t pairs = std::min(config.k_antennas, deployment.users.size());
    std::vector<Point3> points;
    for (std::size_t k = 0; k < pairs; ++k) {
        const Point3 p{deployment.users[k].x, 0.0, config.height};
        if (std::find(points.begin(), points.end(), p) == points.end()) points.push_back(p);
    }
    return ActiveSet::off_grid_only(std::move(points));
}

/// K-element half-wavelength array centred at x = d1/2.
inline std::vector<Point3> conventional_positions(const SystemConfig& config) {
    const double half_lambda = derived_rf(config).lambda / 2.0;
    const double centre = static_cast<double>(config.k_antennas - 1) / 2.0;
    std::vector<Point3> out;
    out.reserve(config.k_antennas);
    for (std::size_t k = 0; k < config.k_antennas; ++k) {
        out.push_back({config.d1 / 2.0 + (static_cast<double>(k) - centre) * half_lambda, 0.0, config.height});
    }
    return out;
}

/// Fixed array without a dielectric waveguide: no guided phase, no loss,
/// P_t split evenly over K antennas.
inline RateReport conventional_baseline(const SystemConfig& config, const Deployment& deployment,
                                        const PowerAllocation& alloc) {
    return sum_rate(ActiveSet::off_grid_only(conventional_positions(config)), deployment, config, alloc,
                    WaveguideModel{.phase = false, .loss = false});
}

}  // namespace pinch
