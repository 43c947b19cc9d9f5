#pragma once

// Monte-Carlo experiment runner: paired user drops shared by every scheme,
// optional one-parameter sweeps, convergence traces against the exhaustive
// optimum, key = value config ingestion and CSV result files.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pinch/activation.hpp"
#include "pinch/noma.hpp"
#include "pinch/scenario.hpp"

namespace pinch {

enum class Scheme { matching, random, distance, exhaustive, conventional };

inline constexpr Scheme kAllSchemes[] = {Scheme::matching, Scheme::random, Scheme::distance, Scheme::exhaustive,
                                         Scheme::conventional};

inline std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::matching: return "matching";
        case Scheme::random: return "random";
        case Scheme::distance: return "distance";
        case Scheme::exhaustive: return "exhaustive";
        case Scheme::conventional: return "conventional";
    }
    return "?";
}

inline Scheme parse_scheme(std::string_view name) {
    for (auto s : kAllSchemes) {
        if (to_string(s) == name) return s;
    }
    throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

inline constexpr std::string_view kSweepParameters[] = {"pt_dbm",     "d1",         "d2",         "kappa_db_per_m",
                                                        "n_users",    "k_antennas", "l_positions"};

struct Sweep {
    std::string parameter;
    double from = 0.0;
    double to = 0.0;
    double step = 1.0;

    /// from, from+step, ... up to `to` inclusive (with a small slack for
    /// accumulated rounding).
    std::vector<double> values() const {
        if (!(step > 0.0)) throw ConfigError("sweep step must be positive");
        if (to < from) throw ConfigError("sweep 'to' is below 'from'");
        std::vector<double> out;
        const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) out.push_back(from + static_cast<double>(i) * step);
        return out;
    }
};

struct ExperimentSpec {
    SystemConfig base;
    std::vector<Scheme> schemes{Scheme::matching, Scheme::random};
    std::optional<Sweep> sweep;
    std::size_t trials = 1;
    std::string output_path;
    std::uint64_t exhaustive_budget = kDefaultExhaustiveBudget;
    std::size_t threads = 0;  // 0 = hardware concurrency

    bool has(Scheme s) const { return std::find(schemes.begin(), schemes.end(), s) != schemes.end(); }

    void validate() const {
        if (trials < 1) throw ConfigError("trials must be >= 1");
        if (schemes.empty()) throw ConfigError("no schemes selected");
        if (sweep) {
            const auto& p = sweep->parameter;
            if (std::find(std::begin(kSweepParameters), std::end(kSweepParameters), p) == std::end(kSweepParameters)) {
                throw ConfigError("parameter '" + p + "' cannot be swept");
            }
            (void)sweep->values();
        }
        base.validate();
    }
};

// ---------------------------------------------------------------------------
// key = value configuration

namespace detail {

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

inline std::uint64_t to_count(const std::string& key, const std::string& value) {
    const double v = to_double(key, value);
    if (v < 0.0 || v != std::floor(v) || v > 9.007199254740992e15) {
        throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + value + "'");
    }
    return static_cast<std::uint64_t>(v);
}

inline std::uint64_t to_seed(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(value, &used, 0);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + value + "'");
    }
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace detail

/// Sets one numeric scenario parameter by name; counts must be integral.
inline void set_parameter(SystemConfig& c, const std::string& name, double v) {
    const auto count = [&](double x) {
        if (x < 0.0 || x != std::floor(x)) throw ConfigError("parameter '" + name + "' must be a non-negative integer");
        return static_cast<std::size_t>(x);
    };
    if (name == "d1") c.d1 = v;
    else if (name == "d2") c.d2 = v;
    else if (name == "height") c.height = v;
    else if (name == "carrier_hz") c.carrier_hz = v;
    else if (name == "n_eff") c.n_eff = v;
    else if (name == "kappa_db_per_m") c.kappa_db_per_m = v;
    else if (name == "pt_dbm") c.pt_dbm = v;
    else if (name == "noise_dbm") c.noise_dbm = v;
    else if (name == "n_users") c.n_users = count(v);
    else if (name == "k_antennas") c.k_antennas = count(v);
    else if (name == "l_positions") c.l_positions = count(v);
    else throw ConfigError("unknown parameter '" + name + "'");
}

/// Applies a single `key = value` setting. Keys are the SystemConfig field
/// names plus schemes, trials, output, exhaustive_budget, threads and
/// sweep_param / sweep_from / sweep_to / sweep_step.
inline void apply_key(ExperimentSpec& spec, const std::string& key, const std::string& raw) {
    const std::string value = detail::trim(raw);
    if (key == "seed") {
        spec.base.seed = detail::to_seed(key, value);
    } else if (key == "schemes") {
        spec.schemes.clear();
        std::stringstream ss(value);
        for (std::string item; std::getline(ss, item, ',');) {
            item = detail::trim(item);
            if (item.empty()) continue;
            const auto s = parse_scheme(item);
            if (!spec.has(s)) spec.schemes.push_back(s);
        }
    } else if (key == "trials") {
        spec.trials = detail::to_count(key, value);
    } else if (key == "output" || key == "output_path") {
        spec.output_path = value;
    } else if (key == "exhaustive_budget") {
        spec.exhaustive_budget = detail::to_count(key, value);
    } else if (key == "threads") {
        spec.threads = detail::to_count(key, value);
    } else if (key == "sweep_param") {
        if (!spec.sweep) spec.sweep.emplace();
        spec.sweep->parameter = value;
    } else if (key == "sweep_from" || key == "sweep_to" || key == "sweep_step") {
        if (!spec.sweep) spec.sweep.emplace();
        const double v = detail::to_double(key, value);
        if (key == "sweep_from") spec.sweep->from = v;
        else if (key == "sweep_to") spec.sweep->to = v;
        else spec.sweep->step = v;
    } else {
        set_parameter(spec.base, key, detail::to_double(key, value));
    }
}

/// Parses flat `key = value` text; `#` starts a comment.
inline void apply_config_text(ExperimentSpec& spec, std::istream& in) {
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const auto key = detail::trim(std::string_view(line).substr(0, eq));
        try {
            apply_key(spec, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline void apply_config_file(ExperimentSpec& spec, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    apply_config_text(spec, in);
}

/// Canonical key = value rendering of a spec; parses back to the same spec.
inline std::map<std::string, std::string> spec_entries(const ExperimentSpec& spec) {
    using detail::format_double;
    const auto& c = spec.base;
    std::map<std::string, std::string> kv{
        {"d1", format_double(c.d1)},
        {"d2", format_double(c.d2)},
        {"height", format_double(c.height)},
        {"carrier_hz", format_double(c.carrier_hz)},
        {"n_eff", format_double(c.n_eff)},
        {"kappa_db_per_m", format_double(c.kappa_db_per_m)},
        {"pt_dbm", format_double(c.pt_dbm)},
        {"noise_dbm", format_double(c.noise_dbm)},
        {"n_users", std::to_string(c.n_users)},
        {"k_antennas", std::to_string(c.k_antennas)},
        {"l_positions", std::to_string(c.l_positions)},
        {"seed", std::to_string(c.seed)},
        {"trials", std::to_string(spec.trials)},
        {"exhaustive_budget", std::to_string(spec.exhaustive_budget)},
        {"output", spec.output_path},
    };
    std::string schemes;
    for (auto s : spec.schemes) {
        if (!schemes.empty()) schemes += ',';
        schemes += to_string(s);
    }
    kv["schemes"] = schemes;
    if (spec.sweep) {
        kv["sweep_param"] = spec.sweep->parameter;
        kv["sweep_from"] = format_double(spec.sweep->from);
        kv["sweep_to"] = format_double(spec.sweep->to);
        kv["sweep_step"] = format_double(spec.sweep->step);
    }
    return kv;
}

// ---------------------------------------------------------------------------
// Presets mirroring the published figure set-ups at desk-scale trial counts.

inline std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3", "fig5"}; }

inline ExperimentSpec preset(const std::string& name) {
    ExperimentSpec spec;
    auto& c = spec.base;
    c.height = 3.0;
    c.carrier_hz = 28e9;
    c.n_eff = 1.4;
    c.noise_dbm = -90.0;
    spec.trials = 500;
    if (name == "fig1") {
        // Pinching vs conventional array as the area grows.
        c.d2 = 4.0;
        c.n_users = c.k_antennas = 4;
        c.l_positions = 20;
        c.kappa_db_per_m = 0.1;
        c.pt_dbm = 30.0;
        spec.schemes = {Scheme::matching, Scheme::distance, Scheme::conventional};
        spec.sweep = Sweep{"d1", 10.0, 30.0, 5.0};
    } else if (name == "fig2") {
        c.d1 = 10.0;
        c.d2 = 6.0;
        c.n_users = c.k_antennas = 2;
        c.l_positions = 20;
        c.kappa_db_per_m = 0.1;
        spec.schemes = {Scheme::matching, Scheme::distance, Scheme::random, Scheme::exhaustive};
        spec.sweep = Sweep{"pt_dbm", 20.0, 40.0, 5.0};
    } else if (name == "fig3") {
        // Activated antenna count as K grows; exhaustive is out of reach here.
        c.d1 = 10.0;
        c.d2 = 6.0;
        c.n_users = 20;
        c.l_positions = 20;
        c.kappa_db_per_m = 0.1;
        c.pt_dbm = 30.0;
        spec.trials = 50;
        spec.schemes = {Scheme::matching};
        spec.sweep = Sweep{"k_antennas", 1.0, 20.0, 1.0};
    } else if (name == "fig5") {
        c.d1 = 10.0;
        c.d2 = 6.0;
        c.n_users = c.k_antennas = 2;
        c.l_positions = 12;
        c.kappa_db_per_m = 0.1;
        c.pt_dbm = 30.0;
        spec.trials = 200;
        spec.schemes = {Scheme::matching, Scheme::random, Scheme::exhaustive};
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Execution

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first failing
/// index (lowest i) decides which exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    std::vector<std::exception_ptr> errors(n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace detail

struct TrialRecord {
    std::optional<double> sweep_value;
    std::size_t trial = 0;
    Scheme scheme = Scheme::matching;
    std::uint64_t drop = 0;  // drop_digest of the user drop the scheme ran on
    double sum_rate = 0.0;
    double fairness = 0.0;
    std::size_t active_count = 0;
    std::size_t cycles = 0;
    std::optional<double> ratio_to_exhaustive;
};

struct ResultRow {
    std::optional<double> sweep_value;
    std::string scheme;
    double mean_sum_rate = 0.0;
    double mean_fairness = 0.0;
    double mean_active_count = 0.0;
    double mean_cycles = 0.0;
    std::optional<double> mean_ratio_to_exhaustive;
    double ci95_sum_rate = 0.0;  // half-width of the normal 95% interval
    std::size_t trials = 0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<TrialRecord> records;  // ordered by (sweep value, trial, scheme)
};

inline std::vector<std::optional<double>> sweep_points(const ExperimentSpec& spec) {
    if (!spec.sweep) return {std::nullopt};
    std::vector<std::optional<double>> out;
    for (double v : spec.sweep->values()) out.emplace_back(v);
    return out;
}

inline SystemConfig config_at(const ExperimentSpec& spec, std::optional<double> sweep_value) {
    SystemConfig c = spec.base;
    if (sweep_value) set_parameter(c, spec.sweep->parameter, *sweep_value);
    return c;
}

inline std::string describe_point(const ExperimentSpec& spec, std::optional<double> v) {
    if (!v) return "base configuration";
    return spec.sweep->parameter + " = " + detail::format_double(*v);
}

/// Draws the user drop and the initial random matching for one trial. Both
/// depend only on (seed, trial), never on the sweep value or the scheme.
inline Deployment trial_drop(const SystemConfig& config, std::size_t trial) {
    Rng rng(derive_seed(config.seed, Stream::users, trial));
    return Deployment::sample(config, rng);
}

inline Matching trial_initial_matching(const SystemConfig& config, const Deployment& deployment, std::size_t trial) {
    Rng rng(derive_seed(config.seed, Stream::matching, trial));
    return random_matching(config, deployment, rng);
}

inline std::vector<TrialRecord> run_trial(const ExperimentSpec& spec, const SystemConfig& config,
                                          std::optional<double> sweep_value, std::size_t trial) {
    const Deployment drop = trial_drop(config, trial);
    const auto alloc = PowerAllocation::fixed(config.n_users);
    const UtilityEvaluator utility(drop, config, alloc);
    const auto initial = trial_initial_matching(config, drop, trial);

    std::vector<TrialRecord> out;
    std::optional<double> optimum;
    if (spec.has(Scheme::exhaustive)) {
        optimum = exhaustive_search(utility, config.l_positions, config.k_antennas, spec.exhaustive_budget).sum_rate;
    }
    for (auto scheme : spec.schemes) {
        TrialRecord rec;
        rec.sweep_value = sweep_value;
        rec.trial = trial;
        rec.scheme = scheme;
        rec.drop = drop_digest(drop);
        RateReport report;
        switch (scheme) {
            case Scheme::matching: {
                const auto result = matching_activation(utility, initial);
                const auto idx = result.matching.active_indices();
                report = utility.report(idx);
                rec.active_count = idx.size();
                rec.cycles = result.trajectory.cycles;
                break;
            }
            case Scheme::random: {
                const auto idx = initial.active_indices();
                report = utility.report(idx);
                rec.active_count = idx.size();
                break;
            }
            case Scheme::exhaustive: {
                const auto best = exhaustive_search(utility, config.l_positions, config.k_antennas, spec.exhaustive_budget);
                report = utility.report(best.best.indices());
                rec.active_count = best.best.size();
                break;
            }
            case Scheme::distance: {
                const auto active = distance_based_activation(config, drop);
                report = sum_rate(active, drop, config, alloc);
                rec.active_count = active.size();
                break;
            }
            case Scheme::conventional:
                report = conventional_baseline(config, drop, alloc);
                rec.active_count = config.k_antennas;
                break;
        }
        rec.sum_rate = report.sum_rate;
        rec.fairness = report.fairness;
        if (optimum && *optimum > 0.0) rec.ratio_to_exhaustive = report.sum_rate / *optimum;
        out.push_back(rec);
    }
    return out;
}

inline ExperimentResult run_experiment_detailed(const ExperimentSpec& spec) {
    spec.validate();
    const auto points = sweep_points(spec);
    std::vector<SystemConfig> configs;
    for (const auto& v : points) {
        auto c = config_at(spec, v);
        try {
            c.validate();
            if (spec.has(Scheme::exhaustive) &&
                candidate_count(c.l_positions, c.k_antennas) > spec.exhaustive_budget) {
                throw BudgetExceeded("exhaustive search needs " +
                                     std::to_string(candidate_count(c.l_positions, c.k_antennas)) +
                                     " candidates, budget is " + std::to_string(spec.exhaustive_budget));
            }
        } catch (const BudgetExceeded& e) {
            throw BudgetExceeded(describe_point(spec, v) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError(describe_point(spec, v) + ": " + e.what());
        }
        configs.push_back(c);
    }

    const std::size_t jobs = points.size() * spec.trials;
    std::vector<std::vector<TrialRecord>> per_job(jobs);
    detail::parallel_for(jobs, spec.threads, [&](std::size_t j) {
        const std::size_t p = j / spec.trials;
        per_job[j] = run_trial(spec, configs[p], points[p], j % spec.trials);
    });

    ExperimentResult result;
    for (auto& recs : per_job) {
        result.records.insert(result.records.end(), recs.begin(), recs.end());
    }

    const std::size_t S = spec.schemes.size();
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (std::size_t s = 0; s < S; ++s) {
            ResultRow row;
            row.sweep_value = points[p];
            row.scheme = std::string(to_string(spec.schemes[s]));
            row.trials = spec.trials;
            double sum = 0.0, sum2 = 0.0, fair = 0.0, active = 0.0, cycles = 0.0, ratio = 0.0;
            bool have_ratio = true;
            for (std::size_t t = 0; t < spec.trials; ++t) {
                const auto& r = per_job[p * spec.trials + t][s];
                sum += r.sum_rate;
                sum2 += r.sum_rate * r.sum_rate;
                fair += r.fairness;
                active += static_cast<double>(r.active_count);
                cycles += static_cast<double>(r.cycles);
                if (r.ratio_to_exhaustive) ratio += *r.ratio_to_exhaustive;
                else have_ratio = false;
            }
            const double n = static_cast<double>(spec.trials);
            row.mean_sum_rate = sum / n;
            row.mean_fairness = fair / n;
            row.mean_active_count = active / n;
            row.mean_cycles = cycles / n;
            if (have_ratio) row.mean_ratio_to_exhaustive = ratio / n;
            if (spec.trials > 1) {
                const double var = std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0));
                row.ci95_sum_rate = 1.96 * std::sqrt(var / n);
            }
            result.rows.push_back(row);
        }
    }
    return result;
}

inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) { return run_experiment_detailed(spec).rows; }

// ---------------------------------------------------------------------------
// Convergence traces

struct ConvergenceTrace {
    std::size_t trial = 0;
    double optimum = 0.0;
    std::vector<double> utilities;         // U(Phi_0), U(Phi_1), ...
    std::vector<std::size_t> move_cycles;  // cycle of each utility entry (0 for Phi_0)
    std::size_t cycles = 0;
    std::vector<std::size_t> evaluations_per_cycle;
    bool stable = false;

    std::size_t accepted_moves() const { return utilities.size() - 1; }
    double ratio(std::size_t i) const { return utilities[i] / optimum; }
    double final_ratio() const { return ratio(utilities.size() - 1); }

    /// Utility held at the end of each cycle, cycle 0 being the initial state.
    std::vector<double> utility_by_cycle() const {
        std::vector<double> out(cycles + 1, utilities.front());
        std::size_t i = 0;
        for (std::size_t c = 1; c <= cycles; ++c) {
            while (i + 1 < utilities.size() && move_cycles[i + 1] <= c) ++i;
            out[c] = utilities[i];
        }
        return out;
    }
};

struct ConvergenceSummary {
    std::size_t runs = 0;
    double mean_final_ratio = 0.0;
    double fraction_within_20_moves = 0.0;
    double mean_cycles = 0.0;
    std::size_t monotonicity_violations = 0;
    std::size_t unstable_finals = 0;
    std::size_t evaluation_budget_violations = 0;  // cycles with more than K*L utility calls
};

inline std::vector<ConvergenceTrace> convergence_trace(const ExperimentSpec& spec) {
    spec.validate();
    const auto& config = spec.base;
    const auto count = candidate_count(config.l_positions, config.k_antennas);
    if (count > spec.exhaustive_budget) {
        throw BudgetExceeded("convergence trace needs the exhaustive optimum: " + std::to_string(count) +
                             " candidates exceed budget of " + std::to_string(spec.exhaustive_budget));
    }
    std::vector<ConvergenceTrace> traces(spec.trials);
    detail::parallel_for(spec.trials, spec.threads, [&](std::size_t t) {
        const Deployment drop = trial_drop(config, t);
        const UtilityEvaluator utility(drop, config, PowerAllocation::fixed(config.n_users));
        auto result = matching_activation(utility, trial_initial_matching(config, drop, t));
        auto& tr = traces[t];
        tr.trial = t;
        tr.optimum = exhaustive_search(utility, config.l_positions, config.k_antennas, spec.exhaustive_budget).sum_rate;
        tr.utilities = result.trajectory.utilities;
        tr.move_cycles.push_back(0);
        for (const auto& m : result.trajectory.moves) tr.move_cycles.push_back(m.cycle);
        tr.cycles = result.trajectory.cycles;
        tr.evaluations_per_cycle = result.trajectory.evaluations_per_cycle;
        tr.stable = check_stability(result.matching, utility).stable;
    });
    return traces;
}

inline ConvergenceSummary summarize(const std::vector<ConvergenceTrace>& traces, std::size_t k_antennas,
                                    std::size_t l_positions) {
    ConvergenceSummary s;
    s.runs = traces.size();
    if (traces.empty()) return s;
    std::size_t within = 0;
    for (const auto& tr : traces) {
        s.mean_final_ratio += tr.final_ratio();
        s.mean_cycles += static_cast<double>(tr.cycles);
        if (tr.accepted_moves() <= 20) ++within;
        for (std::size_t i = 1; i < tr.utilities.size(); ++i) {
            if (!(tr.utilities[i] > tr.utilities[i - 1])) ++s.monotonicity_violations;
        }
        if (!tr.stable) ++s.unstable_finals;
        for (auto e : tr.evaluations_per_cycle) {
            if (e > k_antennas * l_positions) ++s.evaluation_budget_violations;
        }
    }
    const double n = static_cast<double>(traces.size());
    s.mean_final_ratio /= n;
    s.mean_cycles /= n;
    s.fraction_within_20_moves = static_cast<double>(within) / n;
    return s;
}

/// Long format: one line per trajectory entry (kind = move) and per cycle
/// boundary (kind = cycle).
inline void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceTrace>& traces) {
    using detail::format_double;
    out << "trial,kind,index,cycle,utility,ratio\n";
    for (const auto& tr : traces) {
        for (std::size_t i = 0; i < tr.utilities.size(); ++i) {
            out << tr.trial << ",move," << i << ',' << tr.move_cycles[i] << ',' << format_double(tr.utilities[i])
                << ',' << format_double(tr.ratio(i)) << '\n';
        }
        const auto by_cycle = tr.utility_by_cycle();
        for (std::size_t c = 0; c < by_cycle.size(); ++c) {
            out << tr.trial << ",cycle," << c << ',' << c << ',' << format_double(by_cycle[c]) << ','
                << format_double(by_cycle[c] / tr.optimum) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kCsvHeader =
    "sweep_value,scheme,mean_sum_rate,mean_fairness,mean_active_count,mean_cycles,mean_ratio_to_exhaustive,"
    "ci95_sum_rate,trials";

inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    using detail::format_double;
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        if (r.sweep_value) out << format_double(*r.sweep_value);
        out << ',' << r.scheme << ',' << format_double(r.mean_sum_rate) << ',' << format_double(r.mean_fairness)
            << ',' << format_double(r.mean_active_count) << ',' << format_double(r.mean_cycles) << ',';
        if (r.mean_ratio_to_exhaustive) out << format_double(*r.mean_ratio_to_exhaustive);
        out << ',' << format_double(r.ci95_sum_rate) << ',' << r.trials << '\n';
    }
}

inline std::vector<ResultRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kCsvHeader) {
        throw std::runtime_error("read_csv: missing or unexpected header");
    }
    std::vector<ResultRow> rows;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(detail::trim(cell));
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 9) throw std::runtime_error("read_csv: line " + std::to_string(lineno) + " has wrong field count");
        const auto num = [&](const std::string& s) { return detail::to_double("csv line " + std::to_string(lineno), s); };
        ResultRow r;
        if (!f[0].empty()) r.sweep_value = num(f[0]);
        r.scheme = f[1];
        r.mean_sum_rate = num(f[2]);
        r.mean_fairness = num(f[3]);
        r.mean_active_count = num(f[4]);
        r.mean_cycles = num(f[5]);
        if (!f[6].empty()) r.mean_ratio_to_exhaustive = num(f[6]);
        r.ci95_sum_rate = num(f[7]);
        r.trials = detail::to_count("trials", f[8]);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace pinch
