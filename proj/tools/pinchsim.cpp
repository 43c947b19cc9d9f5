// pinchsim: command-line front end for the pinching-antenna experiments.
//
//   pinchsim run         [--preset NAME] [--config FILE] [--KEY VALUE ...]
//   pinchsim sweep       ... (same, a sweep block is required)
//   pinchsim convergence ... (per-move utilities normalised by the optimum)
//   pinchsim compare     A.csv [B.csv ...] [--baseline SCHEME]
//
// Precedence: built-in defaults < preset < config file < command-line flags.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pinch/pinch.hpp"

namespace fs = std::filesystem;
using namespace pinch;

namespace {

constexpr const char* kOutputDirEnv = "PINCHSIM_OUTPUT_DIR";

const std::vector<std::string> kKeys = {
    "d1",      "d2",         "height",      "carrier_hz", "n_eff",  "kappa_db_per_m",    "pt_dbm",
    "noise_dbm", "n_users",  "k_antennas",  "l_positions", "seed",  "schemes",           "trials",
    "output",  "exhaustive_budget", "threads", "sweep_param", "sweep_from", "sweep_to", "sweep_step",
};

struct SpecOptions {
    std::string preset;
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> flags;
};

void add_spec_options(CLI::App* cmd, SpecOptions& opts) {
    cmd->add_option("--preset", opts.preset, "Start from a figure preset (fig1, fig2, fig3, fig5)");
    cmd->add_option("--config", opts.config, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& key : kKeys) {
        opts.flags[key] = cmd->add_option("--" + key, opts.values[key], "Override config key '" + key + "'");
    }
}

ExperimentSpec build_spec(const SpecOptions& opts, const std::string& command) {
    ExperimentSpec spec = opts.preset.empty() ? ExperimentSpec{} : preset(opts.preset);
    if (!opts.config.empty()) apply_config_file(spec, opts.config);
    for (const auto& key : kKeys) {
        if (opts.flags.at(key)->count() > 0) apply_key(spec, key, opts.values.at(key));
    }
    if (spec.output_path.empty()) {
        const char* dir = std::getenv(kOutputDirEnv);
        spec.output_path = (fs::path(dir ? dir : ".") / ("pinchsim_" + command + ".csv")).string();
    }
    spec.validate();
    return spec;
}

nlohmann::json spec_json(const ExperimentSpec& spec, const std::string& command) {
    const auto& c = spec.base;
    nlohmann::json j;
    j["command"] = command;
    j["config"] = {{"d1", c.d1},
                   {"d2", c.d2},
                   {"height", c.height},
                   {"carrier_hz", c.carrier_hz},
                   {"n_eff", c.n_eff},
                   {"kappa_db_per_m", c.kappa_db_per_m},
                   {"pt_dbm", c.pt_dbm},
                   {"noise_dbm", c.noise_dbm},
                   {"n_users", c.n_users},
                   {"k_antennas", c.k_antennas},
                   {"l_positions", c.l_positions},
                   {"seed", c.seed}};
    std::vector<std::string> schemes;
    for (auto s : spec.schemes) schemes.emplace_back(to_string(s));
    j["schemes"] = schemes;
    j["trials"] = spec.trials;
    j["exhaustive_budget"] = spec.exhaustive_budget;
    j["threads"] = spec.threads;
    j["output"] = spec.output_path;
    if (spec.sweep) {
        j["sweep"] = {{"parameter", spec.sweep->parameter},
                      {"from", spec.sweep->from},
                      {"to", spec.sweep->to},
                      {"step", spec.sweep->step},
                      {"values", spec.sweep->values()}};
    } else {
        j["sweep"] = nullptr;
    }
    return j;
}

void write_outputs(const ExperimentSpec& spec, const std::string& command, const std::string& body) {
    const fs::path out(spec.output_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + out.string() + "'");
        f << body;
    }
    std::ofstream sidecar(out.string() + ".json", std::ios::binary);
    if (!sidecar) throw std::runtime_error("cannot write '" + out.string() + ".json'");
    sidecar << spec_json(spec, command).dump(2) << '\n';
}

void print_rows(const std::vector<ResultRow>& rows) {
    std::printf("%-12s %-13s %12s %9s %8s %8s %9s\n", "sweep", "scheme", "sum_rate", "+/-95%", "fair", "active",
                "ratio*");
    for (const auto& r : rows) {
        const std::string sweep = r.sweep_value ? detail::format_double(*r.sweep_value) : "-";
        const std::string ratio = r.mean_ratio_to_exhaustive ? detail::format_double(*r.mean_ratio_to_exhaustive) : "-";
        std::printf("%-12s %-13s %12.5f %9.5f %8.4f %8.3f %9s\n", sweep.c_str(), r.scheme.c_str(), r.mean_sum_rate,
                    r.ci95_sum_rate, r.mean_fairness, r.mean_active_count, ratio.substr(0, 9).c_str());
    }
}

int cmd_run(const SpecOptions& opts, const std::string& command) {
    const auto spec = build_spec(opts, command);
    if (command == "sweep" && !spec.sweep) {
        throw ConfigError("sweep needs sweep_param/sweep_from/sweep_to/sweep_step");
    }
    const auto rows = run_experiment(spec);
    std::ostringstream csv;
    write_csv(csv, rows);
    write_outputs(spec, command, csv.str());
    print_rows(rows);
    std::printf("wrote %s\n", spec.output_path.c_str());
    return 0;
}

int cmd_convergence(const SpecOptions& opts) {
    const auto spec = build_spec(opts, "convergence");
    const auto traces = convergence_trace(spec);
    const auto s = summarize(traces, spec.base.k_antennas, spec.base.l_positions);
    std::ostringstream csv;
    write_convergence_csv(csv, traces);
    write_outputs(spec, "convergence", csv.str());
    std::printf("runs                      %zu\n", s.runs);
    std::printf("mean final / optimum      %.6f\n", s.mean_final_ratio);
    std::printf("within 20 accepted moves  %.1f%%\n", 100.0 * s.fraction_within_20_moves);
    std::printf("mean cycles               %.3f\n", s.mean_cycles);
    std::printf("non-increasing steps      %zu\n", s.monotonicity_violations);
    std::printf("unstable final matchings  %zu\n", s.unstable_finals);
    std::printf("cycles over K*L budget    %zu\n", s.evaluation_budget_violations);
    std::printf("wrote %s\n", spec.output_path.c_str());
    return 0;
}

int cmd_compare(const std::vector<std::string>& files, std::string baseline) {
    // Column label -> sweep value -> mean sum rate.
    std::vector<std::string> labels;
    std::map<std::string, std::map<double, double>> table;
    std::vector<double> sweeps;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw std::runtime_error("cannot open '" + file + "'");
        for (const auto& r : read_csv(in)) {
            const std::string label = files.size() > 1 ? fs::path(file).stem().string() + ":" + r.scheme : r.scheme;
            if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
            const double key = r.sweep_value.value_or(std::nan(""));
            table[label][key] = r.mean_sum_rate;
            if (std::find_if(sweeps.begin(), sweeps.end(), [&](double v) {
                    return v == key || (std::isnan(v) && std::isnan(key));
                }) == sweeps.end()) {
                sweeps.push_back(key);
            }
        }
    }
    if (labels.empty()) throw std::runtime_error("no rows in input");
    if (baseline.empty()) baseline = labels.front();
    if (!table.count(baseline)) throw std::runtime_error("baseline '" + baseline + "' not found");

    std::printf("%-12s", "sweep");
    for (const auto& l : labels) std::printf(" %18s", l.c_str());
    std::printf("\n");
    for (double v : sweeps) {
        std::printf("%-12s", std::isnan(v) ? "-" : detail::format_double(v).c_str());
        for (const auto& l : labels) {
            auto it = table[l].find(v);
            if (std::isnan(v)) {
                it = std::find_if(table[l].begin(), table[l].end(), [](auto& kv) { return std::isnan(kv.first); });
            }
            const auto base_it = std::isnan(v) ? std::find_if(table[baseline].begin(), table[baseline].end(),
                                                              [](auto& kv) { return std::isnan(kv.first); })
                                               : table[baseline].find(v);
            if (it == table[l].end()) {
                std::printf(" %18s", "-");
            } else if (base_it == table[baseline].end() || base_it->second == 0.0) {
                std::printf(" %18.5f", it->second);
            } else {
                char cell[64];
                std::snprintf(cell, sizeof cell, "%.4f (x%.3f)", it->second, it->second / base_it->second);
                std::printf(" %18s", cell);
            }
        }
        std::printf("\n");
    }
    std::printf("ratios relative to '%s'\n", baseline.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pinching-antenna NOMA activation simulator"};
    app.require_subcommand(1);

    SpecOptions run_opts, sweep_opts, conv_opts;
    auto* run = app.add_subcommand("run", "Monte-Carlo comparison of activation schemes");
    add_spec_options(run, run_opts);
    auto* sweep = app.add_subcommand("sweep", "Same as run, over a one-parameter sweep");
    add_spec_options(sweep, sweep_opts);
    auto* conv = app.add_subcommand("convergence", "Matching trajectories normalised by the exhaustive optimum");
    add_spec_options(conv, conv_opts);

    std::vector<std::string> compare_files;
    std::string baseline;
    auto* compare = app.add_subcommand("compare", "Tabulate mean sum rate across schemes from result CSVs");
    compare->add_option("files", compare_files, "Result CSV files")->required()->check(CLI::ExistingFile);
    compare->add_option("--baseline", baseline, "Column used as the ratio reference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return cmd_run(run_opts, "run");
        if (*sweep) return cmd_run(sweep_opts, "sweep");
        if (*conv) return cmd_convergence(conv_opts);
        if (*compare) return cmd_compare(compare_files, baseline);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pinchsim: error: %s\n", e.what());
        return 2;
    }
    return 1;
}
