#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "woc/errors.hpp"
#include "woc/runner.hpp"
#include "woc/util.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitDegenerate = 4;

int guarded(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const woc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const woc::LoadError& e) {
        std::cerr << "load error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const woc::BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const woc::StatsError& e) {
        std::cerr << "degenerate statistics: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sample, aggregate, and score numeric guesstimates from language-model "
                 "backends (median / mode / mean / greedy decoding)"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run an experiment from a JSON config file");
    std::string run_config_path;
    std::string run_output_dir;
    int run_n = -1;
    double run_temperature = -1.0;
    std::int64_t run_seed = -1;
    run->add_option("config", run_config_path, "Run config JSON")->required();
    run->add_option("--output-dir", run_output_dir, "Override output directory");
    run->add_option("--n-samples", run_n, "Override sampled reasoning paths per question");
    run->add_option("--temperature", run_temperature, "Override sampling temperature");
    run->add_option("--seed", run_seed, "Override master seed");

    // report
    auto* report = app.add_subcommand("report", "Write summary tables and the prefix curve");
    std::string report_archive;
    bool report_path_bands = false;
    report->add_option("archive", report_archive, "Archive directory")->required();
    report->add_flag("--path-bands", report_path_bands,
                     "Also write per-question path-bootstrap bands");

    // stats
    auto* stats = app.add_subcommand("stats", "Wilcoxon signed-rank test between two strategies");
    std::string stats_archive;
    std::string stats_a = "woc_median";
    std::string stats_b = "greedy";
    stats->add_option("archive", stats_archive, "Archive directory")->required();
    stats->add_option("--a", stats_a, "First strategy (alternative: a better)");
    stats->add_option("--b", stats_b, "Second strategy");

    // map
    auto* map_cmd = app.add_subcommand("map", "Electoral-vote tally and SVG map");
    std::string map_archive;
    std::string map_dataset;
    std::string map_geometry = "assets/us_states_geometry.json";
    std::string map_out = "maps";
    bool map_actual = false;
    map_cmd->add_option("archive", map_archive, "Archive directory (omit with --actual)");
    map_cmd->add_flag("--actual", map_actual, "Map the dataset's actual shares directly");
    map_cmd->add_option("--dataset", map_dataset, "Election dataset JSON (with --actual)");
    map_cmd->add_option("--geometry", map_geometry, "State geometry JSON");
    map_cmd->add_option("--out", map_out, "Output directory");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo strategy comparison study");
    std::string sim_config;
    std::string sim_out = "study";
    simulate->add_option("config", sim_config, "Study config JSON")->required();
    simulate->add_option("--out", sim_out, "Output directory");

    // replay
    auto* replay_cmd =
        app.add_subcommand("replay", "Recompute derived values and verify the archive");
    std::string replay_dir;
    replay_cmd->add_option("archive", replay_dir, "Archive directory")->required();

    // validate
    auto* validate = app.add_subcommand("validate", "Check a dataset file against its invariants");
    std::string validate_path;
    validate->add_option("dataset", validate_path, "Dataset JSON")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        return guarded([&]() {
            woc::RunnerConfig cfg = woc::RunnerConfig::from_json_file(run_config_path);
            if (!run_output_dir.empty()) cfg.output_dir = run_output_dir;
            if (run_n > 0) cfg.sampling.n_samples = run_n;
            if (run_temperature >= 0.0) cfg.sampling.temperature = run_temperature;
            if (run_seed >= 0) cfg.seed = static_cast<std::uint64_t>(run_seed);
            const std::string dir = woc::run_experiment(cfg);
            std::cout << "archive written to " << dir << "\n";
            return kExitOk;
        });
    }
    if (report->parsed()) {
        return guarded([&]() {
            woc::write_report(report_archive, report_path_bands);
            std::cout << "report written to " << report_archive << "\n";
            return kExitOk;
        });
    }
    if (stats->parsed()) {
        return guarded([&]() {
            const auto a = woc::strategy_from_name(stats_a);
            const auto b = woc::strategy_from_name(stats_b);
            const auto report_data = woc::stats_test(stats_archive, a, b);
            const std::string json = woc::stats_report_to_json(report_data);
            std::cout << json;
            woc::write_text_file(stats_archive + "/stats_" + stats_a + "_vs_" + stats_b + ".json",
                                 json);
            return kExitOk;
        });
    }
    if (map_cmd->parsed()) {
        return guarded([&]() {
            if (map_actual) {
                if (map_dataset.empty()) {
                    throw woc::ConfigError("map --actual requires --dataset");
                }
                woc::write_actual_map(map_dataset, map_geometry, map_out);
            } else {
                if (map_archive.empty()) {
                    throw woc::ConfigError("map requires an archive directory (or --actual)");
                }
                woc::write_archive_maps(map_archive, map_geometry, map_out);
            }
            std::cout << "maps written to " << map_out << "\n";
            return kExitOk;
        });
    }
    if (simulate->parsed()) {
        return guarded([&]() {
            woc::run_simulation_study(sim_config, sim_out);
            std::cout << "study written to " << sim_out << "\n";
            return kExitOk;
        });
    }
    if (replay_cmd->parsed()) {
        return guarded([&]() {
            const auto check = woc::replay_archive(replay_dir);
            if (check.recovered_truncated_lines > 0) {
                std::cout << "recovered archive with " << check.recovered_truncated_lines
                          << " truncated trailing line(s)\n";
            }
            if (check.all_match()) {
                std::cout << "replay OK: derived values match the stored archive\n";
                return kExitOk;
            }
            std::cout << "replay MISMATCH\n";
            for (const auto& m : check.derived.mismatches) std::cout << "  " << m << "\n";
            if (!check.summary_match) std::cout << "  summary.csv differs\n";
            if (!check.prefix_match) std::cout << "  prefix_curve.csv differs\n";
            return kExitRuntime;
        });
    }
    if (validate->parsed()) {
        return guarded([&]() {
            const auto report_data = woc::validate_file(validate_path);
            if (report_data.ok()) {
                std::cout << validate_path << ": OK (0 findings)\n";
                return kExitOk;
            }
            std::cout << validate_path << ": " << report_data.findings.size() << " finding(s)\n";
            for (const auto& f : report_data.findings) {
                std::cout << "  [" << (f.question_id.empty() ? "-" : f.question_id) << "] "
                          << f.field << ": " << f.message << "\n";
            }
            return kExitRuntime;
        });
    }
    return kExitConfig;
}
