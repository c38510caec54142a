#pragma once

#include <optional>
#include <string>
#include <vector>

#include "woc/archive.hpp"
#include "woc/simulation.hpp"
#include "woc/simulator.hpp"
#include "woc/stats.hpp"

namespace woc {

// End-to-end experiment configuration, normally loaded from a JSON config
// file; CLI flags override scalars. Defaults: n=30 samples at T=1, three
// extraction retries, 30 bootstrap resamples, order-statistic median.
struct RunnerConfig {
    std::string dataset_path;
    Dataset dataset = Dataset::Marbles;
    std::string backend_kind = "simulated"; // "simulated" | "remote"
    SimulatorSpec simulator;
    RemoteConfig remote;
    SamplingConfig sampling;
    std::uint64_t seed = 0;
    int extraction_max_retries = 3;
    MedianConvention median_convention = MedianConvention::OrderStatistic;
    int bootstrap_samples = 30;
    std::string output_dir = "runs/out";

    static RunnerConfig from_json_file(const std::string& path);
};

// Samples, extracts, aggregates, and scores every question of the
// configured dataset and leaves a replayable archive in cfg.output_dir.
// Per-question backend failures end up in failures.json; a run where every
// question failed throws BackendError.
std::string run_experiment(const RunnerConfig& cfg);

std::vector<SummaryRow> compute_summary(const ArchiveData& data);
std::string summary_to_csv(const std::vector<SummaryRow>& rows, MedianConvention convention);
std::string summary_to_markdown(const std::vector<SummaryRow>& rows);

// Mean error per (strategy, crowd size) over question prefixes; greedy is
// the constant reference line.
std::string build_prefix_csv(const ArchiveData& data);

// Writes summary.csv, summary.md and prefix_curve.csv next to the archive.
// With path_bands, also question_bands.csv from the per-question path
// bootstrap.
void write_report(const std::string& archive_dir, bool path_bands = false);

struct StatsTestReport {
    Strategy strategy_a = Strategy::WocMedian;
    Strategy strategy_b = Strategy::Greedy;
    std::string pairing = "question";
    int n_pairs = 0;
    WilcoxonResult wilcoxon;
};

// Pairs per-question errors of the two strategies from one archive and runs
// the signed-rank test (one-sided alternative: a better, i.e. smaller).
StatsTestReport stats_test(const std::string& archive_dir, Strategy a, Strategy b);
std::string stats_report_to_json(const StatsTestReport& report);

// Election map rendering. The archive variant writes one SVG + tally JSON
// per strategy; the actual-shares variant maps the dataset's ground truth
// directly (no archive needed).
void write_archive_maps(const std::string& archive_dir, const std::string& geometry_path,
                        const std::string& out_dir);
void write_actual_map(const std::string& dataset_path, const std::string& geometry_path,
                      const std::string& out_dir);

// Runs a simulation study config and writes study.csv plus
// study_summary.json (gain correlations) into out_dir.
void run_simulation_study(const std::string& config_path, const std::string& out_dir);

struct ReplayCheck {
    ReplayResult derived;
    bool summary_match = true;      // true when absent
    bool prefix_match = true;
    int recovered_truncated_lines = 0;
    bool all_match() const;
};

ReplayCheck replay_archive(const std::string& archive_dir);

ValidationReport validate_file(const std::string& path);

} // namespace woc
