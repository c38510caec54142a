#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "woc/simulator.hpp"

namespace woc {

// Monte Carlo study: for a grid of response distributions and crowd sizes,
// how do the median, mode, and mean strategies compare? Draws go through
// the full phrasing + extraction path, so the study doubles as an
// end-to-end check of the sampling pipeline.
struct StudyConfig {
    std::vector<SimulatorSpec> specs;
    double truth = 62.0;
    std::vector<int> n_grid;
    int trials = 50;
    std::uint64_t seed = 0;
    int extraction_max_retries = 3;

    void validate() const;
    static StudyConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct StudyRecord {
    std::string spec_id;
    int n = 0;
    int trial = 0;
    double eps_woc = 0.0;
    double eps_sc = 0.0;
    double eps_mean = 0.0;
    double skewness = 0.0; // NaN when undefined (n < 3 or zero variance)
    double std_dev = 0.0;  // NaN when undefined
};

// Deterministic given cfg + cfg.seed. Records come back sorted by
// (spec order, n, trial).
std::vector<StudyRecord> run_study(const StudyConfig& cfg);

struct GainCorrelation {
    double r_skew_gain = 0.0; // Pearson r of per-cell mean skewness vs mean WOC gain
    double r_std_gain = 0.0;  // same for standard deviation
    int n_cells = 0;
};

// Cells are (spec, n) pairs averaged over trials; cells whose skewness is
// undefined in every trial are dropped. Throws StatsError when fewer than
// two usable cells remain or a variance degenerates.
GainCorrelation correlate_gain(const std::vector<StudyRecord>& records);

std::string study_to_csv(const std::vector<StudyRecord>& records);

} // namespace woc
