#pragma once

#include <string>
#include <utility>
#include <vector>

#include "woc/aggregation.hpp"
#include "woc/rng.hpp"

namespace woc {

// Score of one aggregated estimate against ground truth.
// epsilon = |estimate - truth| / truth, truth > 0.
struct ErrorRecord {
    std::string question_id;
    Strategy strategy = Strategy::WocMedian;
    double epsilon = 0.0;
    double estimate = 0.0;
    double truth = 0.0;
};

double normalized_error(double estimate, double truth); // throws StatsError if truth <= 0

// Reduction in normalized error of the median strategy relative to
// self-consistency on the same responses. Negative when the median did worse.
inline double woc_gain(double eps_sc, double eps_woc) { return eps_sc - eps_woc; }

// Question-averaged error with a bootstrap uncertainty band.
struct SummaryRow {
    std::string model_id;
    Strategy strategy = Strategy::WocMedian;
    double mean_epsilon = 0.0;
    double band_low = 0.0;   // 2.5th percentile of bootstrap means
    double band_high = 0.0;  // 97.5th percentile
    double bootstrap_sd = 0.0;
    int n_questions = 0;
};

// Resamples over questions with replacement, B times. The band is the
// 2.5/97.5 percentile interval of the resampled means; the bootstrap
// standard deviation is reported alongside.
SummaryRow summarize(const std::vector<ErrorRecord>& records, const std::string& model_id,
                     int B, Rng& rng);

// Linear-interpolation quantile of a sorted vector, q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

struct WilcoxonResult {
    double w_plus = 0.0;          // rank sum of pairs with a > b
    double w_minus = 0.0;         // rank sum of pairs with a < b
    int n_effective = 0;          // pairs with a != b
    bool exact = false;           // exact sign enumeration vs normal approximation
    double p_one_sided_less = 0;  // alternative: a < b
    double p_one_sided_greater = 0;
    double p_two_sided = 0;
};

// Paired signed-rank test on (a, b) pairs. Zero differences are dropped,
// tied |differences| get average ranks. Exact enumeration of all 2^n sign
// assignments up to n_effective <= exact_threshold; beyond that a normal
// approximation with tie and continuity corrections.
WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& paired,
                                    int exact_threshold = 12);

// Per-question alternative to the question bootstrap: resamples one
// question's reasoning paths with replacement and re-aggregates, giving a
// band around that question's estimate.
struct BootstrapBand {
    double low = 0.0;
    double high = 0.0;
    double sd = 0.0;
};

BootstrapBand path_bootstrap(const ResponseSet& set, Strategy strategy,
                             MedianConvention convention, int B, Rng& rng);

double pearson_r(const std::vector<double>& xs, const std::vector<double>& ys);

// Adjusted Fisher-Pearson standardized third moment,
// g1 * sqrt(n(n-1)) / (n-2). Requires n >= 3 and nonzero variance.
double sample_skewness(const std::vector<double>& values);

double sample_std_dev(const std::vector<double>& values); // n-1 denominator

double normal_cdf(double z);

} // namespace woc
