#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "woc/rng.hpp"

namespace woc {

enum class Strategy {
    WocMedian,
    SelfConsistencyMode,
    Mean,
    Greedy,
};

// Column order used by reports: WOC, self-consistency, mean, greedy.
inline constexpr Strategy kStrategyOrder[] = {
    Strategy::WocMedian, Strategy::SelfConsistencyMode, Strategy::Mean, Strategy::Greedy};

std::string strategy_name(Strategy s);   // machine name, e.g. "woc_median"
std::string strategy_label(Strategy s);  // display label, e.g. "Wisdom of Crowds (Median)"
Strategy strategy_from_name(std::string_view name); // throws ConfigError

// How the median of an even-sized set is taken. OrderStatistic picks the
// ceil(n/2)-th smallest value; Midpoint averages the two middle values.
// Odd sizes agree under both.
enum class MedianConvention { OrderStatistic, Midpoint };

std::string median_convention_name(MedianConvention c);
MedianConvention median_convention_from_name(std::string_view name);

// Extracted estimates for one question, in sampling order.
struct ResponseSet {
    std::string question_id;
    std::vector<double> values;

    int n() const { return static_cast<int>(values.size()); }
};

struct Estimate {
    Strategy strategy = Strategy::WocMedian;
    double value = 0.0;
    int n_used = 0;
    bool tie_broken = false; // mode only
};

Estimate woc_median(const ResponseSet& set,
                    MedianConvention convention = MedianConvention::OrderStatistic);

// Most frequent value; ties are broken uniformly at random with `rng`
// and reported via Estimate::tie_broken.
Estimate self_consistency_mode(const ResponseSet& set, Rng& rng);

Estimate mean_aggregate(const ResponseSet& set);

// Dispatch over the three sampling-based strategies (Greedy has no
// aggregation over a response set and is rejected).
Estimate aggregate(const ResponseSet& set, Strategy strategy, MedianConvention convention,
                   Rng& rng);

struct PrefixPoint {
    int n = 0;
    Estimate estimate;
};

// Aggregates the first n values for each n in `ns` (prefixes in sampling
// order simulate smaller crowds).
std::vector<PrefixPoint> prefix_curve(const ResponseSet& set, Strategy strategy,
                                      const std::vector<int>& ns, MedianConvention convention,
                                      Rng& rng);

} // namespace woc
