#include "woc/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "woc/errors.hpp"

namespace woc {

std::string strategy_name(Strategy s) {
    switch (s) {
    case Strategy::WocMedian: return "woc_median";
    case Strategy::SelfConsistencyMode: return "self_consistency";
    case Strategy::Mean: return "mean";
    case Strategy::Greedy: return "greedy";
    }
    return "unknown";
}

std::string strategy_label(Strategy s) {
    switch (s) {
    case Strategy::WocMedian: return "Wisdom of Crowds (Median)";
    case Strategy::SelfConsistencyMode: return "Self-Consistency (Majority)";
    case Strategy::Mean: return "Mean";
    case Strategy::Greedy: return "Greedy";
    }
    return "unknown";
}

Strategy strategy_from_name(std::string_view name) {
    for (Strategy s : kStrategyOrder) {
        if (strategy_name(s) == name) return s;
    }
    throw ConfigError("unknown strategy: " + std::string(name));
}

std::string median_convention_name(MedianConvention c) {
    return c == MedianConvention::OrderStatistic ? "order_statistic" : "midpoint";
}

MedianConvention median_convention_from_name(std::string_view name) {
    if (name == "order_statistic") return MedianConvention::OrderStatistic;
    if (name == "midpoint") return MedianConvention::Midpoint;
    throw ConfigError("unknown median convention: " + std::string(name));
}

namespace {

void require_nonempty(const ResponseSet& set, const char* op) {
    if (set.values.empty()) {
        throw StatsError(std::string(op) + ": empty response set for question '" +
                         set.question_id + "'");
    }
    for (double v : set.values) {
        if (!std::isfinite(v)) {
            throw StatsError(std::string(op) + ": non-finite value in response set for '" +
                             set.question_id + "'");
        }
    }
}

} // namespace

Estimate woc_median(const ResponseSet& set, MedianConvention convention) {
    require_nonempty(set, "woc_median");
    std::vector<double> sorted = set.values;
    std::sort(sorted.begin(), sorted.end());
    const int n = static_cast<int>(sorted.size());
    Estimate est{Strategy::WocMedian, 0.0, n, false};
    const int k = (n + 1) / 2; // ceil(n/2)-th smallest
    if (convention == MedianConvention::OrderStatistic || n % 2 == 1) {
        est.value = sorted[static_cast<std::size_t>(k - 1)];
    } else {
        est.value = (sorted[static_cast<std::size_t>(n / 2 - 1)] +
                     sorted[static_cast<std::size_t>(n / 2)]) / 2.0;
    }
    return est;
}

Estimate self_consistency_mode(const ResponseSet& set, Rng& rng) {
    require_nonempty(set, "self_consistency_mode");
    std::map<double, int> counts;
    for (double v : set.values) ++counts[v];
    int best = 0;
    for (const auto& [v, c] : counts) best = std::max(best, c);
    std::vector<double> modes;
    for (const auto& [v, c] : counts) {
        if (c == best) modes.push_back(v);
    }
    Estimate est{Strategy::SelfConsistencyMode, modes.front(), set.n(), false};
    if (modes.size() > 1) {
        est.value = modes[uniform_index(rng, modes.size())];
        est.tie_broken = true;
    }
    return est;
}

Estimate mean_aggregate(const ResponseSet& set) {
    require_nonempty(set, "mean_aggregate");
    double sum = 0.0;
    for (double v : set.values) sum += v;
    return Estimate{Strategy::Mean, sum / static_cast<double>(set.values.size()), set.n(), false};
}

Estimate aggregate(const ResponseSet& set, Strategy strategy, MedianConvention convention,
                   Rng& rng) {
    switch (strategy) {
    case Strategy::WocMedian: return woc_median(set, convention);
    case Strategy::SelfConsistencyMode: return self_consistency_mode(set, rng);
    case Strategy::Mean: return mean_aggregate(set);
    case Strategy::Greedy: break;
    }
    throw ConfigError("greedy decoding is a single deterministic call, not an aggregation");
}

std::vector<PrefixPoint> prefix_curve(const ResponseSet& set, Strategy strategy,
                                      const std::vector<int>& ns, MedianConvention convention,
                                      Rng& rng) {
    std::vector<PrefixPoint> out;
    out.reserve(ns.size());
    for (int n : ns) {
        if (n < 1 || n > set.n()) {
            throw StatsError("prefix_curve: n=" + std::to_string(n) + " out of range [1, " +
                             std::to_string(set.n()) + "]");
        }
        ResponseSet prefix{set.question_id,
                           std::vector<double>(set.values.begin(), set.values.begin() + n)};
        out.push_back(PrefixPoint{n, aggregate(prefix, strategy, convention, rng)});
    }
    return out;
}

} // namespace woc
