#include "woc/stats.hpp"

#include <algorithm>
#include <cmath>

#include "woc/errors.hpp"

namespace woc {

double normalized_error(double estimate, double truth) {
    if (!(truth > 0.0)) {
        throw StatsError("normalized_error: ground truth must be > 0, got " +
                         std::to_string(truth));
    }
    if (!std::isfinite(estimate)) throw StatsError("normalized_error: non-finite estimate");
    return std::abs(estimate - truth) / truth;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw StatsError("quantile of empty vector");
    if (sorted.size() == 1) return sorted.front();
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SummaryRow summarize(const std::vector<ErrorRecord>& records, const std::string& model_id,
                     int B, Rng& rng) {
    if (records.empty()) throw StatsError("summarize: no error records");
    if (B < 1) throw StatsError("summarize: bootstrap sample count must be >= 1");

    SummaryRow row;
    row.model_id = model_id;
    row.strategy = records.front().strategy;
    row.n_questions = static_cast<int>(records.size());

    double sum = 0.0;
    for (const auto& r : records) sum += r.epsilon;
    row.mean_epsilon = sum / static_cast<double>(records.size());

    const std::size_t n = records.size();
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += records[uniform_index(rng, n)].epsilon;
        }
        means.push_back(s / static_cast<double>(n));
    }
    std::sort(means.begin(), means.end());
    // The band always brackets the observed mean, even when every resample
    // lands on one side of it.
    row.band_low = std::min(quantile_sorted(means, 0.025), row.mean_epsilon);
    row.band_high = std::max(quantile_sorted(means, 0.975), row.mean_epsilon);

    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(means.size());
    double ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    row.bootstrap_sd = means.size() > 1
                           ? std::sqrt(ss / static_cast<double>(means.size() - 1))
                           : 0.0;
    return row;
}

BootstrapBand path_bootstrap(const ResponseSet& set, Strategy strategy,
                             MedianConvention convention, int B, Rng& rng) {
    if (set.values.empty()) throw StatsError("path_bootstrap: empty response set");
    if (B < 1) throw StatsError("path_bootstrap: bootstrap sample count must be >= 1");
    const std::size_t n = set.values.size();
    std::vector<double> aggregates;
    aggregates.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        ResponseSet resampled{set.question_id, {}};
        resampled.values.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            resampled.values.push_back(set.values[uniform_index(rng, n)]);
        }
        aggregates.push_back(aggregate(resampled, strategy, convention, rng).value);
    }
    std::sort(aggregates.begin(), aggregates.end());
    BootstrapBand band;
    band.low = quantile_sorted(aggregates, 0.025);
    band.high = quantile_sorted(aggregates, 0.975);
    double m = 0.0;
    for (double v : aggregates) m += v;
    m /= static_cast<double>(aggregates.size());
    double ss = 0.0;
    for (double v : aggregates) ss += (v - m) * (v - m);
    band.sd = aggregates.size() > 1 ? std::sqrt(ss / static_cast<double>(aggregates.size() - 1))
                                    : 0.0;
    return band;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Average ranks of |d|, ascending. Returns (ranks aligned with ds, tie group sizes).
std::pair<std::vector<double>, std::vector<int>> rank_abs(const std::vector<double>& ds) {
    const std::size_t n = ds.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(ds[a]) < std::abs(ds[b]);
    });
    std::vector<double> ranks(n, 0.0);
    std::vector<int> tie_sizes;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(ds[order[j + 1]]) == std::abs(ds[order[i]])) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        tie_sizes.push_back(static_cast<int>(j - i + 1));
        i = j + 1;
    }
    return {ranks, tie_sizes};
}

} // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& paired,
                                    int exact_threshold) {
    std::vector<double> ds;
    ds.reserve(paired.size());
    for (const auto& [a, b] : paired) {
        const double d = a - b;
        if (d != 0.0) ds.push_back(d);
    }
    if (ds.empty()) throw StatsError("degenerate: no nonzero differences");

    const auto [ranks, tie_sizes] = rank_abs(ds);
    WilcoxonResult res;
    res.n_effective = static_cast<int>(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds[i] > 0) res.w_plus += ranks[i];
        else res.w_minus += ranks[i];
    }

    const int n = res.n_effective;
    if (n <= exact_threshold) {
        // Enumerate every sign assignment; W+ is the rank sum of the
        // positive subset. Ranks are multiples of 0.5, so a small epsilon
        // makes the <=/>= comparisons safe.
        res.exact = true;
        const std::uint64_t total = 1ull << n;
        const double tol = 1e-9;
        std::uint64_t count_le = 0, count_ge = 0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            double w = 0.0;
            for (int i = 0; i < n; ++i) {
                if (mask & (1ull << i)) w += ranks[static_cast<std::size_t>(i)];
            }
            if (w <= res.w_plus + tol) ++count_le;
            if (w >= res.w_plus - tol) ++count_ge;
        }
        res.p_one_sided_less = static_cast<double>(count_le) / static_cast<double>(total);
        res.p_one_sided_greater = static_cast<double>(count_ge) / static_cast<double>(total);
    } else {
        const double mean = static_cast<double>(n) * (n + 1) / 4.0;
        double var = static_cast<double>(n) * (n + 1) * (2.0 * n + 1) / 24.0;
        for (int t : tie_sizes) {
            var -= (static_cast<double>(t) * t * t - t) / 48.0;
        }
        if (var <= 0.0) throw StatsError("degenerate: zero variance in signed-rank statistic");
        const double sd = std::sqrt(var);
        res.p_one_sided_less = normal_cdf((res.w_plus - mean + 0.5) / sd);
        res.p_one_sided_greater = 1.0 - normal_cdf((res.w_plus - mean - 0.5) / sd);
    }
    res.p_two_sided = std::min(1.0, 2.0 * std::min(res.p_one_sided_less, res.p_one_sided_greater));
    return res;
}

double pearson_r(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw StatsError("pearson_r: length mismatch");
    if (xs.size() < 2) throw StatsError("pearson_r: need at least 2 points");
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw StatsError("pearson_r: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double sample_skewness(const std::vector<double>& values) {
    const auto n = static_cast<double>(values.size());
    if (values.size() < 3) throw StatsError("sample_skewness: need at least 3 values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if (m2 == 0.0) throw StatsError("sample_skewness: zero variance");
    const double g1 = m3 / std::pow(m2, 1.5);
    return g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
}

double sample_std_dev(const std::vector<double>& values) {
    if (values.size() < 2) throw StatsError("sample_std_dev: need at least 2 values");
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0));
}

} // namespace woc
