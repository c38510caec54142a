#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "woc/errors.hpp"
#include "woc/stats.hpp"

using namespace woc;

namespace {

std::vector<ErrorRecord> records_from(const std::vector<double>& eps) {
    std::vector<ErrorRecord> out;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        out.push_back(ErrorRecord{"q" + std::to_string(i), Strategy::WocMedian, eps[i],
                                  0.0, 1.0});
    }
    return out;
}

// Independent exact reference: enumerate sign assignments with its own
// ranking (insertion-based) and count tail probabilities directly.
struct OracleWilcoxon {
    double p_less, p_greater;
};

OracleWilcoxon oracle_exact(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<double> ds;
    for (auto [a, b] : pairs) {
        if (a != b) ds.push_back(a - b);
    }
    const int n = static_cast<int>(ds.size());
    std::vector<double> abs_sorted;
    for (double d : ds) abs_sorted.push_back(std::abs(d));
    std::sort(abs_sorted.begin(), abs_sorted.end());
    auto rank_of = [&](double ad) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < abs_sorted.size(); ++i) {
            if (abs_sorted[i] == ad) {
                sum += static_cast<double>(i + 1);
                ++count;
            }
        }
        return sum / count;
    };
    double w_plus = 0.0;
    std::vector<double> ranks;
    for (double d : ds) {
        const double r = rank_of(std::abs(d));
        ranks.push_back(r);
        if (d > 0) w_plus += r;
    }
    const std::uint64_t total = 1ull << n;
    std::uint64_t le = 0, ge = 0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        double w = 0.0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1ull << i)) w += ranks[static_cast<std::size_t>(i)];
        }
        if (w <= w_plus + 1e-9) ++le;
        if (w >= w_plus - 1e-9) ++ge;
    }
    return {static_cast<double>(le) / total, static_cast<double>(ge) / total};
}

} // namespace

TEST_CASE("normalized error formula") {
    CHECK(normalized_error(62, 62) == 0.0);
    CHECK(normalized_error(81, 62) == doctest::Approx(0.30645161290322581).epsilon(1e-9));
    CHECK(normalized_error(25.681, 21.301) ==
          doctest::Approx(0.20562414910098131).epsilon(1e-9));
    CHECK_THROWS_AS(normalized_error(1.0, 0.0), StatsError);
    CHECK_THROWS_AS(normalized_error(1.0, -2.0), StatsError);
}

TEST_CASE("normalized error is invariant under joint rescaling") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const double est = uniform01(rng) * 100.0;
        const double truth = 0.1 + uniform01(rng) * 100.0;
        const double c = 0.01 + uniform01(rng) * 50.0;
        CHECK(normalized_error(est, truth) ==
              doctest::Approx(normalized_error(est * c, truth * c)).epsilon(1e-12));
    }
}

TEST_CASE("woc gain sign convention") {
    CHECK(woc_gain(0.61, 0.57) == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(woc_gain(0.5, 0.5) == 0.0);
    CHECK(woc_gain(0.1, 0.3) == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("summarize: constant errors give a zero-width band") {
    Rng rng(1);
    const auto row = summarize(records_from({0.25, 0.25, 0.25, 0.25}), "m", 30, rng);
    CHECK(row.mean_epsilon == 0.25);
    CHECK(row.band_low == 0.25);
    CHECK(row.band_high == 0.25);
    CHECK(row.bootstrap_sd == 0.0);
    CHECK(row.n_questions == 4);
}

TEST_CASE("summarize: single record collapses to the point") {
    Rng rng(2);
    const auto row = summarize(records_from({0.7}), "m", 30, rng);
    CHECK(row.mean_epsilon == 0.7);
    CHECK(row.band_low == 0.7);
    CHECK(row.band_high == 0.7);
}

TEST_CASE("summarize: band brackets the mean and is reproducible") {
    const auto recs = records_from({0.1, 0.5, 2.0, 0.05, 0.9, 4.0});
    Rng rng1(77), rng2(77);
    const auto a = summarize(recs, "m", 30, rng1);
    const auto b = summarize(recs, "m", 30, rng2);
    CHECK(a.band_low == b.band_low);
    CHECK(a.band_high == b.band_high);
    CHECK(a.band_low <= a.mean_epsilon);
    CHECK(a.band_high >= a.mean_epsilon);
    CHECK(a.bootstrap_sd > 0.0);
}

TEST_CASE("summarize: wider spread widens the band") {
    Rng rng1(9), rng2(9);
    const auto narrow = summarize(records_from({0.5, 0.52, 0.48, 0.51, 0.49}), "m", 200, rng1);
    const auto wide = summarize(records_from({0.1, 2.0, 0.02, 1.4, 0.6}), "m", 200, rng2);
    CHECK((wide.band_high - wide.band_low) > (narrow.band_high - narrow.band_low));
}

TEST_CASE("summarize rejects empty input") {
    Rng rng(1);
    CHECK_THROWS_AS(summarize({}, "m", 30, rng), StatsError);
}

TEST_CASE("path bootstrap of a constant set has zero width") {
    Rng rng(4);
    const ResponseSet set{"q", {3.0, 3.0, 3.0}};
    const auto band =
        path_bootstrap(set, Strategy::WocMedian, MedianConvention::OrderStatistic, 50, rng);
    CHECK(band.low == 3.0);
    CHECK(band.high == 3.0);
    CHECK(band.sd == 0.0);
}

TEST_CASE("wilcoxon: strictly dominated pairs at n=10 give the minimal p") {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 1; i <= 10; ++i) {
        pairs.emplace_back(static_cast<double>(i), static_cast<double>(i) + 1.0);
    }
    const auto res = wilcoxon_signed_rank(pairs);
    CHECK(res.exact);
    CHECK(res.n_effective == 10);
    CHECK(res.w_plus == 0.0);
    CHECK(res.p_one_sided_less == doctest::Approx(1.0 / 1024.0).epsilon(1e-12));
}

TEST_CASE("wilcoxon matches the exact enumeration oracle on random pairs") {
    Rng rng(123);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + static_cast<int>(uniform_index(rng, 11)); // 2..12
        std::vector<std::pair<double, double>> pairs;
        for (int i = 0; i < n; ++i) {
            double a = uniform01(rng) * 4.0;
            double b = uniform01(rng) * 4.0;
            // Quantize some pairs so |d| ties actually occur.
            if (uniform01(rng) < 0.5) {
                a = std::round(a);
                b = std::round(b);
            }
            pairs.emplace_back(a, b);
        }
        bool any_nonzero = false;
        for (auto [a, b] : pairs) any_nonzero = any_nonzero || a != b;
        if (!any_nonzero) continue;
        const auto res = wilcoxon_signed_rank(pairs);
        const auto oracle = oracle_exact(pairs);
        CHECK(res.exact);
        CHECK(res.p_one_sided_less == doctest::Approx(oracle.p_less).epsilon(1e-12));
        CHECK(res.p_one_sided_greater == doctest::Approx(oracle.p_greater).epsilon(1e-12));
    }
}

TEST_CASE("wilcoxon symmetry: swapping the pair roles swaps the one-sided tails") {
    Rng rng(321);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<double, double>> pairs, swapped;
        const int n = 3 + static_cast<int>(uniform_index(rng, 9));
        for (int i = 0; i < n; ++i) {
            const double a = std::round(uniform01(rng) * 6.0);
            const double b = std::round(uniform01(rng) * 6.0);
            pairs.emplace_back(a, b);
            swapped.emplace_back(b, a);
        }
        bool any_nonzero = false;
        for (auto [a, b] : pairs) any_nonzero = any_nonzero || a != b;
        if (!any_nonzero) continue;
        const auto res = wilcoxon_signed_rank(pairs);
        const auto mirrored = wilcoxon_signed_rank(swapped);
        CHECK(res.p_one_sided_less == doctest::Approx(mirrored.p_one_sided_greater).epsilon(1e-12));
        CHECK(res.p_two_sided == doctest::Approx(mirrored.p_two_sided).epsilon(1e-12));
    }
}

TEST_CASE("wilcoxon drops zero differences and rejects all-zero input") {
    CHECK_THROWS_AS(wilcoxon_signed_rank({{1.0, 1.0}, {2.0, 2.0}}), StatsError);
    const auto res = wilcoxon_signed_rank({{1.0, 1.0}, {1.0, 2.0}, {3.0, 2.0}});
    CHECK(res.n_effective == 2);
}

TEST_CASE("wilcoxon normal approximation is sane for large n") {
    std::vector<std::pair<double, double>> pairs;
    Rng rng(55);
    for (int i = 0; i < 60; ++i) {
        const double a = uniform01(rng);
        pairs.emplace_back(a, a + 0.2 + uniform01(rng));
    }
    const auto res = wilcoxon_signed_rank(pairs);
    CHECK_FALSE(res.exact);
    CHECK(res.p_one_sided_less < 1e-6);
    CHECK(res.p_one_sided_less > 0.0);
    CHECK(res.p_two_sided <= 1.0);
}

TEST_CASE("pearson correlation endpoints and oracle") {
    const std::vector<double> xs = {1, 2, 3, 4, 5};
    std::vector<double> neg;
    for (double x : xs) neg.push_back(-x);
    CHECK(pearson_r(xs, xs) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson_r(xs, neg) == doctest::Approx(-1.0).epsilon(1e-12));

    const std::vector<double> ys = {2.0, 1.5, 4.0, 3.5, 5.5};
    // Covariance / (sx * sy) computed directly.
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double cov = 0, vx = 0, vy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        cov += (xs[i] - mx) * (ys[i] - my);
        vx += (xs[i] - mx) * (xs[i] - mx);
        vy += (ys[i] - my) * (ys[i] - my);
    }
    CHECK(pearson_r(xs, ys) == doctest::Approx(cov / std::sqrt(vx * vy)).epsilon(1e-12));
}

TEST_CASE("pearson rejects degenerate input") {
    CHECK_THROWS_AS(pearson_r({1, 1, 1}, {1, 2, 3}), StatsError);
    CHECK_THROWS_AS(pearson_r({1, 2}, {1, 2, 3}), StatsError);
    CHECK_THROWS_AS(pearson_r({1}, {1}), StatsError);
}

TEST_CASE("pearson is translation and positive-scale invariant") {
    Rng rng(777);
    std::vector<double> xs, ys;
    for (int i = 0; i < 20; ++i) {
        xs.push_back(uniform01(rng));
        ys.push_back(uniform01(rng) + 0.3 * xs.back());
    }
    const double base = pearson_r(xs, ys);
    std::vector<double> xs2, ys2;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs2.push_back(4.0 * xs[i] + 11.0);
        ys2.push_back(0.5 * ys[i] - 3.0);
    }
    CHECK(pearson_r(xs2, ys2) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("sample skewness: symmetry, tail sign, oracle") {
    CHECK(sample_skewness({1, 2, 3}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sample_skewness({1, 1, 1, 10}) > 0.0);
    CHECK(sample_skewness({-10, -1, -1, -1}) < 0.0);

    Rng rng(1001);
    std::vector<double> v;
    for (int i = 0; i < 100; ++i) v.push_back(std::exp(normal01(rng)));
    const double n = static_cast<double>(v.size());
    double mean = 0;
    for (double x : v) mean += x;
    mean /= n;
    double m2 = 0, m3 = 0;
    for (double x : v) {
        m2 += (x - mean) * (x - mean);
        m3 += (x - mean) * (x - mean) * (x - mean);
    }
    m2 /= n;
    m3 /= n;
    const double oracle = (m3 / std::pow(m2, 1.5)) * std::sqrt(n * (n - 1.0)) / (n - 2.0);
    CHECK(sample_skewness(v) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("sample skewness is translation invariant") {
    std::vector<double> v = {0.5, 2.5, 2.5, 9.0, 1.25};
    std::vector<double> shifted;
    for (double x : v) shifted.push_back(x + 123.0);
    CHECK(sample_skewness(shifted) == doctest::Approx(sample_skewness(v)).epsilon(1e-9));
}

TEST_CASE("sample skewness rejects degenerate input") {
    CHECK_THROWS_AS(sample_skewness({1, 2}), StatsError);
    CHECK_THROWS_AS(sample_skewness({3, 3, 3, 3}), StatsError);
}
