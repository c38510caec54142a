#include <doctest.h>

#include <cmath>
#include <set>

#include "woc/errors.hpp"
#include "woc/extraction.hpp"
#include "woc/simulator.hpp"
#include "woc/stats.hpp"

using namespace woc;

namespace {

CompletionRequest request_for(const std::string& qid, int index, double temperature = 1.0) {
    CompletionRequest req;
    req.system_message = "You must provide a final answer.";
    req.user_message = "How many? Think step-by-step.";
    req.question_id = qid;
    req.sample_index = index;
    req.temperature = temperature;
    return req;
}

} // namespace

TEST_CASE("simulated responses are a pure function of (spec, seed, question, index)") {
    SimulatorSpec spec;
    spec.id = "det";
    spec.family = SimFamily::Lognormal;
    spec.sigma = 0.5;
    auto a = make_simulator(spec, 62.0, 7);
    auto b = make_simulator(spec, 62.0, 7);
    for (int i = 0; i < 30; ++i) {
        const auto ra = a->complete(request_for("q1", i));
        const auto rb = b->complete(request_for("q1", i));
        CHECK(ra.text == rb.text);
        CHECK(a->complete(request_for("q1", i)).text == ra.text);
    }
    // Different seed, question, or index moves the stream.
    auto c = make_simulator(spec, 62.0, 8);
    CHECK(c->complete(request_for("q1", 0)).text != a->complete(request_for("q1", 0)).text);
    CHECK(a->complete(request_for("q2", 0)).text != a->complete(request_for("q1", 0)).text);
}

TEST_CASE("distinct indices draw from distinct substreams") {
    SimulatorSpec spec;
    spec.family = SimFamily::Lognormal;
    spec.sigma = 1.0;
    spec.sig_digits = 0;
    auto sim = make_simulator(spec, 62.0, 7);
    std::set<double> distinct;
    for (int i = 0; i < 30; ++i) distinct.insert(sim->draw_value("q", i, 0));
    CHECK(distinct.size() > 25);
}

TEST_CASE("zero-variance normal at the truth reproduces the truth") {
    SimulatorSpec spec;
    spec.family = SimFamily::Normal;
    spec.sigma = 0.0;
    auto sim = make_simulator(spec, 62.0, 99);
    for (int i = 0; i < 10; ++i) {
        const auto response = sim->complete(request_for("q", i));
        const auto parsed = parse_final_answer(response.text);
        REQUIRE(parsed.ok());
        CHECK(*parsed.value == 62.0);
    }
}

TEST_CASE("full refusal rate pins every response to a zero final answer") {
    SimulatorSpec spec;
    spec.refusal_rate = 1.0;
    auto sim = make_simulator(spec, 62.0, 3);
    for (int i = 0; i < 20; ++i) {
        const auto response = sim->complete(request_for("q", i));
        const std::string tail = "Final answer: 0";
        REQUIRE(response.text.size() >= tail.size());
        CHECK(response.text.substr(response.text.size() - tail.size()) == tail);
    }
}

TEST_CASE("greedy completions are deterministic and repeatable") {
    SimulatorSpec spec;
    spec.family = SimFamily::Lognormal;
    spec.sigma = 0.4;
    auto sim = make_simulator(spec, 62.0, 5);
    const auto first = sim->complete(request_for("q", 0, 0.0));
    const auto second = sim->complete(request_for("q", 0, 0.0));
    CHECK(first.text == second.text);
    // Mode of the lognormal component, quantized to two significant digits.
    const double expected = quantize_significant(62.0 * std::exp(-0.4 * 0.4), 2);
    CHECK(sim->greedy_value() == expected);
}

TEST_CASE("lognormal draws are right-skewed") {
    SimulatorSpec spec;
    spec.family = SimFamily::Lognormal;
    spec.sigma = 1.0;
    spec.sig_digits = 0;
    auto sim = make_simulator(spec, 62.0, 11);
    std::vector<double> draws;
    for (int i = 0; i < 10000; ++i) draws.push_back(sim->draw_value("q", i, 0));
    CHECK(sample_skewness(draws) > 0.0);
}

TEST_CASE("contaminated lognormal has heavier tails than its base") {
    SimulatorSpec base;
    base.family = SimFamily::Lognormal;
    base.sigma = 0.5;
    base.sig_digits = 0;
    SimulatorSpec contaminated = base;
    contaminated.contam_prob = 0.1;
    contaminated.contam_scale = 5.0;
    auto sim_base = make_simulator(base, 62.0, 21);
    auto sim_contam = make_simulator(contaminated, 62.0, 21);
    double max_base = 0.0, max_contam = 0.0;
    for (int i = 0; i < 5000; ++i) {
        max_base = std::max(max_base, sim_base->draw_value("q", i, 0));
        max_contam = std::max(max_contam, sim_contam->draw_value("q", i, 0));
    }
    CHECK(max_contam > max_base);
}

TEST_CASE("discrete empirical family follows its weights") {
    SimulatorSpec spec;
    spec.family = SimFamily::DiscreteEmpirical;
    spec.values = {10.0, 20.0, 30.0};
    spec.weights = {0.1, 0.8, 0.1};
    spec.sig_digits = 0;
    auto sim = make_simulator(spec, 1.0, 13);
    int hits20 = 0;
    const int n = 5000;
    for (int i = 0; i < n; ++i) {
        if (sim->draw_value("q", i, 0) == 20.0) ++hits20;
    }
    const double freq = static_cast<double>(hits20) / n;
    CHECK(freq > 0.75);
    CHECK(freq < 0.85);
    CHECK(sim->greedy_value() == 20.0);
}

TEST_CASE("quantization rounds to significant digits") {
    CHECK(quantize_significant(73384.0, 2) == 73000.0);
    CHECK(quantize_significant(62.0, 2) == 62.0);
    CHECK(quantize_significant(0.034567, 2) == 0.035);
    CHECK(quantize_significant(99.9, 1) == 100.0);
    CHECK(quantize_significant(123.456, 0) == 123.456); // disabled
    CHECK(quantize_significant(0.0, 3) == 0.0);
}

TEST_CASE("invalid simulator parameters are rejected") {
    SimulatorSpec spec;
    spec.family = SimFamily::Lognormal;
    spec.sigma = 0.0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    SimulatorSpec refusal;
    refusal.refusal_rate = 1.5;
    CHECK_THROWS_AS(refusal.validate(), ConfigError);

    SimulatorSpec discrete;
    discrete.family = SimFamily::DiscreteEmpirical;
    CHECK_THROWS_AS(discrete.validate(), ConfigError);
    discrete.values = {1.0, 2.0};
    discrete.weights = {1.0};
    CHECK_THROWS_AS(discrete.validate(), ConfigError);
}

TEST_CASE("spec JSON round-trips") {
    SimulatorSpec spec;
    spec.id = "roundtrip";
    spec.family = SimFamily::ContaminatedNormal;
    spec.mu = 1.5;
    spec.sigma = 2.0;
    spec.contam_prob = 0.2;
    spec.contam_scale = 4.0;
    spec.refusal_rate = 0.1;
    spec.sig_digits = 3;
    spec.phrasing_templates = {"Value: {value}\nFinal answer: {value}"};
    const auto restored = SimulatorSpec::from_json(spec.to_json());
    CHECK(restored.id == spec.id);
    CHECK(restored.family == spec.family);
    CHECK(restored.mu == spec.mu);
    CHECK(restored.sigma == spec.sigma);
    CHECK(restored.contam_prob == spec.contam_prob);
    CHECK(restored.contam_scale == spec.contam_scale);
    CHECK(restored.refusal_rate == spec.refusal_rate);
    CHECK(restored.sig_digits == spec.sig_digits);
    CHECK(restored.phrasing_templates == spec.phrasing_templates);
}
