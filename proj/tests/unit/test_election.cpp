#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "woc/datasets.hpp"
#include "woc/election.hpp"
#include "woc/errors.hpp"
#include "woc/rng.hpp"

using namespace woc;

namespace {

std::vector<StatePrediction> actual_predictions() {
    const auto questions = load_dataset(src_path("data/elecpred.json"), Dataset::Elecpred);
    std::vector<StatePrediction> out;
    for (const auto& q : questions) {
        out.push_back(StatePrediction{q.category, q.ground_truth, q.ground_truth,
                                      q.electoral_votes()});
    }
    return out;
}

std::vector<StatePrediction> random_predictions(Rng& rng) {
    auto predictions = actual_predictions();
    for (auto& p : predictions) {
        double share;
        do {
            share = uniform01(rng) * 100.0;
        } while (std::abs(share - 50.0) < 1e-9);
        p.dem_share_predicted = share;
    }
    return predictions;
}

} // namespace

TEST_CASE("actual 2024 shares convert to the 226 / 312 split") {
    const auto tally = to_electoral_votes(actual_predictions());
    CHECK(tally.dem_votes == 226);
    CHECK(tally.rep_votes == 312);
    CHECK(tally.per_state_winner.at("California") == 'D');
    CHECK(tally.per_state_winner.at("Texas") == 'R');
}

TEST_CASE("uniform landslide takes every electoral vote") {
    auto predictions = actual_predictions();
    for (auto& p : predictions) p.dem_share_predicted = 60.0;
    const auto tally = to_electoral_votes(predictions);
    CHECK(tally.dem_votes == 538);
    CHECK(tally.rep_votes == 0);
}

TEST_CASE("a 49.9 share is a Republican state under the strict >50 rule") {
    const auto tally = to_electoral_votes({{"Somewhere", 49.9, 49.9, 11}});
    CHECK(tally.dem_votes == 0);
    CHECK(tally.rep_votes == 11);
}

TEST_CASE("exact 50.0 is rejected as a tie prediction") {
    CHECK_THROWS_WITH_AS(to_electoral_votes({{"Somewhere", 50.0, 48.0, 5}}),
                         doctest::Contains("tie prediction"), Error);
}

TEST_CASE("duplicate states are rejected") {
    CHECK_THROWS_AS(to_electoral_votes({{"Ohio", 40, 40, 17}, {"Ohio", 60, 40, 17}}), Error);
}

TEST_CASE("tally matches a brute-force loop and conserves votes") {
    Rng rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        const auto predictions = random_predictions(rng);
        const auto tally = to_electoral_votes(predictions);
        int dem = 0, rep = 0, total = 0;
        for (const auto& p : predictions) {
            total += p.electoral_votes;
            if (p.dem_share_predicted > 50.0) dem += p.electoral_votes;
            else rep += p.electoral_votes;
        }
        CHECK(tally.dem_votes == dem);
        CHECK(tally.rep_votes == rep);
        CHECK(tally.dem_votes + tally.rep_votes == total);
    }
}

TEST_CASE("raising one state's share never lowers the Democratic total") {
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        auto predictions = random_predictions(rng);
        const int before = to_electoral_votes(predictions).dem_votes;
        auto& p = predictions[uniform_index(rng, predictions.size())];
        double bumped = p.dem_share_predicted + uniform01(rng) * (100.0 - p.dem_share_predicted);
        if (std::abs(bumped - 50.0) < 1e-9) bumped += 1e-6;
        p.dem_share_predicted = bumped;
        const int after = to_electoral_votes(predictions).dem_votes;
        CHECK(after >= before);
    }
}

TEST_CASE("geometry asset covers all 51 states") {
    const auto geometry = load_geometry(src_path("assets/us_states_geometry.json"));
    CHECK(geometry.size() == 51);
    bool has_dc = false;
    for (const auto& g : geometry) {
        CHECK(g.polygon.size() >= 3);
        if (g.name == "District Of Columbia") has_dc = true;
    }
    CHECK(has_dc);
}

TEST_CASE("map renders deterministically with the extremes darkest") {
    const auto geometry = load_geometry(src_path("assets/us_states_geometry.json"));
    const auto predictions = actual_predictions();
    const auto tally = to_electoral_votes(predictions);
    const auto svg1 = render_map(predictions, tally, geometry, "Actual");
    const auto svg2 = render_map(predictions, tally, geometry, "Actual");
    CHECK(svg1 == svg2);
    CHECK(svg1.find("Democrat 226") != std::string::npos);
    CHECK(svg1.find("Republican 312") != std::string::npos);
    CHECK(svg1.find("90.3 (90.3)") != std::string::npos);

    // The DC share is the highest and Wyoming's the lowest, so their fills
    // are the saturated ends of the diverging scale.
    double hi = 0, lo = 100;
    for (const auto& p : predictions) {
        hi = std::max(hi, p.dem_share_predicted);
        lo = std::min(lo, p.dem_share_predicted);
    }
    CHECK(hi == 90.3);
    CHECK(lo == 25.8);
    CHECK(svg1.find(share_color(90.3)) != std::string::npos);
    CHECK(svg1.find(share_color(25.8)) != std::string::npos);
    CHECK(share_color(90.3) == "#2166ac"); // fully saturated blue end
    for (const auto& p : predictions) {
        if (p.state == "District Of Columbia" || p.state == "Wyoming") continue;
        CHECK(share_color(p.dem_share_predicted) != share_color(90.3));
    }
}

TEST_CASE("missing states are reported by name") {
    const auto geometry = load_geometry(src_path("assets/us_states_geometry.json"));
    auto predictions = actual_predictions();
    predictions.erase(std::remove_if(predictions.begin(), predictions.end(),
                                     [](const StatePrediction& p) {
                                         return p.state == "District Of Columbia";
                                     }),
                      predictions.end());
    const auto tally = to_electoral_votes(predictions);
    CHECK_THROWS_WITH_AS(render_map(predictions, tally, geometry, "broken"),
                         doctest::Contains("District Of Columbia"), Error);
}

TEST_CASE("tally JSON lists every state with its winner") {
    const auto predictions = actual_predictions();
    const auto tally = to_electoral_votes(predictions);
    const auto json_text = tally_to_json(predictions, tally);
    const auto j = nlohmann::json::parse(json_text);
    CHECK(j.at("dem_votes") == 226);
    CHECK(j.at("rep_votes") == 312);
    CHECK(j.at("per_state").size() == 51);
}
