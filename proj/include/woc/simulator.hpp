#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "woc/backend.hpp"

namespace woc {

enum class SimFamily { Lognormal, Normal, ContaminatedNormal, DiscreteEmpirical };

std::string sim_family_name(SimFamily f);
SimFamily sim_family_from_name(std::string_view name);

// A deterministic responder whose numeric answers are draws from a chosen
// distribution centered around the question's ground truth:
//   lognormal:           truth * exp(mu + sigma * z)
//   normal:              truth + mu + sigma * z
//   contaminated_normal: as normal, but with probability contam_prob the
//                        draw uses sigma * contam_scale (outlier component)
//   discrete_empirical:  one of `values` picked by `weights` (absolute)
// Lognormal draws accept the same contamination parameters (applied in log
// space), which yields the heavy-tailed "contaminated lognormal" shape.
// With probability refusal_rate a sample is an unanswerable-style response
// whose final answer is 0. Emitted numbers are rounded to sig_digits
// significant digits (0 disables rounding) so repeated values occur the way
// they do in rounded model answers.
struct SimulatorSpec {
    std::string id = "sim";
    SimFamily family = SimFamily::Lognormal;
    double mu = 0.0;
    double sigma = 0.5;
    double contam_prob = 0.0;
    double contam_scale = 1.0;
    std::vector<double> values;  // discrete_empirical
    std::vector<double> weights; // optional; uniform when empty
    double refusal_rate = 0.0;
    int sig_digits = 2;
    std::vector<std::string> phrasing_templates; // "{value}" placeholder; defaults when empty

    void validate() const; // throws ConfigError
    static SimulatorSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

double quantize_significant(double value, int sig_digits);

class SimulatedBackend : public Backend {
public:
    SimulatedBackend(SimulatorSpec spec, double truth, std::uint64_t seed);

    std::string id() const override;
    RawResponse complete(const CompletionRequest& request) override;

    // The numeric channel behind a sampled response; pure in
    // (spec, seed, question_id, sample_index, attempt).
    double draw_value(const std::string& question_id, int sample_index, int attempt) const;
    double greedy_value() const;

    const SimulatorSpec& spec() const { return spec_; }

private:
    struct Generated {
        double value = 0.0;
        bool refusal = false;
        std::size_t template_index = 0;
    };
    Generated generate(const std::string& question_id, int sample_index, int attempt) const;
    std::string render_text(const Generated& g) const;
    bool numeric_channel_available() const;

    SimulatorSpec spec_;
    double truth_;
    std::uint64_t seed_;
    std::vector<std::string> templates_; // resolved (defaults applied)
};

std::unique_ptr<SimulatedBackend> make_simulator(const SimulatorSpec& spec, double truth,
                                                 std::uint64_t seed);

} // namespace woc
