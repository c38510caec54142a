#include "woc/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "woc/errors.hpp"
#include "woc/rng.hpp"
#include "woc/util.hpp"

namespace woc {

namespace {

const std::vector<std::string>& default_templates() {
    static const std::vector<std::string> templates = {
        "Reasoning: Working from typical magnitudes for the quantities involved, the total "
        "comes out near {value}.\nFinal answer: {value}",
        "Reasoning: Starting from the known baseline and applying a plausible trend, the "
        "estimate is {value}.\nFinal answer: {value}",
        "Reasoning: A rough calculation of the relevant volumes and rates points to roughly "
        "{value}. Therefore the final answer (arabic numerals) is {value}.",
        "Reasoning: Several back-of-the-envelope checks converge on the same figure.\n"
        "Final answer: {value}",
    };
    return templates;
}

const std::string kRefusalText =
    "Reasoning: There is not enough information to answer this reliably, so no meaningful "
    "estimate can be given.\nFinal answer: 0";

std::string replace_all(std::string text, std::string_view needle, std::string_view repl) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), repl);
        pos += repl.size();
    }
    return text;
}

} // namespace

std::string sim_family_name(SimFamily f) {
    switch (f) {
    case SimFamily::Lognormal: return "lognormal";
    case SimFamily::Normal: return "normal";
    case SimFamily::ContaminatedNormal: return "contaminated_normal";
    case SimFamily::DiscreteEmpirical: return "discrete_empirical";
    }
    return "unknown";
}

SimFamily sim_family_from_name(std::string_view name) {
    for (SimFamily f : {SimFamily::Lognormal, SimFamily::Normal, SimFamily::ContaminatedNormal,
                        SimFamily::DiscreteEmpirical}) {
        if (sim_family_name(f) == name) return f;
    }
    throw ConfigError("unknown simulator family: " + std::string(name));
}

void SimulatorSpec::validate() const {
    if (refusal_rate < 0.0 || refusal_rate > 1.0) {
        throw ConfigError("refusal_rate must be in [0, 1]");
    }
    if (contam_prob < 0.0 || contam_prob > 1.0) {
        throw ConfigError("contam_prob must be in [0, 1]");
    }
    if (contam_scale <= 0.0) throw ConfigError("contam_scale must be > 0");
    if (sig_digits < 0) throw ConfigError("sig_digits must be >= 0");
    switch (family) {
    case SimFamily::Lognormal:
        if (!(sigma > 0.0)) throw ConfigError("lognormal sigma must be > 0");
        break;
    case SimFamily::Normal:
    case SimFamily::ContaminatedNormal:
        if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
        break;
    case SimFamily::DiscreteEmpirical: {
        if (values.empty()) throw ConfigError("discrete_empirical requires values");
        if (!weights.empty()) {
            if (weights.size() != values.size()) {
                throw ConfigError("weights must match values in length");
            }
            double sum = 0.0;
            for (double w : weights) {
                if (w < 0.0) throw ConfigError("weights must be >= 0");
                sum += w;
            }
            if (sum <= 0.0) throw ConfigError("weights must sum to > 0");
        }
        break;
    }
    }
}

SimulatorSpec SimulatorSpec::from_json(const nlohmann::json& j) {
    SimulatorSpec spec;
    if (j.contains("id")) spec.id = j["id"].get<std::string>();
    if (j.contains("family")) spec.family = sim_family_from_name(j["family"].get<std::string>());
    if (j.contains("mu")) spec.mu = j["mu"].get<double>();
    if (j.contains("sigma")) spec.sigma = j["sigma"].get<double>();
    if (j.contains("contam_prob")) spec.contam_prob = j["contam_prob"].get<double>();
    if (j.contains("contam_scale")) spec.contam_scale = j["contam_scale"].get<double>();
    if (j.contains("values")) spec.values = j["values"].get<std::vector<double>>();
    if (j.contains("weights")) spec.weights = j["weights"].get<std::vector<double>>();
    if (j.contains("refusal_rate")) spec.refusal_rate = j["refusal_rate"].get<double>();
    if (j.contains("sig_digits")) spec.sig_digits = j["sig_digits"].get<int>();
    if (j.contains("phrasing_templates")) {
        spec.phrasing_templates = j["phrasing_templates"].get<std::vector<std::string>>();
    }
    spec.validate();
    return spec;
}

nlohmann::json SimulatorSpec::to_json() const {
    nlohmann::json j;
    j["id"] = id;
    j["family"] = sim_family_name(family);
    j["mu"] = mu;
    j["sigma"] = sigma;
    j["contam_prob"] = contam_prob;
    j["contam_scale"] = contam_scale;
    if (!values.empty()) j["values"] = values;
    if (!weights.empty()) j["weights"] = weights;
    j["refusal_rate"] = refusal_rate;
    j["sig_digits"] = sig_digits;
    if (!phrasing_templates.empty()) j["phrasing_templates"] = phrasing_templates;
    return j;
}

double quantize_significant(double value, int sig_digits) {
    if (sig_digits <= 0 || value == 0.0 || !std::isfinite(value)) return value;
    const double mag = std::floor(std::log10(std::abs(value)));
    const double scale = std::pow(10.0, sig_digits - 1 - mag);
    return std::round(value * scale) / scale;
}

SimulatedBackend::SimulatedBackend(SimulatorSpec spec, double truth, std::uint64_t seed)
    : spec_(std::move(spec)), truth_(truth), seed_(seed) {
    spec_.validate();
    templates_ = spec_.phrasing_templates.empty() ? default_templates() : spec_.phrasing_templates;
}

std::string SimulatedBackend::id() const { return "sim:" + spec_.id; }

bool SimulatedBackend::numeric_channel_available() const {
    for (const auto& t : templates_) {
        if (t.find("{value}") != std::string::npos) return true;
    }
    return false;
}

SimulatedBackend::Generated SimulatedBackend::generate(const std::string& question_id,
                                                       int sample_index, int attempt) const {
    std::uint64_t s = mix_seed(seed_, question_id);
    s = mix_seed(s, static_cast<std::uint64_t>(sample_index));
    s = mix_seed(s, static_cast<std::uint64_t>(attempt));
    Rng rng(s);

    Generated g;
    if (uniform01(rng) < spec_.refusal_rate) {
        g.refusal = true;
        g.value = 0.0;
        return g;
    }
    double v = 0.0;
    switch (spec_.family) {
    case SimFamily::Lognormal: {
        const double z = normal01(rng);
        double sigma = spec_.sigma;
        if (uniform01(rng) < spec_.contam_prob) sigma *= spec_.contam_scale;
        v = truth_ * std::exp(spec_.mu + sigma * z);
        break;
    }
    case SimFamily::Normal: {
        const double z = normal01(rng);
        v = truth_ + spec_.mu + spec_.sigma * z;
        break;
    }
    case SimFamily::ContaminatedNormal: {
        const double z = normal01(rng);
        double sigma = spec_.sigma;
        if (uniform01(rng) < spec_.contam_prob) sigma *= spec_.contam_scale;
        v = truth_ + spec_.mu + sigma * z;
        break;
    }
    case SimFamily::DiscreteEmpirical: {
        const double u = uniform01(rng);
        if (spec_.weights.empty()) {
            const auto idx = std::min(static_cast<std::size_t>(u * spec_.values.size()),
                                      spec_.values.size() - 1);
            v = spec_.values[idx];
        } else {
            double sum = 0.0;
            for (double w : spec_.weights) sum += w;
            double acc = 0.0;
            v = spec_.values.back();
            for (std::size_t i = 0; i < spec_.values.size(); ++i) {
                acc += spec_.weights[i] / sum;
                if (u < acc) {
                    v = spec_.values[i];
                    break;
                }
            }
        }
        break;
    }
    }
    g.value = quantize_significant(v, spec_.sig_digits);
    g.template_index = static_cast<std::size_t>(uniform_index(rng, templates_.size()));
    return g;
}

std::string SimulatedBackend::render_text(const Generated& g) const {
    if (g.refusal) return kRefusalText;
    return replace_all(templates_[g.template_index], "{value}", format_double(g.value));
}

double SimulatedBackend::draw_value(const std::string& question_id, int sample_index,
                                    int attempt) const {
    return generate(question_id, sample_index, attempt).value;
}

double SimulatedBackend::greedy_value() const {
    if (spec_.refusal_rate > 0.5) return 0.0;
    double v = 0.0;
    switch (spec_.family) {
    case SimFamily::Lognormal:
        // Mode of the lognormal component.
        v = truth_ * std::exp(spec_.mu - spec_.sigma * spec_.sigma);
        break;
    case SimFamily::Normal:
    case SimFamily::ContaminatedNormal:
        v = truth_ + spec_.mu;
        break;
    case SimFamily::DiscreteEmpirical: {
        if (spec_.weights.empty()) {
            v = spec_.values.front();
        } else {
            std::size_t best = 0;
            for (std::size_t i = 1; i < spec_.weights.size(); ++i) {
                if (spec_.weights[i] > spec_.weights[best]) best = i;
            }
            v = spec_.values[best];
        }
        break;
    }
    }
    return quantize_significant(v, spec_.sig_digits);
}

RawResponse SimulatedBackend::complete(const CompletionRequest& request) {
    RawResponse out;
    out.question_id = request.question_id;
    out.sample_index = request.sample_index;
    out.backend_id = id();

    const bool greedy = request.temperature == 0.0;
    const bool continuation = iends_with(request.user_message, kExtractionSuffix);

    if (continuation) {
        // Two-step extraction follow-up: state the number the original
        // response was driving at. A simulator whose templates carry no
        // numeric slot cannot produce digits here either.
        if (!numeric_channel_available()) {
            out.text = " unknown.";
            return out;
        }
        double v;
        if (greedy) {
            v = greedy_value();
        } else {
            const Generated g =
                generate(request.question_id, request.sample_index, request.attempt);
            v = g.value;
        }
        out.text = " " + format_double(v) + ".";
        return out;
    }

    if (greedy) {
        Generated g;
        if (spec_.refusal_rate > 0.5) {
            g.refusal = true;
        } else {
            g.value = greedy_value();
            g.template_index = 0;
        }
        out.text = render_text(g);
        return out;
    }

    const Generated g = generate(request.question_id, request.sample_index, request.attempt);
    out.text = render_text(g);
    return out;
}

std::unique_ptr<SimulatedBackend> make_simulator(const SimulatorSpec& spec, double truth,
                                                 std::uint64_t seed) {
    return std::make_unique<SimulatedBackend>(spec, truth, seed);
}

} // namespace woc
