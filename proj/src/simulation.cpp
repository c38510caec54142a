#include "woc/simulation.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "woc/errors.hpp"
#include "woc/extraction.hpp"
#include "woc/stats.hpp"
#include "woc/util.hpp"

namespace woc {

void StudyConfig::validate() const {
    if (specs.empty()) throw ConfigError("study config needs at least one spec");
    std::map<std::string, int> ids;
    for (const auto& s : specs) {
        s.validate();
        if (++ids[s.id] > 1) throw ConfigError("duplicate spec id: " + s.id);
    }
    if (!(truth > 0.0)) throw ConfigError("study truth must be > 0");
    if (n_grid.empty()) throw ConfigError("study config needs a nonempty n_grid");
    for (int n : n_grid) {
        if (n < 1) throw ConfigError("n_grid values must be >= 1");
    }
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (extraction_max_retries < 0) throw ConfigError("extraction_max_retries must be >= 0");
}

StudyConfig StudyConfig::from_json(const nlohmann::json& j) {
    StudyConfig cfg;
    if (j.contains("specs")) {
        for (const auto& s : j["specs"]) cfg.specs.push_back(SimulatorSpec::from_json(s));
    }
    if (j.contains("truth")) cfg.truth = j["truth"].get<double>();
    if (j.contains("n_grid")) cfg.n_grid = j["n_grid"].get<std::vector<int>>();
    if (j.contains("n_max") && cfg.n_grid.empty()) {
        for (int n = 1; n <= j["n_max"].get<int>(); ++n) cfg.n_grid.push_back(n);
    }
    if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("extraction_max_retries")) {
        cfg.extraction_max_retries = j["extraction_max_retries"].get<int>();
    }
    cfg.validate();
    return cfg;
}

nlohmann::json StudyConfig::to_json() const {
    nlohmann::json j;
    auto specs_json = nlohmann::json::array();
    for (const auto& s : specs) specs_json.push_back(s.to_json());
    j["specs"] = std::move(specs_json);
    j["truth"] = truth;
    j["n_grid"] = n_grid;
    j["trials"] = trials;
    j["seed"] = seed;
    j["extraction_max_retries"] = extraction_max_retries;
    return j;
}

namespace {

PromptBundle study_prompt() {
    GuesstimationQuestion q;
    q.id = "study";
    q.dataset = Dataset::Marbles;
    q.body = "Give your best numeric estimate of the target quantity.";
    q.ground_truth = 1.0;
    return render_prompt(q);
}

} // namespace

std::vector<StudyRecord> run_study(const StudyConfig& cfg) {
    cfg.validate();
    const PromptBundle prompt = study_prompt();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<StudyRecord> records;
    records.reserve(cfg.specs.size() * cfg.n_grid.size() * static_cast<std::size_t>(cfg.trials));

    for (const auto& spec : cfg.specs) {
        SimulatedBackend backend(spec, cfg.truth, mix_seed(cfg.seed, spec.id));
        for (int n : cfg.n_grid) {
            for (int trial = 0; trial < cfg.trials; ++trial) {
                const std::string cell_id = "study/" + spec.id + "/n" + std::to_string(n) +
                                            "/t" + std::to_string(trial);
                SamplingConfig sampling;
                sampling.temperature = 1.0;
                sampling.n_samples = n;
                sampling.max_in_flight = 1;
                const auto raws = sample_responses(backend, prompt, cell_id, sampling);

                ResponseSet set{cell_id, {}};
                for (const auto& raw : raws) {
                    const ResponseSample sample = extract_estimate(
                        backend, prompt, raw, cfg.extraction_max_retries);
                    if (sample.value) set.values.push_back(*sample.value);
                }

                StudyRecord rec;
                rec.spec_id = spec.id;
                rec.n = n;
                rec.trial = trial;
                if (set.values.empty()) {
                    rec.eps_woc = rec.eps_sc = rec.eps_mean = nan;
                    rec.skewness = nan;
                    rec.std_dev = nan;
                    records.push_back(rec);
                    continue;
                }

                Rng tie_rng(mix_seed(cfg.seed, "tiebreak:" + cell_id));
                rec.eps_woc = normalized_error(woc_median(set).value, cfg.truth);
                rec.eps_sc =
                    normalized_error(self_consistency_mode(set, tie_rng).value, cfg.truth);
                rec.eps_mean = normalized_error(mean_aggregate(set).value, cfg.truth);

                try {
                    rec.skewness = sample_skewness(set.values);
                } catch (const StatsError&) {
                    rec.skewness = nan;
                }
                try {
                    rec.std_dev = sample_std_dev(set.values);
                } catch (const StatsError&) {
                    rec.std_dev = nan;
                }
                records.push_back(rec);
            }
        }
    }
    return records;
}

GainCorrelation correlate_gain(const std::vector<StudyRecord>& records) {
    struct Cell {
        double skew_sum = 0.0;
        int skew_count = 0;
        double std_sum = 0.0;
        int std_count = 0;
        double gain_sum = 0.0;
        int gain_count = 0;
    };
    std::map<std::pair<std::string, int>, Cell> cells;
    for (const auto& r : records) {
        Cell& c = cells[{r.spec_id, r.n}];
        if (!std::isnan(r.skewness)) {
            c.skew_sum += r.skewness;
            ++c.skew_count;
        }
        if (!std::isnan(r.std_dev)) {
            c.std_sum += r.std_dev;
            ++c.std_count;
        }
        if (!std::isnan(r.eps_sc) && !std::isnan(r.eps_woc)) {
            c.gain_sum += woc_gain(r.eps_sc, r.eps_woc);
            ++c.gain_count;
        }
    }

    std::vector<double> skews, stds, gains_for_skew, gains_for_std;
    for (const auto& [key, c] : cells) {
        if (c.gain_count == 0) continue;
        const double gain = c.gain_sum / c.gain_count;
        if (c.skew_count > 0) {
            skews.push_back(c.skew_sum / c.skew_count);
            gains_for_skew.push_back(gain);
        }
        if (c.std_count > 0) {
            stds.push_back(c.std_sum / c.std_count);
            gains_for_std.push_back(gain);
        }
    }
    if (skews.size() < 2) {
        throw StatsError("correlate_gain: need at least 2 cells with defined skewness");
    }
    GainCorrelation out;
    out.n_cells = static_cast<int>(skews.size());
    out.r_skew_gain = pearson_r(skews, gains_for_skew);
    out.r_std_gain = pearson_r(stds, gains_for_std);
    return out;
}

std::string study_to_csv(const std::vector<StudyRecord>& records) {
    std::string csv = "spec_id,n,trial,eps_woc,eps_sc,eps_mean,skewness,std_dev\n";
    auto cell = [](double v) { return std::isnan(v) ? std::string("NA") : format_double(v); };
    for (const auto& r : records) {
        csv += csv_field(r.spec_id);
        csv += ',' + std::to_string(r.n);
        csv += ',' + std::to_string(r.trial);
        csv += ',' + cell(r.eps_woc);
        csv += ',' + cell(r.eps_sc);
        csv += ',' + cell(r.eps_mean);
        csv += ',' + cell(r.skewness);
        csv += ',' + cell(r.std_dev);
        csv += '\n';
    }
    return csv;
}

} // namespace woc
