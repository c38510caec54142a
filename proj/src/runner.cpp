#include "woc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "woc/election.hpp"
#include "woc/errors.hpp"
#include "woc/extraction.hpp"
#include "woc/util.hpp"

namespace fs = std::filesystem;

namespace woc {

RunnerConfig RunnerConfig::from_json_file(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }

    RunnerConfig cfg;
    if (!j.contains("dataset_path")) throw ConfigError("config: dataset_path is required");
    cfg.dataset_path = j["dataset_path"].get<std::string>();

    if (j.contains("backend")) {
        const auto& b = j["backend"];
        cfg.backend_kind = b.value("kind", "simulated");
        if (cfg.backend_kind == "simulated") {
            if (b.contains("simulator")) cfg.simulator = SimulatorSpec::from_json(b["simulator"]);
        } else if (cfg.backend_kind == "remote") {
            cfg.remote = RemoteConfig::from_json(b.value("remote", nlohmann::json::object()));
        } else {
            throw ConfigError("config: backend.kind must be 'simulated' or 'remote'");
        }
    }
    if (j.contains("sampling")) {
        const auto& s = j["sampling"];
        cfg.sampling.temperature = s.value("temperature", 1.0);
        cfg.sampling.n_samples = s.value("n_samples", 30);
        cfg.sampling.max_tokens = s.value("max_tokens", 1024);
        cfg.sampling.max_in_flight = s.value("max_in_flight", 4);
    }
    cfg.seed = j.value("seed", 0ull);
    cfg.extraction_max_retries = j.value("extraction_max_retries", 3);
    cfg.median_convention =
        median_convention_from_name(j.value("median_convention", "order_statistic"));
    cfg.bootstrap_samples = j.value("bootstrap_samples", 30);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.sampling.validate();
    return cfg;
}

namespace {

Dataset dataset_of_file(const std::string& path) {
    const auto doc = nlohmann::json::parse(read_text_file(path));
    if (!doc.is_object() || !doc.contains("dataset") || !doc["dataset"].is_string()) {
        throw LoadError(path + ": missing dataset name");
    }
    const auto d = dataset_from_name(doc["dataset"].get<std::string>());
    if (!d) throw LoadError(path + ": unknown dataset " + doc["dataset"].get<std::string>());
    return *d;
}

std::string make_run_id(const RunnerConfig& cfg, const std::string& backend_id) {
    std::uint64_t h = mix_seed(cfg.seed, cfg.dataset_path);
    h = mix_seed(h, backend_id);
    h = mix_seed(h, static_cast<std::uint64_t>(cfg.sampling.n_samples));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "run-%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace

std::string run_experiment(const RunnerConfig& cfg) {
    const Dataset dataset = dataset_of_file(cfg.dataset_path);
    const auto questions = load_dataset(cfg.dataset_path, dataset);

    std::unique_ptr<RemoteBackend> remote;
    if (cfg.backend_kind == "remote") {
        remote = std::make_unique<RemoteBackend>(cfg.remote);
    } else if (cfg.backend_kind != "simulated") {
        throw ConfigError("unknown backend kind: " + cfg.backend_kind);
    }

    RunConfig run;
    run.dataset_name = dataset_name(dataset);
    run.dataset_path = cfg.dataset_path;
    run.backend_kind = cfg.backend_kind;
    run.backend_id = remote ? remote->id() : "sim:" + cfg.simulator.id;
    run.backend_spec = remote ? cfg.remote.to_json() : cfg.simulator.to_json();
    run.sampling = cfg.sampling;
    run.sampling.seed = cfg.seed;
    run.seed = cfg.seed;
    run.extraction_max_retries = cfg.extraction_max_retries;
    run.median_convention = cfg.median_convention;
    run.bootstrap_samples = cfg.bootstrap_samples;
    run.run_id = make_run_id(cfg, run.backend_id);
    for (const auto& q : questions) {
        run.tie_break_seeds[q.id] = mix_seed(cfg.seed, "tiebreak:" + q.id);
        run.questions.push_back(
            QuestionSnapshot{q.id, q.ground_truth, q.category, q.electoral_votes()});
    }

    ArchiveWriter writer(cfg.output_dir, run);
    std::vector<ArchivedSample> samples;
    nlohmann::json failures = nlohmann::json::array();

    for (const auto& q : questions) {
        const PromptBundle prompt = render_prompt(q);
        std::unique_ptr<SimulatedBackend> sim;
        Backend* backend = remote.get();
        if (!backend) {
            sim = make_simulator(cfg.simulator, q.ground_truth, mix_seed(cfg.seed, "backend"));
            backend = sim.get();
        }

        try {
            const auto raws = sample_responses(*backend, prompt, q.id, cfg.sampling);
            for (const auto& raw : raws) {
                ArchivedSample archived;
                archived.kind = "sampled";
                archived.sample = extract_estimate(*backend, prompt, raw,
                                                   cfg.extraction_max_retries,
                                                   cfg.sampling.temperature);
                writer.append_sample(archived);
                samples.push_back(std::move(archived));
            }

            SamplingConfig greedy_cfg = cfg.sampling;
            greedy_cfg.temperature = 0.0;
            greedy_cfg.n_samples = 1;
            greedy_cfg.max_in_flight = 1;
            const RawResponse graw = greedy_response(*backend, prompt, q.id, greedy_cfg);
            ArchivedSample greedy;
            greedy.kind = "greedy";
            greedy.sample =
                extract_estimate(*backend, prompt, graw, cfg.extraction_max_retries, 0.0);
            writer.append_sample(greedy);
            samples.push_back(std::move(greedy));
        } catch (const BackendError& e) {
            failures.push_back({{"question_id", q.id}, {"error", e.what()}});
        }
    }

    if (!failures.empty()) {
        write_text_file((fs::path(cfg.output_dir) / "failures.json").string(),
                        failures.dump(2) + "\n");
    }
    writer.write_derived(compute_derived(run, samples));

    if (failures.size() == questions.size()) {
        throw BackendError("every question failed; partial archive left in " + cfg.output_dir);
    }
    return cfg.output_dir;
}

namespace {

// Errors per strategy in config question order; absent cells skipped.
std::map<Strategy, std::vector<ErrorRecord>> errors_by_strategy(
    const RunConfig& config, const std::vector<DerivedRow>& derived) {
    std::map<Strategy, std::vector<ErrorRecord>> by_strategy;
    for (const auto& row : derived) {
        if (!row.present) continue;
        by_strategy[row.strategy].push_back(
            ErrorRecord{row.question_id, row.strategy, row.epsilon, row.estimate, row.truth});
    }
    (void)config;
    return by_strategy;
}

} // namespace

std::vector<SummaryRow> compute_summary(const ArchiveData& data) {
    const auto derived = compute_derived(data.config, data.samples);
    const auto by_strategy = errors_by_strategy(data.config, derived);
    std::vector<SummaryRow> rows;
    for (Strategy strategy : kStrategyOrder) {
        auto it = by_strategy.find(strategy);
        if (it == by_strategy.end() || it->second.empty()) continue;
        Rng rng(mix_seed(data.config.seed, "bootstrap:" + strategy_name(strategy)));
        rows.push_back(summarize(it->second, data.config.backend_id,
                                 data.config.bootstrap_samples, rng));
    }
    return rows;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows, MedianConvention convention) {
    std::string csv =
        "model_id,strategy,mean_epsilon,band_low,band_high,bootstrap_sd,n_questions,"
        "median_convention,bootstrap_unit\n";
    for (const auto& r : rows) {
        csv += csv_field(r.model_id);
        csv += ',' + strategy_name(r.strategy);
        csv += ',' + format_double(r.mean_epsilon);
        csv += ',' + format_double(r.band_low);
        csv += ',' + format_double(r.band_high);
        csv += ',' + format_double(r.bootstrap_sd);
        csv += ',' + std::to_string(r.n_questions);
        csv += ',' + median_convention_name(convention);
        csv += ",questions\n";
    }
    return csv;
}

std::string summary_to_markdown(const std::vector<SummaryRow>& rows) {
    std::map<Strategy, const SummaryRow*> by_strategy;
    double best = std::numeric_limits<double>::infinity();
    std::string model = "-";
    for (const auto& r : rows) {
        by_strategy[r.strategy] = &r;
        best = std::min(best, r.mean_epsilon);
        model = r.model_id;
    }
    std::string md = "| Model |";
    for (Strategy s : kStrategyOrder) md += " " + strategy_label(s) + " |";
    md += "\n|---|";
    for (std::size_t i = 0; i < std::size(kStrategyOrder); ++i) md += "---|";
    md += "\n| " + model + " |";
    for (Strategy s : kStrategyOrder) {
        auto it = by_strategy.find(s);
        if (it == by_strategy.end()) {
            md += " -- |";
            continue;
        }
        const SummaryRow& r = *it->second;
        std::string cell = format_fixed(r.mean_epsilon, 2) + " [" + format_fixed(r.band_low, 2) +
                           ", " + format_fixed(r.band_high, 2) + "]";
        if (r.mean_epsilon == best) cell = "**" + format_fixed(r.mean_epsilon, 2) + "** [" +
                                           format_fixed(r.band_low, 2) + ", " +
                                           format_fixed(r.band_high, 2) + "]";
        md += " " + cell + " |";
    }
    md += "\n";
    return md;
}

std::string build_prefix_csv(const ArchiveData& data) {
    // Rebuild each question's ordered value list.
    std::map<std::string, std::vector<const ArchivedSample*>> sampled;
    std::map<std::string, const ArchivedSample*> greedy;
    for (const auto& s : data.samples) {
        if (s.kind == "greedy") greedy[s.sample.question_id] = &s;
        else sampled[s.sample.question_id].push_back(&s);
    }

    int max_n = 0;
    std::map<std::string, ResponseSet> sets;
    for (const auto& q : data.config.questions) {
        auto it = sampled.find(q.id);
        if (it == sampled.end()) continue;
        auto ordered = it->second;
        std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
            return a->sample.sample_index < b->sample.sample_index;
        });
        ResponseSet set{q.id, {}};
        for (const auto* s : ordered) {
            if (s->sample.value) set.values.push_back(*s->sample.value);
        }
        if (!set.values.empty()) {
            max_n = std::max(max_n, set.n());
            sets.emplace(q.id, std::move(set));
        }
    }

    auto truth_of = [&](const std::string& qid) {
        for (const auto& q : data.config.questions) {
            if (q.id == qid) return q.ground_truth;
        }
        throw ArchiveError("question not in config snapshot: " + qid);
    };

    std::string csv = "strategy,n,mean_epsilon,n_questions\n";
    for (Strategy strategy :
         {Strategy::WocMedian, Strategy::SelfConsistencyMode, Strategy::Mean}) {
        for (int n = 1; n <= max_n; ++n) {
            double sum = 0.0;
            int count = 0;
            for (const auto& [qid, set] : sets) {
                if (set.n() < n) continue;
                Rng rng(mix_seed(data.config.tie_break_seeds.at(qid),
                                 static_cast<std::uint64_t>(n)));
                const auto points = prefix_curve(set, strategy, {n},
                                                 data.config.median_convention, rng);
                sum += normalized_error(points.front().estimate.value, truth_of(qid));
                ++count;
            }
            if (count == 0) continue;
            csv += strategy_name(strategy) + "," + std::to_string(n) + "," +
                   format_double(sum / count) + "," + std::to_string(count) + "\n";
        }
    }
    // Greedy reference line: constant in n.
    double gsum = 0.0;
    int gcount = 0;
    for (const auto& [qid, s] : greedy) {
        if (!s->sample.value) continue;
        gsum += normalized_error(*s->sample.value, truth_of(qid));
        ++gcount;
    }
    if (gcount > 0) {
        for (int n = 1; n <= max_n; ++n) {
            csv += strategy_name(Strategy::Greedy) + "," + std::to_string(n) + "," +
                   format_double(gsum / gcount) + "," + std::to_string(gcount) + "\n";
        }
    }
    return csv;
}

void write_report(const std::string& archive_dir, bool path_bands) {
    const ArchiveData data = load_archive(archive_dir);
    if (data.samples.empty()) throw ArchiveError("empty archive: " + archive_dir);
    const auto rows = compute_summary(data);
    if (rows.empty()) throw ArchiveError("archive has no scored estimates: " + archive_dir);
    const fs::path base(archive_dir);
    write_text_file((base / "summary.csv").string(),
                    summary_to_csv(rows, data.config.median_convention));
    write_text_file((base / "summary.md").string(), summary_to_markdown(rows));
    write_text_file((base / "prefix_curve.csv").string(), build_prefix_csv(data));

    if (path_bands) {
        std::map<std::string, std::vector<const ArchivedSample*>> sampled;
        for (const auto& s : data.samples) {
            if (s.kind != "greedy") sampled[s.sample.question_id].push_back(&s);
        }
        std::string csv = "question_id,strategy,estimate,band_low,band_high,bootstrap_sd\n";
        const auto derived = compute_derived(data.config, data.samples);
        for (const auto& row : derived) {
            if (!row.present || row.strategy == Strategy::Greedy) continue;
            auto it = sampled.find(row.question_id);
            if (it == sampled.end()) continue;
            auto ordered = it->second;
            std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
                return a->sample.sample_index < b->sample.sample_index;
            });
            ResponseSet set{row.question_id, {}};
            for (const auto* s : ordered) {
                if (s->sample.value) set.values.push_back(*s->sample.value);
            }
            Rng rng(mix_seed(data.config.tie_break_seeds.at(row.question_id), "pathboot"));
            const BootstrapBand band =
                path_bootstrap(set, row.strategy, data.config.median_convention,
                               data.config.bootstrap_samples, rng);
            csv += csv_field(row.question_id) + "," + strategy_name(row.strategy) + "," +
                   format_double(row.estimate) + "," + format_double(band.low) + "," +
                   format_double(band.high) + "," + format_double(band.sd) + "\n";
        }
        write_text_file((base / "question_bands.csv").string(), csv);
    }
}

StatsTestReport stats_test(const std::string& archive_dir, Strategy a, Strategy b) {
    const ArchiveData data = load_archive(archive_dir);
    const auto derived = compute_derived(data.config, data.samples);
    std::map<std::string, double> eps_a, eps_b;
    for (const auto& row : derived) {
        if (!row.present) continue;
        if (row.strategy == a) eps_a[row.question_id] = row.epsilon;
        if (row.strategy == b) eps_b[row.question_id] = row.epsilon;
    }
    std::vector<std::pair<double, double>> pairs;
    for (const auto& [qid, ea] : eps_a) {
        auto it = eps_b.find(qid);
        if (it != eps_b.end()) pairs.emplace_back(ea, it->second);
    }
    if (pairs.empty()) {
        throw StatsError("no paired questions for " + strategy_name(a) + " vs " +
                         strategy_name(b));
    }
    StatsTestReport report;
    report.strategy_a = a;
    report.strategy_b = b;
    report.n_pairs = static_cast<int>(pairs.size());
    report.wilcoxon = wilcoxon_signed_rank(pairs);
    return report;
}

std::string stats_report_to_json(const StatsTestReport& r) {
    nlohmann::json j;
    j["strategy_a"] = strategy_name(r.strategy_a);
    j["strategy_b"] = strategy_name(r.strategy_b);
    j["pairing"] = r.pairing;
    j["n_pairs"] = r.n_pairs;
    j["w_plus"] = r.wilcoxon.w_plus;
    j["w_minus"] = r.wilcoxon.w_minus;
    j["n_effective"] = r.wilcoxon.n_effective;
    j["exact"] = r.wilcoxon.exact;
    j["p_one_sided_less"] = r.wilcoxon.p_one_sided_less;
    j["p_one_sided_greater"] = r.wilcoxon.p_one_sided_greater;
    j["p_two_sided"] = r.wilcoxon.p_two_sided;
    return j.dump(2) + "\n";
}

namespace {

std::vector<StatePrediction> predictions_from_rows(const RunConfig& config,
                                                   const std::vector<DerivedRow>& derived,
                                                   Strategy strategy) {
    std::map<std::string, const QuestionSnapshot*> by_id;
    for (const auto& q : config.questions) by_id[q.id] = &q;
    std::vector<StatePrediction> predictions;
    for (const auto& row : derived) {
        if (row.strategy != strategy || !row.present) continue;
        const QuestionSnapshot* q = by_id.at(row.question_id);
        StatePrediction p;
        p.state = q->category.empty() ? q->id : q->category;
        p.dem_share_predicted = row.estimate;
        p.dem_share_actual = q->ground_truth;
        p.electoral_votes = q->electoral_votes;
        predictions.push_back(std::move(p));
    }
    return predictions;
}

void write_one_map(const std::vector<StatePrediction>& predictions,
                   const std::vector<StateGeometry>& geometry, const std::string& title,
                   const fs::path& svg_path, const fs::path& tally_path) {
    const ElectoralTally tally = to_electoral_votes(predictions);
    write_text_file(svg_path.string(), render_map(predictions, tally, geometry, title));
    write_text_file(tally_path.string(), tally_to_json(predictions, tally));
}

} // namespace

void write_archive_maps(const std::string& archive_dir, const std::string& geometry_path,
                        const std::string& out_dir) {
    const ArchiveData data = load_archive(archive_dir);
    const auto geometry = load_geometry(geometry_path);
    const auto derived = compute_derived(data.config, data.samples);
    fs::create_directories(out_dir);
    for (Strategy strategy : kStrategyOrder) {
        const auto predictions = predictions_from_rows(data.config, derived, strategy);
        if (predictions.empty()) continue;
        // render_map rejects incomplete coverage, naming the absent states.
        write_one_map(predictions, geometry,
                      strategy_label(strategy) + " forecast, " + data.config.backend_id,
                      fs::path(out_dir) / ("map_" + strategy_name(strategy) + ".svg"),
                      fs::path(out_dir) / ("tally_" + strategy_name(strategy) + ".json"));
    }
}

void write_actual_map(const std::string& dataset_path, const std::string& geometry_path,
                      const std::string& out_dir) {
    const Dataset dataset = dataset_of_file(dataset_path);
    if (!is_election_dataset(dataset)) {
        throw ConfigError(dataset_path + " is not an election dataset");
    }
    const auto questions = load_dataset(dataset_path, dataset);
    const auto geometry = load_geometry(geometry_path);
    std::vector<StatePrediction> predictions;
    for (const auto& q : questions) {
        StatePrediction p;
        p.state = q.category.empty() ? q.id : q.category;
        p.dem_share_predicted = q.ground_truth;
        p.dem_share_actual = q.ground_truth;
        p.electoral_votes = q.electoral_votes();
        predictions.push_back(std::move(p));
    }
    fs::create_directories(out_dir);
    write_one_map(predictions, geometry, "Actual vote share",
                  fs::path(out_dir) / "map_actual.svg",
                  fs::path(out_dir) / "tally_actual.json");
}

void run_simulation_study(const std::string& config_path, const std::string& out_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(config_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("study config " + config_path + ": " + e.what());
    }
    const StudyConfig cfg = StudyConfig::from_json(j);
    const auto records = run_study(cfg);
    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "study.csv").string(), study_to_csv(records));

    nlohmann::json summary;
    summary["config"] = cfg.to_json();
    summary["records"] = records.size();
    try {
        const GainCorrelation corr = correlate_gain(records);
        summary["r_skew_gain"] = corr.r_skew_gain;
        summary["r_std_gain"] = corr.r_std_gain;
        summary["n_cells"] = corr.n_cells;
    } catch (const StatsError& e) {
        summary["correlation_error"] = e.what();
    }
    write_text_file((fs::path(out_dir) / "study_summary.json").string(),
                    summary.dump(2) + "\n");
}

bool ReplayCheck::all_match() const {
    return derived.matches_stored && summary_match && prefix_match;
}

ReplayCheck replay_archive(const std::string& archive_dir) {
    const ArchiveData data = load_archive(archive_dir);
    ReplayCheck check;
    check.recovered_truncated_lines = data.recovered_truncated_lines;
    check.derived = replay(data);

    const fs::path base(archive_dir);
    if (fs::exists(base / "summary.csv")) {
        const std::string stored = read_text_file((base / "summary.csv").string());
        const std::string fresh =
            summary_to_csv(compute_summary(data), data.config.median_convention);
        check.summary_match = stored == fresh;
    }
    if (fs::exists(base / "prefix_curve.csv")) {
        const std::string stored = read_text_file((base / "prefix_curve.csv").string());
        check.prefix_match = stored == build_prefix_csv(data);
    }
    return check;
}

ValidationReport validate_file(const std::string& path) {
    auto [questions, report] = load_dataset_lenient(path);
    return report;
}

} // namespace woc
