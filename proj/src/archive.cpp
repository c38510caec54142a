#include "woc/archive.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "woc/errors.hpp"
#include "woc/stats.hpp"
#include "woc/util.hpp"

namespace fs = std::filesystem;

namespace woc {

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["run_id"] = run_id;
    j["dataset"] = dataset_name;
    j["dataset_path"] = dataset_path;
    j["backend_kind"] = backend_kind;
    j["backend_id"] = backend_id;
    j["backend_spec"] = backend_spec;
    j["sampling"] = {{"temperature", sampling.temperature},
                     {"n_samples", sampling.n_samples},
                     {"max_tokens", sampling.max_tokens},
                     {"max_in_flight", sampling.max_in_flight}};
    if (sampling.seed) j["sampling"]["seed"] = *sampling.seed;
    j["seed"] = seed;
    j["extraction_max_retries"] = extraction_max_retries;
    j["median_convention"] = median_convention_name(median_convention);
    j["bootstrap_samples"] = bootstrap_samples;
    j["tie_break_seeds"] = tie_break_seeds;
    auto qs = nlohmann::json::array();
    for (const auto& q : questions) {
        nlohmann::json qj = {{"id", q.id}, {"ground_truth", q.ground_truth}};
        if (!q.category.empty()) qj["category"] = q.category;
        if (q.electoral_votes > 0) qj["electoral_votes"] = q.electoral_votes;
        qs.push_back(std::move(qj));
    }
    j["questions"] = std::move(qs);
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    c.run_id = j.value("run_id", "");
    c.dataset_name = j.value("dataset", "");
    c.dataset_path = j.value("dataset_path", "");
    c.backend_kind = j.value("backend_kind", "");
    c.backend_id = j.value("backend_id", "");
    if (j.contains("backend_spec")) c.backend_spec = j["backend_spec"];
    if (j.contains("sampling")) {
        const auto& s = j["sampling"];
        c.sampling.temperature = s.value("temperature", 1.0);
        c.sampling.n_samples = s.value("n_samples", 30);
        c.sampling.max_tokens = s.value("max_tokens", 1024);
        c.sampling.max_in_flight = s.value("max_in_flight", 4);
        if (s.contains("seed")) c.sampling.seed = s["seed"].get<std::uint64_t>();
    }
    c.seed = j.value("seed", 0ull);
    c.extraction_max_retries = j.value("extraction_max_retries", 3);
    c.median_convention =
        median_convention_from_name(j.value("median_convention", "order_statistic"));
    c.bootstrap_samples = j.value("bootstrap_samples", 30);
    if (j.contains("tie_break_seeds")) {
        for (const auto& [k, v] : j["tie_break_seeds"].items()) {
            c.tie_break_seeds[k] = v.get<std::uint64_t>();
        }
    }
    if (j.contains("questions")) {
        for (const auto& qj : j["questions"]) {
            QuestionSnapshot q;
            q.id = qj.value("id", "");
            q.ground_truth = qj.value("ground_truth", 0.0);
            q.category = qj.value("category", "");
            q.electoral_votes = qj.value("electoral_votes", 0);
            c.questions.push_back(std::move(q));
        }
    }
    return c;
}

nlohmann::json ArchivedSample::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["question_id"] = sample.question_id;
    j["sample_index"] = sample.sample_index;
    j["raw_text"] = sample.raw_text;
    if (sample.value) j["value"] = *sample.value;
    else j["value"] = nullptr;
    j["extraction_method"] = extraction_method_name(sample.extraction_method);
    j["attempts"] = sample.attempts;
    j["negative_flag"] = sample.negative_flag;
    j["backend_id"] = sample.backend_id;
    auto trail = nlohmann::json::array();
    for (const auto& rec : sample.trail) {
        nlohmann::json r;
        r["attempt"] = rec.attempt;
        r["response_text"] = rec.response_text;
        if (rec.format_value) r["format_value"] = *rec.format_value;
        r["two_step_issued"] = rec.two_step_issued;
        if (!rec.two_step_text.empty()) r["two_step_text"] = rec.two_step_text;
        if (rec.two_step_value) r["two_step_value"] = *rec.two_step_value;
        if (!rec.error.empty()) r["error"] = rec.error;
        trail.push_back(std::move(r));
    }
    j["trail"] = std::move(trail);
    return j;
}

ArchivedSample ArchivedSample::from_json(const nlohmann::json& j) {
    ArchivedSample out;
    out.kind = j.value("kind", "sampled");
    out.sample.question_id = j.at("question_id").get<std::string>();
    out.sample.sample_index = j.at("sample_index").get<int>();
    out.sample.raw_text = j.value("raw_text", "");
    if (j.contains("value") && !j["value"].is_null()) {
        out.sample.value = j["value"].get<double>();
    }
    out.sample.extraction_method =
        extraction_method_from_name(j.value("extraction_method", "failed"));
    out.sample.attempts = j.value("attempts", 1);
    out.sample.negative_flag = j.value("negative_flag", false);
    out.sample.backend_id = j.value("backend_id", "");
    if (j.contains("trail")) {
        for (const auto& r : j["trail"]) {
            AttemptRecord rec;
            rec.attempt = r.value("attempt", 1);
            rec.response_text = r.value("response_text", "");
            if (r.contains("format_value")) rec.format_value = r["format_value"].get<double>();
            rec.two_step_issued = r.value("two_step_issued", false);
            rec.two_step_text = r.value("two_step_text", "");
            if (r.contains("two_step_value")) {
                rec.two_step_value = r["two_step_value"].get<double>();
            }
            rec.error = r.value("error", "");
            out.sample.trail.push_back(std::move(rec));
        }
    }
    return out;
}

std::string derived_to_csv(const std::vector<DerivedRow>& rows) {
    std::string csv = "question_id,strategy,present,estimate,n_used,tie_broken,truth,epsilon\n";
    for (const auto& r : rows) {
        csv += csv_field(r.question_id);
        csv += ',';
        csv += strategy_name(r.strategy);
        csv += ',';
        csv += r.present ? '1' : '0';
        csv += ',';
        if (r.present) csv += format_double(r.estimate);
        csv += ',';
        csv += std::to_string(r.n_used);
        csv += ',';
        csv += r.tie_broken ? '1' : '0';
        csv += ',';
        csv += format_double(r.truth);
        csv += ',';
        if (r.present) csv += format_double(r.epsilon);
        csv += '\n';
    }
    return csv;
}

std::vector<DerivedRow> compute_derived(const RunConfig& config,
                                        const std::vector<ArchivedSample>& samples) {
    // Bucket extracted values per question, in sample order.
    std::map<std::string, std::vector<const ArchivedSample*>> sampled;
    std::map<std::string, const ArchivedSample*> greedy;
    for (const auto& s : samples) {
        if (s.kind == "greedy") greedy[s.sample.question_id] = &s;
        else sampled[s.sample.question_id].push_back(&s);
    }

    std::vector<DerivedRow> rows;
    for (const auto& q : config.questions) {
        ResponseSet set{q.id, {}};
        if (auto it = sampled.find(q.id); it != sampled.end()) {
            auto ordered = it->second;
            std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
                return a->sample.sample_index < b->sample.sample_index;
            });
            for (const auto* s : ordered) {
                if (s->sample.value) set.values.push_back(*s->sample.value);
            }
        }

        for (Strategy strategy : kStrategyOrder) {
            DerivedRow row;
            row.question_id = q.id;
            row.strategy = strategy;
            row.truth = q.ground_truth;
            if (strategy == Strategy::Greedy) {
                auto it = greedy.find(q.id);
                if (it != greedy.end() && it->second->sample.value) {
                    row.present = true;
                    row.estimate = *it->second->sample.value;
                    row.n_used = 1;
                }
            } else if (!set.values.empty()) {
                auto seed_it = config.tie_break_seeds.find(q.id);
                if (strategy == Strategy::SelfConsistencyMode &&
                    seed_it == config.tie_break_seeds.end()) {
                    throw ArchiveError("tie-break seed missing for question '" + q.id + "'");
                }
                Rng rng(strategy == Strategy::SelfConsistencyMode ? seed_it->second : 0);
                const Estimate est = aggregate(set, strategy, config.median_convention, rng);
                row.present = true;
                row.estimate = est.value;
                row.n_used = est.n_used;
                row.tie_broken = est.tie_broken;
            }
            if (row.present) row.epsilon = normalized_error(row.estimate, q.ground_truth);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

ArchiveWriter::ArchiveWriter(const std::string& dir, const RunConfig& config) : dir_(dir) {
    fs::create_directories(dir_);
    write_text_file((fs::path(dir_) / "run.json").string(), config.to_json().dump(2) + "\n");
    samples_path_ = (fs::path(dir_) / "samples.jsonl").string();
    std::ofstream out(samples_path_, std::ios::binary | std::ios::trunc);
    if (!out) throw ArchiveError("cannot create " + samples_path_);
}

void ArchiveWriter::append_sample(const ArchivedSample& sample) {
    const std::string key =
        sample.kind + "|" + sample.sample.question_id + "#" +
        std::to_string(sample.sample.sample_index);
    if (seen_.count(key)) {
        throw ArchiveError("duplicate sample for " + key);
    }
    seen_[key] = true;
    std::ofstream out(samples_path_, std::ios::binary | std::ios::app);
    if (!out) throw ArchiveError("cannot open " + samples_path_ + " for append");
    out << sample.to_json().dump() << '\n';
    out.flush();
    if (!out) throw ArchiveError("append failed for " + samples_path_);
}

void ArchiveWriter::write_derived(const std::vector<DerivedRow>& rows) {
    write_text_file((fs::path(dir_) / "derived.csv").string(), derived_to_csv(rows));
}

ArchiveData load_archive(const std::string& dir) {
    ArchiveData data;
    data.dir = dir;
    const fs::path base(dir);
    if (!fs::exists(base / "run.json")) {
        throw ArchiveError("not an archive directory (run.json missing): " + dir);
    }
    try {
        data.config = RunConfig::from_json(nlohmann::json::parse(
            read_text_file((base / "run.json").string())));
    } catch (const nlohmann::json::exception& e) {
        throw ArchiveError(std::string("corrupt run.json: ") + e.what());
    }

    const std::string samples_text = read_text_file((base / "samples.jsonl").string());
    const auto lines = split_lines(samples_text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (trim(line).empty()) continue;
        try {
            data.samples.push_back(ArchivedSample::from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            const bool is_tail = (i + 1 == lines.size());
            if (is_tail) {
                // Crash-interrupted append; every complete line is kept.
                ++data.recovered_truncated_lines;
                break;
            }
            throw ArchiveError("corrupt sample at line " + std::to_string(i + 1) + ": " +
                               e.what());
        }
    }

    if (fs::exists(base / "derived.csv")) {
        data.derived_csv = read_text_file((base / "derived.csv").string());
    }
    return data;
}

ReplayResult replay(const ArchiveData& data) {
    ReplayResult result;
    result.derived = compute_derived(data.config, data.samples);
    result.derived_csv = derived_to_csv(result.derived);
    if (!data.derived_csv.empty() && data.derived_csv != result.derived_csv) {
        result.matches_stored = false;
        const auto stored = split_lines(data.derived_csv);
        const auto fresh = split_lines(result.derived_csv);
        const std::size_t n = std::max(stored.size(), fresh.size());
        for (std::size_t i = 0; i < n; ++i) {
            const std::string a = i < stored.size() ? stored[i] : "<missing>";
            const std::string b = i < fresh.size() ? fresh[i] : "<missing>";
            if (a != b) {
                result.mismatches.push_back("line " + std::to_string(i + 1) + ": stored '" + a +
                                            "' != replayed '" + b + "'");
            }
        }
    }
    return result;
}

} // namespace woc
