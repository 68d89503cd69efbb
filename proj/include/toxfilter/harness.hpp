#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "attack.hpp"
#include "corpus.hpp"
#include "errors.hpp"
#include "pipeline.hpp"
#include "remote_scorer.hpp"
#include "rng.hpp"
#include "scorer.hpp"
#include "stats.hpp"
#include "vocabulary.hpp"

namespace toxfilter {

struct Cutoffs {
    double moderate = 0.5;
    double stringent = 0.75;
};

/// Everything a reproducible experiment run needs.  Empty paths select the
/// bundled defaults (default_vocabulary / experiment_table); the corpus has
/// no builtin fallback and must be given.
struct ExperimentConfig {
    std::string corpus_path;
    std::string vocabulary_path;
    std::string table_path;
    std::uint64_t variants_per_comment = 1000;
    std::vector<double> corruption_rates{0.5, 0.99};
    std::vector<std::string> attacks{"obfuscation", "polarity"};
    std::uint64_t seed = 1;
    EditSplit edit_split{};
    double min_similarity = 0.8;
    std::string neutralise_mode = "prune";
    std::string scorer = "local";
    RemoteScorerConfig remote;
    Cutoffs cutoffs;
    std::string output_dir = "reports";
    std::string report_format = "json";
    unsigned workers = 0;
    // Stage timings per record are the median over this many repeated runs.
    // Scores are deterministic, so repeats only steady the timing estimate;
    // raise it when single-run timings would be at the mercy of scheduler
    // noise (sub-microsecond scorers, datasets with one record per cell).
    unsigned timing_repeats = 1;
};

/// Aggregated statistics for one (dataset, parent comment) cell.
struct CategorySummary {
    std::string dataset;
    std::string parent_id;
    std::size_t total = 0;
    std::size_t excluded = 0;
    double reference = 0.0;
    double corpus_reference = 0.0;
    double raw_mean = 0.0;
    double raw_std = 0.0;
    double filtered_mean = 0.0;
    double filtered_std = 0.0;
    std::size_t raw_ge_reference = 0;
    std::size_t filtered_ge_reference = 0;
    std::size_t raw_below_moderate = 0;
    std::size_t raw_below_stringent = 0;
    std::size_t filtered_below_moderate = 0;
    std::size_t filtered_below_stringent = 0;
    double raw_time_mean_ms = 0.0;
    double raw_time_median_ms = 0.0;
    double filtered_time_mean_ms = 0.0;
    double filtered_time_median_ms = 0.0;
    double median_time_ratio = 0.0;
};

struct DatasetSignificance {
    std::string dataset;
    double p_value = 1.0;
};

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw input_error("write to '" + path + "' failed");
}

inline std::string dataset_label(double rate) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "obfuscation-%d", static_cast<int>(std::lround(rate * 100.0)));
    return buf;
}

inline std::string format_fixed(double v) {
    if (std::isnan(v)) return "";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += "\"\"";
        else q.push_back(c);
    }
    q += '"';
    return q;
}

} // namespace detail

/// Parses the experiment config JSON.  Unknown keys are rejected so typos
/// surface instead of silently falling back to defaults.
inline ExperimentConfig parse_experiment_config(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw parse_error("config is not a JSON object");
    ExperimentConfig c;
    auto get = [&](const char* key, auto& out) {
        if (j.contains(key)) out = j[key].get<std::decay_t<decltype(out)>>();
    };
    static const char* known[] = {"corpus_path", "vocabulary_path", "table_path",
                                  "variants_per_comment", "corruption_rates", "attacks",
                                  "seed", "edit_split", "min_similarity", "neutralise_mode",
                                  "scorer", "remote", "cutoffs", "output_dir",
                                  "report_format", "workers", "timing_repeats"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw config_error("unknown config key '" + it.key() + "'");
    }
    try {
        get("corpus_path", c.corpus_path);
        get("vocabulary_path", c.vocabulary_path);
        get("table_path", c.table_path);
        get("variants_per_comment", c.variants_per_comment);
        get("corruption_rates", c.corruption_rates);
        get("attacks", c.attacks);
        get("seed", c.seed);
        if (j.contains("edit_split")) {
            const auto& s = j["edit_split"];
            c.edit_split.homoglyph = s.value("homoglyph", c.edit_split.homoglyph);
            c.edit_split.segmentation = s.value("segmentation", c.edit_split.segmentation);
            c.edit_split.repetition = s.value("repetition", c.edit_split.repetition);
        }
        get("min_similarity", c.min_similarity);
        get("neutralise_mode", c.neutralise_mode);
        get("scorer", c.scorer);
        if (j.contains("remote")) {
            const auto& r = j["remote"];
            c.remote.endpoint = r.value("endpoint", c.remote.endpoint);
            c.remote.api_key_env = r.value("api_key_env", c.remote.api_key_env);
            c.remote.api_key_header = r.value("api_key_header", c.remote.api_key_header);
            c.remote.timeout_ms = r.value("timeout_ms", c.remote.timeout_ms);
            c.remote.retries = r.value("retries", c.remote.retries);
            c.remote.max_in_flight = r.value("max_in_flight", c.remote.max_in_flight);
        }
        if (j.contains("cutoffs")) {
            const auto& k = j["cutoffs"];
            c.cutoffs.moderate = k.value("moderate", c.cutoffs.moderate);
            c.cutoffs.stringent = k.value("stringent", c.cutoffs.stringent);
        }
        get("output_dir", c.output_dir);
        get("report_format", c.report_format);
        get("workers", c.workers);
        get("timing_repeats", c.timing_repeats);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("bad config value: ") + e.what());
    }

    if (c.variants_per_comment < 1) throw config_error("variants_per_comment must be at least 1");
    for (double r : c.corruption_rates) {
        if (!(r >= 0.0 && r <= 1.0)) throw config_error("corruption rates must lie in [0, 1]");
    }
    if (c.attacks.empty()) throw config_error("attacks list is empty");
    for (const std::string& a : c.attacks) attack_kind_from_string(a);
    if (!(c.min_similarity >= 0.0 && c.min_similarity <= 1.0))
        throw config_error("min_similarity must lie in [0, 1]");
    neutralise_mode_from_string(c.neutralise_mode);
    if (c.scorer != "local" && c.scorer != "remote")
        throw config_error("scorer must be 'local' or 'remote'");
    if (c.report_format != "json" && c.report_format != "csv")
        throw config_error("report_format must be 'json' or 'csv'");
    if (c.timing_repeats < 1) throw config_error("timing_repeats must be at least 1");
    detail::validate_split(c.edit_split);
    return c;
}

inline std::string serialize_experiment_config(const ExperimentConfig& c) {
    nlohmann::ordered_json j{
        {"corpus_path", c.corpus_path},
        {"vocabulary_path", c.vocabulary_path},
        {"table_path", c.table_path},
        {"variants_per_comment", c.variants_per_comment},
        {"corruption_rates", c.corruption_rates},
        {"attacks", c.attacks},
        {"seed", c.seed},
        {"edit_split",
         {{"homoglyph", c.edit_split.homoglyph},
          {"segmentation", c.edit_split.segmentation},
          {"repetition", c.edit_split.repetition}}},
        {"min_similarity", c.min_similarity},
        {"neutralise_mode", c.neutralise_mode},
        {"scorer", c.scorer},
        {"remote",
         {{"endpoint", c.remote.endpoint},
          {"api_key_env", c.remote.api_key_env},
          {"api_key_header", c.remote.api_key_header},
          {"timeout_ms", c.remote.timeout_ms},
          {"retries", c.remote.retries},
          {"max_in_flight", c.remote.max_in_flight}}},
        {"cutoffs", {{"moderate", c.cutoffs.moderate}, {"stringent", c.cutoffs.stringent}}},
        {"output_dir", c.output_dir},
        {"report_format", c.report_format},
        {"workers", c.workers},
        {"timing_repeats", c.timing_repeats}};
    return j.dump(2) + "\n";
}

inline std::unique_ptr<Scorer> make_scorer(const ExperimentConfig& config,
                                           const ToxicVocabulary& vocab) {
    if (config.scorer == "remote") return std::make_unique<RemoteScorer>(config.remote);
    return std::make_unique<LexiconScorer>(vocab);
}

/// Runs the full attack / filter / score study.  Record content depends only
/// on the config and inputs, never on worker count or scheduling; the timing
/// fields are the one exception and are kept out of the deterministic report
/// files for that reason.
inline std::vector<ScoreRecord> run_experiment(const ExperimentConfig& config,
                                               const std::vector<Comment>& corpus,
                                               const ToxicVocabulary& vocab,
                                               const HomoglyphTable& table,
                                               const Scorer& scorer) {
    std::vector<double> reference(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) reference[i] = scorer.score(corpus[i].text);

    struct Job {
        std::string dataset;
        const Comment* parent;
        double reference;
        Variant variant;
        const CounterAttackPipeline* pipeline;
    };

    PipelineConfig deobf_cfg;
    deobf_cfg.deobfuscate = true;
    deobf_cfg.match.min_similarity = config.min_similarity;
    CounterAttackPipeline deobf_pipeline(vocab, table, deobf_cfg, scorer);

    PipelineConfig neutral_cfg;
    neutral_cfg.neutralise = true;
    neutral_cfg.neutralise_mode = neutralise_mode_from_string(config.neutralise_mode);
    neutral_cfg.match.min_similarity = config.min_similarity;
    CounterAttackPipeline neutral_pipeline(vocab, table, neutral_cfg, scorer);

    std::vector<Job> jobs;
    for (const std::string& attack : config.attacks) {
        if (attack_kind_from_string(attack) == AttackKind::obfuscation) {
            for (double rate : config.corruption_rates) {
                std::string label = detail::dataset_label(rate);
                AttackConfig acfg;
                acfg.corruption_rate = rate;
                acfg.split = config.edit_split;
                // Decorrelate the datasets: each corruption rate draws from
                // its own stream family.
                acfg.seed = config.seed ^ fnv1a64(label);
                for (std::size_t ci = 0; ci < corpus.size(); ++ci) {
                    for (std::uint64_t v = 0; v < config.variants_per_comment; ++v) {
                        jobs.push_back({label, &corpus[ci], reference[ci],
                                        obfuscate_comment(corpus[ci], vocab, table, acfg, v),
                                        &deobf_pipeline});
                    }
                }
            }
        } else {
            for (std::size_t ci = 0; ci < corpus.size(); ++ci) {
                jobs.push_back({"polarity", &corpus[ci], reference[ci],
                                negate_comment(corpus[ci], vocab), &neutral_pipeline});
            }
        }
    }

    std::vector<ScoreRecord> records(jobs.size());
    std::exception_ptr failure;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};

    // Exercise each stage right before the timed loop: first-call costs
    // (lazy allocations, cold code and data paths, including eviction by the
    // job construction above) would otherwise land entirely on whichever
    // record a pipeline happens to see first, which matters for the polarity
    // dataset where every comment contributes a single timing sample.  The
    // text must actually produce matches or the match machinery stays cold.
    // Warm-up results are discarded and failures deferred to the per-record
    // error handling below.
    for (int warm = 0; warm < 3; ++warm) {
        try {
            (void)deobf_pipeline.run("warm up: 5tup!d, not stupid; d0n't");
            (void)neutral_pipeline.run("warm up: 5tup!d, not stupid; d0n't");
        } catch (...) {
            break;
        }
    }

    auto worker = [&]() {
        using clock = std::chrono::steady_clock;
        while (!failed.load(std::memory_order_relaxed)) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            ScoreRecord& rec = records[i];
            rec.dataset = job.dataset;
            rec.parent_id = job.variant.parent_id;
            rec.variant_index = job.variant.variant_index;
            rec.attack_kind = job.variant.attack_kind;
            rec.reference = job.reference;
            try {
                // Scores are deterministic, so repeats differ only in their
                // timings; the median damps scheduler noise on the per-stage
                // microsecond measurements.
                std::vector<double> raw_samples, filtered_samples;
                raw_samples.reserve(config.timing_repeats);
                filtered_samples.reserve(config.timing_repeats);
                for (unsigned rep = 0; rep < config.timing_repeats; ++rep) {
                    auto t0 = clock::now();
                    double raw = scorer.score(job.variant.text);
                    raw_samples.push_back(
                        std::chrono::duration<double, std::milli>(clock::now() - t0)
                            .count());
                    auto result = job.pipeline->run(job.variant.text);
                    filtered_samples.push_back(result.timings.total_ms());
                    if (rep == 0) {
                        rec.raw_score = raw;
                        rec.filtered_score = result.score;
                    }
                }
                rec.raw_ms = median(raw_samples);
                rec.filtered_ms = median(filtered_samples);
            } catch (const remote_error& e) {
                rec.error = true;
                std::string stage = e.stage().empty() ? "raw" : e.stage();
                rec.error_detail = stage + ": " + std::string(to_string(e.kind())) +
                                   (e.status() ? " " + std::to_string(e.status()) : "");
                rec.raw_score = rec.filtered_score = std::nan("");
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };

    unsigned n_workers = config.workers;
    if (n_workers == 0) {
        unsigned hw = std::thread::hardware_concurrency();
        n_workers = hw == 0 ? 1 : std::min(hw, 8u);
    }
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failed.load() && failure) std::rethrow_exception(failure);
    return records;
}

/// Loads all inputs named by the config, builds the scorer and runs.
inline std::vector<ScoreRecord> run_experiment(const ExperimentConfig& config) {
    if (config.corpus_path.empty()) throw config_error("corpus_path is required");
    auto corpus = load_corpus(detail::read_file(config.corpus_path));
    ToxicVocabulary vocab = config.vocabulary_path.empty()
                                ? default_vocabulary()
                                : load_vocabulary(detail::read_file(config.vocabulary_path));
    HomoglyphTable table = config.table_path.empty()
                               ? experiment_table()
                               : load_table(detail::read_file(config.table_path));
    auto scorer = make_scorer(config, vocab);
    return run_experiment(config, corpus, vocab, table, *scorer);
}

} // namespace toxfilter
