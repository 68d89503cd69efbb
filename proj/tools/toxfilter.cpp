#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <toxfilter/attack.hpp>
#include <toxfilter/charmap.hpp>
#include <toxfilter/corpus.hpp>
#include <toxfilter/harness.hpp>
#include <toxfilter/match.hpp>
#include <toxfilter/pipeline.hpp>
#include <toxfilter/remote_scorer.hpp>
#include <toxfilter/report.hpp>
#include <toxfilter/scorer.hpp>
#include <toxfilter/vocabulary.hpp>

namespace {

using namespace toxfilter;

std::string read_input(const std::string& path) {
    if (path.empty() || path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    return detail::read_file(path);
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    detail::write_file(path, content);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() : eol + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

struct CommonInputs {
    std::string vocab_path;
    std::string table_path;

    ToxicVocabulary vocab() const {
        return vocab_path.empty() ? default_vocabulary()
                                  : load_vocabulary(detail::read_file(vocab_path));
    }
    HomoglyphTable table() const {
        return table_path.empty() ? experiment_table()
                                  : load_table(detail::read_file(table_path));
    }
};

void add_common(CLI::App* cmd, CommonInputs& common) {
    cmd->add_option("--vocab", common.vocab_path,
                    "Vocabulary TSV (term/negated/synonym/weight); bundled set when omitted");
    cmd->add_option("--table", common.table_path,
                    "Homoglyph table file; bundled table when omitted");
}

/// Runs a filter over plain text lines or over a JSONL variants stream.
std::string filter_stream(const std::string& input, bool jsonl,
                          const std::function<std::string(const std::string&)>& filter) {
    std::string out;
    if (jsonl) {
        auto variants = parse_variants_jsonl(input);
        for (Variant& v : variants) {
            v.text = filter(v.text);
            out += variant_to_json(v).dump();
            out += '\n';
        }
        return out;
    }
    for (const std::string& line : split_lines(input)) {
        out += filter(line);
        out += '\n';
    }
    return out;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Counter-attack toolkit for toxicity scorers: generates character-level and "
                 "polarity attacks, filters them back out, and measures score restoration"};
    app.require_subcommand(1);

    // gen-attacks
    auto* gen = app.add_subcommand("gen-attacks", "Generate attacked variants as JSONL");
    CommonInputs gen_common;
    std::string gen_corpus, gen_attack = "obfuscation", gen_out = "-";
    double gen_rate = 0.5;
    std::uint64_t gen_variants = 100, gen_seed = 1;
    EditSplit gen_split;
    gen->add_option("--corpus", gen_corpus, "Corpus TSV (id/topic/toxicity/text)")->required();
    add_common(gen, gen_common);
    gen->add_option("--attack", gen_attack, "obfuscation or polarity")
        ->check(CLI::IsMember({"obfuscation", "polarity"}));
    gen->add_option("--rate", gen_rate, "Per-character corruption probability")
        ->check(CLI::Range(0.0, 1.0));
    gen->add_option("--variants", gen_variants, "Variants per comment (obfuscation only)");
    gen->add_option("--seed", gen_seed, "Top-level RNG seed");
    gen->add_option("--split-homoglyph", gen_split.homoglyph, "Probability of homoglyph edits");
    gen->add_option("--split-segmentation", gen_split.segmentation,
                    "Probability of segmentator insertions");
    gen->add_option("--split-repetition", gen_split.repetition, "Probability of doubled characters");
    gen->add_option("--out", gen_out, "Output path, '-' for stdout");
    gen->callback([&] {
        auto corpus = load_corpus(detail::read_file(gen_corpus));
        auto vocab = gen_common.vocab();
        if (gen_attack == "polarity") {
            write_output(gen_out, to_jsonl(negate_dataset(corpus, vocab)));
            return;
        }
        AttackConfig cfg{gen_rate, gen_split, gen_seed};
        write_output(gen_out, to_jsonl(generate_dataset(corpus, vocab, gen_common.table(), cfg,
                                                        gen_variants)));
    });

    // deobfuscate
    auto* deob = app.add_subcommand("deobfuscate",
                                    "Fold homoglyph spellings back into plain vocabulary terms");
    CommonInputs deob_common;
    std::string deob_in = "-", deob_out = "-";
    double deob_sim = 0.8;
    bool deob_no_boundary = false, deob_jsonl = false;
    add_common(deob, deob_common);
    deob->add_option("--in", deob_in, "Input path, '-' for stdin (one text per line)");
    deob->add_option("--out", deob_out, "Output path, '-' for stdout");
    deob->add_option("--min-similarity", deob_sim, "Matching threshold")->check(CLI::Range(0.0, 1.0));
    deob->add_flag("--no-boundary-check", deob_no_boundary,
                   "Allow matches inside alphabetic words");
    deob->add_flag("--jsonl", deob_jsonl, "Treat input as a gen-attacks JSONL stream");
    deob->callback([&] {
        Matcher m(deob_common.vocab(), deob_common.table(), {deob_sim, !deob_no_boundary},
                  Matcher::Field::term);
        write_output(deob_out, filter_stream(read_input(deob_in), deob_jsonl,
                                             [&](const std::string& t) { return m.deobfuscate(t); }));
    });

    // neutralise
    auto* neut = app.add_subcommand("neutralise", "Remove or rewrite negated toxic predicates");
    CommonInputs neut_common;
    std::string neut_in = "-", neut_out = "-", neut_mode = "prune";
    double neut_sim = 0.8;
    bool neut_no_boundary = false, neut_jsonl = false;
    add_common(neut, neut_common);
    neut->add_option("--in", neut_in, "Input path, '-' for stdin (one text per line)");
    neut->add_option("--out", neut_out, "Output path, '-' for stdout");
    neut->add_option("--mode", neut_mode, "prune or synonym")
        ->check(CLI::IsMember({"prune", "synonym"}));
    neut->add_option("--min-similarity", neut_sim, "Matching threshold")->check(CLI::Range(0.0, 1.0));
    neut->add_flag("--no-boundary-check", neut_no_boundary, "Allow matches inside alphabetic words");
    neut->add_flag("--jsonl", neut_jsonl, "Treat input as a gen-attacks JSONL stream");
    neut->callback([&] {
        Matcher m(neut_common.vocab(), neut_common.table(), {neut_sim, !neut_no_boundary},
                  Matcher::Field::negated);
        NeutraliseMode mode = neutralise_mode_from_string(neut_mode);
        write_output(neut_out, filter_stream(read_input(neut_in), neut_jsonl,
                                             [&](const std::string& t) { return m.neutralise(t, mode); }));
    });

    // score
    auto* score = app.add_subcommand("score", "Score texts, one per line, printing one score per line");
    CommonInputs score_common;
    std::string score_in = "-", score_out = "-", score_backend = "local";
    RemoteScorerConfig score_remote;
    add_common(score, score_common);
    score->add_option("--in", score_in, "Input path, '-' for stdin");
    score->add_option("--out", score_out, "Output path, '-' for stdout");
    score->add_option("--scorer", score_backend, "local or remote")
        ->check(CLI::IsMember({"local", "remote"}));
    score->add_option("--endpoint", score_remote.endpoint, "Remote scoring endpoint URL");
    score->add_option("--timeout-ms", score_remote.timeout_ms, "Remote request timeout");
    score->add_option("--retries", score_remote.retries, "Retries after transport failures");
    score->add_option("--max-in-flight", score_remote.max_in_flight, "Concurrent request cap");
    score->add_option("--api-key-env", score_remote.api_key_env,
                      "Environment variable holding the API key");
    score->add_option("--api-key-header", score_remote.api_key_header, "Header the key is sent in");
    score->callback([&] {
        auto vocab = score_common.vocab();
        std::unique_ptr<Scorer> scorer;
        if (score_backend == "remote") {
            scorer = std::make_unique<RemoteScorer>(score_remote);
        } else {
            scorer = std::make_unique<LexiconScorer>(vocab);
        }
        std::string out;
        for (const std::string& line : split_lines(read_input(score_in))) {
            out += detail::format_fixed(scorer->score(line));
            out += '\n';
        }
        write_output(score_out, out);
    });

    // run-experiment
    auto* run = app.add_subcommand("run-experiment",
                                   "Attack the corpus, filter, score and write report files");
    std::string run_config;
    std::string run_output_override;
    std::uint64_t run_seed = 0, run_variants = 0;
    unsigned run_workers = 0;
    run->add_option("--config", run_config, "Experiment config JSON")->required();
    run->add_option("--output-dir", run_output_override, "Override the config output directory");
    run->add_option("--seed", run_seed, "Override the config seed");
    run->add_option("--variants", run_variants, "Override variants per comment");
    run->add_option("--workers", run_workers, "Override worker thread count");
    run->callback([&] {
        ExperimentConfig config = parse_experiment_config(detail::read_file(run_config));
        if (!run_output_override.empty()) config.output_dir = run_output_override;
        if (run->count("--seed")) config.seed = run_seed;
        if (run->count("--variants")) config.variants_per_comment = run_variants;
        if (run->count("--workers")) config.workers = run_workers;

        if (config.corpus_path.empty()) throw config_error("corpus_path is required");
        auto corpus = load_corpus(detail::read_file(config.corpus_path));
        ToxicVocabulary vocab = config.vocabulary_path.empty()
                                    ? default_vocabulary()
                                    : load_vocabulary(detail::read_file(config.vocabulary_path));
        HomoglyphTable table = config.table_path.empty()
                                   ? experiment_table()
                                   : load_table(detail::read_file(config.table_path));
        auto scorer = make_scorer(config, vocab);

        auto records = run_experiment(config, corpus, vocab, table, *scorer);
        auto cells = summarize(records, corpus, config.cutoffs);
        auto significance = drop_significance(records);
        emit_report(records, cells, significance, config.output_dir, config.report_format);

        for (const DatasetSignificance& s : significance) {
            std::size_t total = 0, excluded = 0;
            for (const CategorySummary& c : cells) {
                if (c.dataset != s.dataset) continue;
                total += c.total;
                excluded += c.excluded;
            }
            std::printf("%s: %zu records (%zu excluded), drop-restoration p = %s\n",
                        s.dataset.c_str(), total, excluded,
                        std::isnan(s.p_value) ? "n/a" : detail::format_fixed(s.p_value).c_str());
        }
        std::printf("report written to %s\n", config.output_dir.c_str());
    });

    // report
    auto* rep = app.add_subcommand("report", "Recompute summary artifacts from a records.csv");
    std::string rep_records, rep_out = "reports", rep_format = "json", rep_corpus;
    Cutoffs rep_cutoffs;
    rep->add_option("--records", rep_records, "records.csv from a previous run")->required();
    rep->add_option("--corpus", rep_corpus, "Corpus TSV, for corpus reference scores");
    rep->add_option("--out", rep_out, "Output directory");
    rep->add_option("--format", rep_format, "Summary format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    rep->add_option("--moderate", rep_cutoffs.moderate, "Moderate cutoff");
    rep->add_option("--stringent", rep_cutoffs.stringent, "Stringent cutoff");
    rep->callback([&] {
        auto records = parse_records_csv(detail::read_file(rep_records));
        std::vector<Comment> corpus;
        if (!rep_corpus.empty()) corpus = load_corpus(detail::read_file(rep_corpus));
        auto cells = summarize(records, corpus, rep_cutoffs);
        emit_report(records, cells, drop_significance(records), rep_out, rep_format);
        std::printf("report written to %s\n", rep_out.c_str());
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const toxfilter::remote_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
