#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>

#include "attack.hpp"
#include "charmap.hpp"
#include "match.hpp"
#include "remote_scorer.hpp"
#include "scorer.hpp"
#include "vocabulary.hpp"

namespace toxfilter {

/// Which filter stages run before scoring.  The neutralise stage always runs
/// before deobfuscation when both are enabled: polarity rewrites operate on
/// readable text and must see the negated predicates before they are folded
/// back into plain toxic terms.
struct PipelineConfig {
    bool neutralise = false;
    NeutraliseMode neutralise_mode = NeutraliseMode::prune;
    bool deobfuscate = false;
    MatchParams match{};
};

struct StageTimings {
    double neutralise_ms = 0.0;
    double deobfuscate_ms = 0.0;
    double score_ms = 0.0;

    double filter_ms() const noexcept { return neutralise_ms + deobfuscate_ms; }
    double total_ms() const noexcept { return filter_ms() + score_ms; }
};

struct PipelineResult {
    std::string normalized;
    double score = 0.0;
    StageTimings timings;
};

/// One scored variant, produced by the experiment harness: the raw score of
/// the attacked text next to the score after counter-attack filtering, and
/// the reference score of the unattacked parent comment.
struct ScoreRecord {
    std::string dataset;
    std::string parent_id;
    std::uint64_t variant_index = 0;
    AttackKind attack_kind = AttackKind::obfuscation;
    double reference = 0.0;
    double raw_score = 0.0;
    double filtered_score = 0.0;
    bool error = false;
    std::string error_detail;
    double raw_ms = 0.0;
    double filtered_ms = 0.0;
};

/// Ties the filters and a scorer together.  Stateless after construction and
/// safe to call from several threads when the scorer is.
class CounterAttackPipeline {
public:
    CounterAttackPipeline(const ToxicVocabulary& vocab, const HomoglyphTable& table,
                          PipelineConfig config, const Scorer& scorer)
        : config_(config), scorer_(scorer) {
        if (config_.neutralise)
            neutraliser_.emplace(vocab, table, config_.match, Matcher::Field::negated);
        if (config_.deobfuscate)
            deobfuscator_.emplace(vocab, table, config_.match, Matcher::Field::term);
    }

    PipelineResult run(const std::string& text) const {
        using clock = std::chrono::steady_clock;
        PipelineResult result;
        std::string current = text;
        if (neutraliser_) {
            auto t0 = clock::now();
            current = neutraliser_->neutralise(current, config_.neutralise_mode);
            result.timings.neutralise_ms = elapsed_ms(t0);
        }
        if (deobfuscator_) {
            auto t0 = clock::now();
            current = deobfuscator_->deobfuscate(current);
            result.timings.deobfuscate_ms = elapsed_ms(t0);
        }
        auto t0 = clock::now();
        try {
            result.score = scorer_.score(current);
        } catch (remote_error& e) {
            e.set_stage("score");
            throw;
        }
        result.timings.score_ms = elapsed_ms(t0);
        result.normalized = std::move(current);
        return result;
    }

    const PipelineConfig& config() const noexcept { return config_; }

private:
    static double elapsed_ms(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }

    PipelineConfig config_;
    const Scorer& scorer_;
    std::optional<Matcher> neutraliser_;
    std::optional<Matcher> deobfuscator_;
};

} // namespace toxfilter
