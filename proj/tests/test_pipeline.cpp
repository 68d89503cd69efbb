#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include <toxfilter/attack.hpp>
#include <toxfilter/pipeline.hpp>
#include <toxfilter/scorer.hpp>
#include <toxfilter/vocabulary.hpp>

using namespace toxfilter;

namespace {

struct Fixture {
    ToxicVocabulary vocab = default_vocabulary();
    HomoglyphTable table = experiment_table();
    LexiconScorer scorer{vocab};
};

} // namespace

TEST_CASE("an empty pipeline scores the text as-is") {
    Fixture f;
    CounterAttackPipeline pipeline(f.vocab, f.table, {}, f.scorer);
    PipelineResult r = pipeline.run("you are all !d10ts");
    CHECK(r.normalized == "you are all !d10ts");
    CHECK(r.score == Catch::Approx(f.scorer.score("you are all !d10ts")));
    CHECK(r.timings.neutralise_ms == 0.0);
    CHECK(r.timings.deobfuscate_ms == 0.0);
    CHECK(r.timings.score_ms >= 0.0);
}

TEST_CASE("deobfuscation restores the score of an obfuscated comment") {
    Fixture f;
    PipelineConfig cfg;
    cfg.deobfuscate = true;
    CounterAttackPipeline pipeline(f.vocab, f.table, cfg, f.scorer);

    PipelineResult r = pipeline.run("If they voted for Hilary they are i;;d-I0t_5");
    CHECK(r.normalized == "If they voted for Hilary they are idiots");
    CHECK(r.score == Catch::Approx(logistic(3.0)));
    CHECK(r.timings.deobfuscate_ms > 0.0);
}

TEST_CASE("neutralise-prune floors the score of a negated comment") {
    Fixture f;
    PipelineConfig cfg;
    cfg.neutralise = true;
    CounterAttackPipeline pipeline(f.vocab, f.table, cfg, f.scorer);

    PipelineResult r = pipeline.run("If they voted for Hilary they are not idiots");
    CHECK(r.normalized == "If they voted for Hilary they are");
    CHECK(r.score == Catch::Approx(logistic(-3.0)));
}

TEST_CASE("synonym mode keeps the sentence readable and non-toxic") {
    Fixture f;
    PipelineConfig cfg;
    cfg.neutralise = true;
    cfg.neutralise_mode = NeutraliseMode::synonym;
    CounterAttackPipeline pipeline(f.vocab, f.table, cfg, f.scorer);

    PipelineResult r = pipeline.run("They are not stupid and not ignorant with no class");
    CHECK(r.normalized == "They are sensible and informed with no class");
    CHECK(r.score == Catch::Approx(logistic(-3.0)));
}

TEST_CASE("the full two-stage pipeline handles either attack") {
    Fixture f;
    PipelineConfig cfg;
    cfg.neutralise = true;
    cfg.deobfuscate = true;
    CounterAttackPipeline pipeline(f.vocab, f.table, cfg, f.scorer);

    // polarity-attacked input: neutralise removes the negated predicate
    PipelineResult neg = pipeline.run("They have their heads not up their ass.");
    CHECK(neg.normalized == "They have their heads.");
    CHECK(neg.score == Catch::Approx(logistic(-3.0)));

    // obfuscated input: neutralise finds nothing, deobfuscation restores
    PipelineResult obf = pipeline.run("They have their heads up their a**$s");
    CHECK(obf.normalized == "They have their heads up their ass");
    CHECK(obf.score == Catch::Approx(logistic(3.0)));
}

TEST_CASE("stage order does not matter for generated attacks") {
    Fixture f;
    PipelineConfig both;
    both.neutralise = true;
    both.deobfuscate = true;
    CounterAttackPipeline combined(f.vocab, f.table, both, f.scorer);

    PipelineConfig deob_only;
    deob_only.deobfuscate = true;
    CounterAttackPipeline deob(f.vocab, f.table, deob_only, f.scorer);

    PipelineConfig neut_only;
    neut_only.neutralise = true;
    CounterAttackPipeline neut(f.vocab, f.table, neut_only, f.scorer);

    std::vector<Comment> corpus = {
        {"a", "t", "If they voted for Hilary they are idiots", 0.9},
        {"b", "t", "They are stupid and ignorant with no class", 0.9},
        {"c", "t", "It is a shame. Screw you.", 0.7},
    };
    AttackConfig acfg;
    acfg.corruption_rate = 0.99;
    acfg.seed = 17;

    for (const Variant& v : generate_dataset(corpus, f.vocab, f.table, acfg, 25)) {
        // obfuscated text: neutralise-then-deobfuscate equals deobfuscate alone
        CHECK(combined.run(v.text).normalized == deob.run(v.text).normalized);
    }
    for (const Comment& c : corpus) {
        Variant v = negate_comment(c, f.vocab);
        // negated text: the combined pipeline equals neutralise alone
        CHECK(combined.run(v.text).normalized == neut.run(v.text).normalized);
    }
}

TEST_CASE("pipeline timings accumulate per enabled stage") {
    Fixture f;
    PipelineConfig cfg;
    cfg.neutralise = true;
    cfg.deobfuscate = true;
    CounterAttackPipeline pipeline(f.vocab, f.table, cfg, f.scorer);
    PipelineResult r = pipeline.run("They are s7uuupi-d,, and 1g,Nooooora,n~t with no class");
    CHECK(r.timings.neutralise_ms > 0.0);
    CHECK(r.timings.deobfuscate_ms > 0.0);
    CHECK(r.timings.score_ms > 0.0);
    CHECK(r.timings.filter_ms() ==
          Catch::Approx(r.timings.neutralise_ms + r.timings.deobfuscate_ms));
    CHECK(r.timings.total_ms() == Catch::Approx(r.timings.filter_ms() + r.timings.score_ms));
}
