#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include <toxfilter/attack.hpp>
#include <toxfilter/charmap.hpp>
#include <toxfilter/match.hpp>
#include <toxfilter/rng.hpp>
#include <toxfilter/vocabulary.hpp>

#include "oracles.hpp"

using namespace toxfilter;

TEST_CASE("alignment cost on hand-checked examples") {
    HomoglyphTable t = default_table();
    CHECK(alignment_cost("idiots", "idiots", t) == 0);
    CHECK(alignment_cost("!d10ts", "idiots", t) == 0);
    CHECK(alignment_cost("i;;d-I0t_5", "idiots", t) == 0);
    CHECK(alignment_cost("st.VPId", "stupid", t) == 0);
    CHECK(alignment_cost("ignor@Nt", "ignorant", t) == 0);
    CHECK(alignment_cost("AS5", "ass", t) == 0);
    CHECK(alignment_cost("a**$s", "ass", t) == 0);
    CHECK(alignment_cost("idiot", "idiots", t) == 1);    // one insertion
    CHECK(alignment_cost("idiotts", "idiots", t) == 0);  // repetition collapses
    CHECK(alignment_cost("idixts", "idiots", t) == 1);   // incompatible substitution
    CHECK(alignment_cost("xyz", "ass", t) == 3);
    CHECK(alignment_cost("", "ass", t) == 3);
    CHECK(alignment_cost("...", "ass", t) == 3);         // three deletions still miss the letters
}

TEST_CASE("alignment cost handles multi-word patterns and segmentator runs") {
    HomoglyphTable t = default_table();
    CHECK(alignment_cost("screw you", "screw you", t) == 0);
    CHECK(alignment_cost("s(r3w; &0u", "screw you", t) == 0);
    CHECK(alignment_cost("screw-_-you", "screw you", t) == 0);
    CHECK(alignment_cost("screwyou", "screw you", t) == 1); // missing separator
    CHECK(alignment_cost("up7heir@ss", "up their ass", t) == 2);
}

TEST_CASE("comma collapses only under the experiment table") {
    CHECK(alignment_cost("s7uuupi-d,,", "stupid", experiment_table()) == 0);
    CHECK(alignment_cost("s7uuupi-d,,", "stupid", default_table()) == 2);
    CHECK(alignment_cost("1g,Nooooora,n~t", "ignorant", experiment_table()) == 1);
}

TEST_CASE("alignment agrees with the exhaustive oracle on random spans") {
    HomoglyphTable t = experiment_table();
    ToxicVocabulary vocab = default_vocabulary();
    SplitMix64 rng(4242);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyz .,;-*'4301!@$+~";
    for (int trial = 0; trial < 300; ++trial) {
        const std::string& term =
            vocab.entries[rng.below(static_cast<std::uint32_t>(vocab.entries.size()))].term;
        std::string span;
        std::size_t len = rng.below(13);
        for (std::size_t i = 0; i < len; ++i)
            span.push_back(alphabet[rng.below(static_cast<std::uint32_t>(alphabet.size()))]);
        INFO("term '" << term << "' vs span '" << span << "'");
        CHECK(alignment_cost(span, term, t) == oracles::alignment_cost(span, term, t));
    }
}

TEST_CASE("find_matches locates obfuscated spans from worked examples") {
    HomoglyphTable t = default_table();
    ToxicVocabulary vocab = default_vocabulary();
    MatchParams params;

    auto spans = find_matches("If they voted for Hilary they are !d10ts", vocab, t, params);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].start == 34);
    CHECK(spans[0].end == 40);
    CHECK(spans[0].pattern == "idiots");
    CHECK(spans[0].cost == 0);

    spans = find_matches("They are st.VPId and ignor@Nt with no class", vocab, t, params);
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].pattern == "stupid");
    CHECK(spans[1].pattern == "ignorant");
}

TEST_CASE("word fragments do not match inside larger words") {
    HomoglyphTable t = default_table();
    ToxicVocabulary vocab =
        load_vocabulary("term\tnegated\tsynonym\tweight\n"
                        "stupid\tnot stupid\tsensible\t6\n"
                        "ignorant\tnot ignorant\tinformed\t6\n"
                        "ass\tnot ass\that\t6\n");
    auto spans = find_matches("They are stupid and ignorant with no class", vocab, t, {});
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].pattern == "stupid");
    CHECK(spans[1].pattern == "ignorant");

    // with the boundary check off, "ass" inside "class" becomes fair game
    MatchParams loose;
    loose.boundary_check = false;
    spans = find_matches("no class", vocab, t, loose);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].pattern == "ass");
}

TEST_CASE("deobfuscate restores worked attack examples verbatim") {
    HomoglyphTable t = experiment_table();
    ToxicVocabulary vocab = default_vocabulary();

    CHECK(deobfuscate("If they voted for Hilary they are !d10ts", vocab, t) ==
          "If they voted for Hilary they are idiots");
    CHECK(deobfuscate("If they voted for Hilary they are i;;d-I0t_5", vocab, t) ==
          "If they voted for Hilary they are idiots");
    CHECK(deobfuscate("They are st.VPId and ignor@Nt with no class", vocab, t) ==
          "They are stupid and ignorant with no class");
    CHECK(deobfuscate("They are s7uuupi-d,, and 1g,Nooooora,n~t with no class", vocab, t) ==
          "They are stupid,, and ignorant with no class");
    CHECK(deobfuscate("They have their heads up their AS5", vocab, t) ==
          "They have their heads up their ass");
    CHECK(deobfuscate("They have their heads up their a**$s", vocab, t) ==
          "They have their heads up their ass");
}

TEST_CASE("deobfuscate leaves unobfuscated text alone apart from case folding") {
    HomoglyphTable t = experiment_table();
    ToxicVocabulary vocab = default_vocabulary();
    CHECK(deobfuscate("a perfectly nice remark", vocab, t) == "a perfectly nice remark");
    CHECK(deobfuscate("", vocab, t) == "");
    // a verbatim term is "restored" to itself
    CHECK(deobfuscate("you are all idiots", vocab, t) == "you are all idiots");
}

TEST_CASE("deobfuscate is idempotent") {
    HomoglyphTable t = experiment_table();
    ToxicVocabulary vocab = default_vocabulary();
    std::vector<Comment> corpus = {{"a", "t", "If they voted for Hilary they are idiots", 0.9},
                                   {"b", "t", "Screw you trump supporters", 0.8},
                                   {"c", "t", "They have their heads up their ass.", 0.9}};
    AttackConfig cfg;
    cfg.corruption_rate = 0.99;
    cfg.seed = 11;
    for (const Variant& v : generate_dataset(corpus, vocab, t, cfg, 40)) {
        std::string once = deobfuscate(v.text, vocab, t);
        std::string twice = deobfuscate(once, vocab, t);
        INFO("variant '" << v.text << "'");
        CHECK(once == twice);
    }
}

TEST_CASE("bytes outside matched spans survive deobfuscation untouched") {
    HomoglyphTable t = experiment_table();
    ToxicVocabulary vocab = default_vocabulary();
    Matcher m(vocab, t, {});
    std::vector<Comment> corpus = {{"a", "t", "Good job voting for a racist, sexist guy.", 0.7},
                                   {"b", "t", "It was awful. People are stupid.", 0.9}};
    AttackConfig cfg;
    cfg.corruption_rate = 0.8;
    cfg.seed = 31337;
    for (const Variant& v : generate_dataset(corpus, vocab, t, cfg, 50)) {
        auto spans = m.find_matches(v.text);
        std::string out = m.deobfuscate(v.text);
        // rebuild the expected string from the span complement
        std::string expected;
        std::size_t pos = 0;
        for (const MatchSpan& s : spans) {
            expected += v.text.substr(pos, s.start - pos);
            expected += vocab.entries[s.entry_index].term;
            pos = s.end;
        }
        expected += v.text.substr(pos);
        CHECK(out == expected);
    }
}

TEST_CASE("find_matches agrees with the exhaustive oracle on generated attacks") {
    HomoglyphTable t = experiment_table();
    ToxicVocabulary vocab = default_vocabulary();
    Matcher m(vocab, t, {});
    std::vector<Comment> corpus = {{"a", "t", "They are stupid and ignorant with no class", 0.9},
                                   {"b", "t", "you morons", 0.9},
                                   {"c", "t", "It is a shame. Screw you.", 0.7}};
    AttackConfig cfg;
    cfg.corruption_rate = 0.99;
    cfg.seed = 5;
    for (const Variant& v : generate_dataset(corpus, vocab, t, cfg, 15)) {
        auto got = m.find_matches(v.text);
        auto expected = oracles::find_spans(v.text, vocab, t, {});
        INFO("variant '" << v.text << "'");
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].start == expected[i].start);
            CHECK(got[i].end == expected[i].end);
            CHECK(got[i].entry_index == expected[i].entry_index);
            CHECK(got[i].cost == expected[i].cost);
        }
    }
}

TEST_CASE("neutralise prunes negated predicates and tidies whitespace") {
    HomoglyphTable t = experiment_table();
    ToxicVocabulary vocab = default_vocabulary();

    CHECK(neutralise("If they voted for Hilary they are NOT idiots", vocab, t,
                     NeutraliseMode::prune) == "If they voted for Hilary they are");
    CHECK(neutralise("They are NOT stupid and NOT ignorant with no class", vocab, t,
                     NeutraliseMode::prune) == "They are and with no class");
    CHECK(neutralise("They have their heads NOT up their ass.", vocab, t,
                     NeutraliseMode::prune) == "They have their heads.");
    // lowercase canonical forms from the polarity attack itself
    CHECK(neutralise("not idiots are welcome", vocab, t, NeutraliseMode::prune) == "are welcome");
}

TEST_CASE("neutralise synonym mode swaps predicates for mild language") {
    HomoglyphTable t = experiment_table();
    ToxicVocabulary vocab = default_vocabulary();
    CHECK(neutralise("If they voted for Hilary they are NOT idiots", vocab, t,
                     NeutraliseMode::synonym) == "If they voted for Hilary they are clever");
    CHECK(neutralise("They are NOT stupid and NOT ignorant with no class", vocab, t,
                     NeutraliseMode::synonym) == "They are sensible and informed with no class");
}

TEST_CASE("neutralise leaves text without negated predicates untouched") {
    HomoglyphTable t = experiment_table();
    ToxicVocabulary vocab = default_vocabulary();
    const std::string benign = "not accepting facts. susceptible to lies.";
    CHECK(neutralise(benign, vocab, t, NeutraliseMode::prune) == benign);
    CHECK(neutralise("you are all idiots", vocab, t, NeutraliseMode::prune) ==
          "you are all idiots");
}

TEST_CASE("neutralise synonym mode demands synonyms") {
    HomoglyphTable t = default_table();
    ToxicVocabulary vocab = load_vocabulary("term\tnegated\tsynonym\tweight\nfoo\tnot foo\t\t6\n");
    CHECK_THROWS_AS(neutralise("this is not foo", vocab, t, NeutraliseMode::synonym), config_error);
    CHECK(neutralise("this is not foo", vocab, t, NeutraliseMode::prune) == "this is");
}

TEST_CASE("building a negated-field matcher without negated forms fails") {
    HomoglyphTable t = default_table();
    ToxicVocabulary vocab = load_vocabulary("term\tnegated\tsynonym\tweight\nfoo\t\t\t6\n");
    CHECK_THROWS_AS(Matcher(vocab, t, {}, Matcher::Field::negated), config_error);
}

TEST_CASE("min_similarity one demands exact-compatible spans") {
    HomoglyphTable t = default_table();
    ToxicVocabulary vocab = default_vocabulary();
    MatchParams strict;
    strict.min_similarity = 1.0;
    // zero-budget still admits zero-cost homoglyph spellings
    CHECK(deobfuscate("!d10ts everywhere", vocab, t, strict) == "idiots everywhere");
    // ...but no costly deviation
    CHECK(deobfuscate("idixts everywhere", vocab, t, strict) == "idixts everywhere");
    CHECK(deobfuscate("idixts everywhere", vocab, t, {}) == "idiots everywhere");
}

TEST_CASE("longer vocabulary entries win overlapping matches") {
    HomoglyphTable t = experiment_table();
    ToxicVocabulary vocab = default_vocabulary();
    auto spans = find_matches("heads up 7#eir a$$ down", vocab, t, {});
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].pattern == "up their ass");
}

TEST_CASE("invalid match parameters are rejected") {
    HomoglyphTable t = default_table();
    ToxicVocabulary vocab = default_vocabulary();
    MatchParams bad;
    bad.min_similarity = 1.5;
    CHECK_THROWS_AS(Matcher(vocab, t, bad), config_error);
    CHECK_THROWS_AS(alignment_cost("x", "...", t), input_error); // pattern without letters
}
