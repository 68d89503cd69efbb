#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "charmap.hpp"
#include "corpus.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "vocabulary.hpp"

namespace toxfilter {

enum class AttackKind { obfuscation, polarity };

inline std::string_view to_string(AttackKind k) noexcept {
    return k == AttackKind::obfuscation ? "obfuscation" : "polarity";
}

inline AttackKind attack_kind_from_string(std::string_view s) {
    if (s == "obfuscation") return AttackKind::obfuscation;
    if (s == "polarity") return AttackKind::polarity;
    throw input_error("unknown attack kind '" + std::string(s) + "'");
}

/// One attacked rendition of a corpus comment.
struct Variant {
    std::string parent_id;
    std::uint64_t variant_index = 0;
    AttackKind attack_kind = AttackKind::obfuscation;
    std::string text;
};

/// Probability split across the three character edits.  Must sum to one.
struct EditSplit {
    double homoglyph = 0.6;
    double segmentation = 0.3;
    double repetition = 0.1;
};

struct AttackConfig {
    double corruption_rate = 0.5;
    EditSplit split{};
    std::uint64_t seed = 1;
};

/// A vocabulary term found verbatim in a text.
struct Occurrence {
    std::size_t start = 0;
    std::size_t length = 0;
    std::size_t entry_index = 0;
};

namespace detail {

inline char lower_char(char c) noexcept {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

inline bool is_word_char(char c) noexcept {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

inline bool equals_ci(std::string_view text, std::size_t pos, std::string_view term) noexcept {
    for (std::size_t i = 0; i < term.size(); ++i) {
        if (lower_char(text[pos + i]) != lower_char(term[i])) return false;
    }
    return true;
}

inline void validate_split(const EditSplit& s) {
    if (s.homoglyph < 0 || s.segmentation < 0 || s.repetition < 0)
        throw input_error("edit split probabilities must be non-negative");
    double sum = s.homoglyph + s.segmentation + s.repetition;
    if (sum < 1.0 - 1e-9 || sum > 1.0 + 1e-9)
        throw input_error("edit split probabilities must sum to 1");
}

} // namespace detail

/// Finds verbatim vocabulary terms in `text`: case-insensitive, at word
/// boundaries, longer terms claim their span first, overlaps are dropped.
/// Returned occurrences are sorted by start position.
inline std::vector<Occurrence> find_term_occurrences(std::string_view text,
                                                     const ToxicVocabulary& vocab) {
    std::vector<std::size_t> order(vocab.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const std::string& ta = vocab.entries[a].term;
        const std::string& tb = vocab.entries[b].term;
        if (ta.size() != tb.size()) return ta.size() > tb.size();
        return ta < tb;
    });

    std::vector<bool> claimed(text.size(), false);
    std::vector<Occurrence> found;
    for (std::size_t idx : order) {
        const std::string& term = vocab.entries[idx].term;
        if (term.empty() || term.size() > text.size()) continue;
        for (std::size_t s = 0; s + term.size() <= text.size(); ++s) {
            if (!detail::equals_ci(text, s, term)) continue;
            std::size_t e = s + term.size();
            if (s > 0 && detail::is_word_char(text[s - 1])) continue;
            if (e < text.size() && detail::is_word_char(text[e])) continue;
            bool overlap = false;
            for (std::size_t i = s; i < e && !overlap; ++i) overlap = claimed[i];
            if (overlap) continue;
            for (std::size_t i = s; i < e; ++i) claimed[i] = true;
            found.push_back({s, term.size(), idx});
        }
    }
    std::sort(found.begin(), found.end(),
              [](const Occurrence& a, const Occurrence& b) { return a.start < b.start; });
    return found;
}

/// Applies character edits to a single term.  Each character is edited with
/// probability `rate`; the edit is a homoglyph substitution, a segmentator
/// insertion or a character doubling, chosen by `split`.  The result never
/// exceeds twice the term length.
inline std::string obfuscate_term(std::string_view term, const HomoglyphTable& table,
                                  double rate, const EditSplit& split, SplitMix64& rng) {
    detail::validate_split(split);
    if (!(rate >= 0.0 && rate <= 1.0)) throw input_error("corruption rate must lie in [0, 1]");
    std::string out;
    out.reserve(term.size() * 2);
    const std::string& segs = table.segmentators();
    for (char c : term) {
        double r = rng.uniform();
        if (r >= rate) {
            out.push_back(c);
            continue;
        }
        double e = rng.uniform();
        if (e < split.homoglyph) {
            if (std::isalpha(static_cast<unsigned char>(c))) {
                const std::string& cls = table.letter_class(c);
                std::string alts;
                for (char g : cls) {
                    if (g != c) alts.push_back(g);
                }
                out.push_back(alts.empty() ? c : alts[rng.below(static_cast<std::uint32_t>(alts.size()))]);
            } else if (c == ' ') {
                std::string alts;
                for (char g : segs) {
                    if (g != ' ') alts.push_back(g);
                }
                out.push_back(alts.empty() ? c : alts[rng.below(static_cast<std::uint32_t>(alts.size()))]);
            } else {
                out.push_back(c);
            }
        } else if (e < split.homoglyph + split.segmentation) {
            out.push_back(c);
            if (!segs.empty()) out.push_back(segs[rng.below(static_cast<std::uint32_t>(segs.size()))]);
        } else {
            out.push_back(c);
            out.push_back(c);
        }
    }
    return out;
}

/// Obfuscates every vocabulary term occurring in the comment; the rest of
/// the text is copied through untouched.  Throws no_trigger_error when the
/// comment contains no term to attack.
inline Variant obfuscate_comment(const Comment& comment, const ToxicVocabulary& vocab,
                                 const HomoglyphTable& table, const AttackConfig& config,
                                 std::uint64_t variant_index) {
    auto occurrences = find_term_occurrences(comment.text, vocab);
    if (occurrences.empty()) throw no_trigger_error(comment.id);
    SplitMix64 rng(derive_stream_seed(config.seed, comment.id, variant_index));
    std::string out;
    out.reserve(comment.text.size() * 2);
    std::size_t pos = 0;
    for (const Occurrence& occ : occurrences) {
        out.append(comment.text, pos, occ.start - pos);
        out += obfuscate_term(vocab.entries[occ.entry_index].term, table, config.corruption_rate,
                              config.split, rng);
        pos = occ.start + occ.length;
    }
    out.append(comment.text, pos, std::string::npos);
    return {comment.id, variant_index, AttackKind::obfuscation, std::move(out)};
}

/// Replaces every vocabulary term in the comment with its negated predicate.
inline Variant negate_comment(const Comment& comment, const ToxicVocabulary& vocab) {
    auto occurrences = find_term_occurrences(comment.text, vocab);
    if (occurrences.empty()) throw no_trigger_error(comment.id);
    std::string out;
    std::size_t pos = 0;
    for (const Occurrence& occ : occurrences) {
        const VocabEntry& entry = vocab.entries[occ.entry_index];
        if (entry.negated.empty())
            throw config_error("vocabulary term '" + entry.term + "' has no negated form");
        out.append(comment.text, pos, occ.start - pos);
        out += entry.negated;
        pos = occ.start + occ.length;
    }
    out.append(comment.text, pos, std::string::npos);
    return {comment.id, 0, AttackKind::polarity, std::move(out)};
}

/// Generates `variants_per_comment` obfuscated variants for every comment.
/// Variant RNG streams depend only on (seed, parent id, variant index), so
/// the output is independent of iteration order.
inline std::vector<Variant> generate_dataset(const std::vector<Comment>& corpus,
                                             const ToxicVocabulary& vocab,
                                             const HomoglyphTable& table,
                                             const AttackConfig& config,
                                             std::uint64_t variants_per_comment) {
    std::vector<Variant> out;
    out.reserve(corpus.size() * variants_per_comment);
    for (const Comment& c : corpus) {
        for (std::uint64_t v = 0; v < variants_per_comment; ++v) {
            out.push_back(obfuscate_comment(c, vocab, table, config, v));
        }
    }
    return out;
}

inline std::vector<Variant> negate_dataset(const std::vector<Comment>& corpus,
                                           const ToxicVocabulary& vocab) {
    std::vector<Variant> out;
    out.reserve(corpus.size());
    for (const Comment& c : corpus) out.push_back(negate_comment(c, vocab));
    return out;
}

inline nlohmann::ordered_json variant_to_json(const Variant& v) {
    return {{"parent_id", v.parent_id},
            {"variant_index", v.variant_index},
            {"attack_kind", std::string(to_string(v.attack_kind))},
            {"text", v.text}};
}

inline std::string to_jsonl(const std::vector<Variant>& variants) {
    std::string out;
    for (const Variant& v : variants) {
        out += variant_to_json(v).dump();
        out += '\n';
    }
    return out;
}

/// Parses one variant per line; blank lines are skipped.
inline std::vector<Variant> parse_variants_jsonl(std::string_view text) {
    std::vector<Variant> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw parse_error("invalid JSON object", line_no);
        try {
            Variant v;
            v.parent_id = j.at("parent_id").get<std::string>();
            v.variant_index = j.at("variant_index").get<std::uint64_t>();
            v.attack_kind = attack_kind_from_string(j.at("attack_kind").get<std::string>());
            v.text = j.at("text").get<std::string>();
            out.push_back(std::move(v));
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(std::string("bad variant record: ") + e.what(), line_no);
        } catch (const input_error& e) {
            throw parse_error(std::string("bad variant record: ") + e.what(), line_no);
        }
    }
    return out;
}

} // namespace toxfilter
