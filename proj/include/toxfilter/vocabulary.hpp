#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace toxfilter {

/// One toxic term with its polarity-attack replacement, a non-toxic synonym
/// for the rewrite filter mode, and the weight the lexicon scorer assigns.
struct VocabEntry {
    std::string term;
    std::string negated;
    std::string synonym;
    double weight = 6.0;
};

struct ToxicVocabulary {
    std::vector<VocabEntry> entries;

    const VocabEntry* find(std::string_view term) const noexcept {
        for (const VocabEntry& e : entries) {
            if (e.term == term) return &e;
        }
        return nullptr;
    }
};

namespace detail {

inline void validate_vocabulary(const ToxicVocabulary& v) {
    for (std::size_t i = 0; i < v.entries.size(); ++i) {
        const VocabEntry& e = v.entries[i];
        if (e.term.empty()) throw input_error("vocabulary entry " + std::to_string(i) + " has an empty term");
        if (!std::isfinite(e.weight)) throw input_error("vocabulary term '" + e.term + "' has a non-finite weight");
        for (std::size_t j = i + 1; j < v.entries.size(); ++j) {
            if (v.entries[j].term == e.term) throw input_error("duplicate vocabulary term '" + e.term + "'");
        }
    }
}

inline std::vector<std::string_view> split_tsv_row(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            return fields;
        }
        fields.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
}

} // namespace detail

/// Parses the vocabulary TSV: header `term<TAB>negated<TAB>synonym<TAB>weight`
/// followed by one entry per row.  `negated` and `synonym` may be empty; the
/// filters that need them reject such entries when they are actually used.
inline ToxicVocabulary load_vocabulary(std::string_view text) {
    ToxicVocabulary v;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_header = false;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        auto fields = detail::split_tsv_row(line);
        if (!saw_header) {
            if (fields.size() != 4 || fields[0] != "term" || fields[1] != "negated" ||
                fields[2] != "synonym" || fields[3] != "weight")
                throw parse_error("expected header 'term\\tnegated\\tsynonym\\tweight'", line_no);
            saw_header = true;
            continue;
        }
        if (fields.size() != 4) throw parse_error("expected 4 tab-separated fields", line_no);
        VocabEntry e;
        e.term = std::string(fields[0]);
        e.negated = std::string(fields[1]);
        e.synonym = std::string(fields[2]);
        try {
            std::size_t used = 0;
            e.weight = std::stod(std::string(fields[3]), &used);
            if (used != fields[3].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw parse_error("weight is not a number: '" + std::string(fields[3]) + "'", line_no);
        }
        v.entries.push_back(std::move(e));
    }
    if (!saw_header) throw parse_error("missing vocabulary header");
    if (v.entries.empty()) throw parse_error("vocabulary has no entries");
    try {
        detail::validate_vocabulary(v);
    } catch (const input_error& e) {
        throw parse_error(e.what());
    }
    return v;
}

inline std::string serialize_vocabulary(const ToxicVocabulary& v) {
    std::string out = "term\tnegated\tsynonym\tweight\n";
    char buf[64];
    for (const VocabEntry& e : v.entries) {
        std::snprintf(buf, sizeof buf, "%g", e.weight);
        out += e.term;
        out += '\t';
        out += e.negated;
        out += '\t';
        out += e.synonym;
        out += '\t';
        out += buf;
        out += '\n';
    }
    return out;
}

/// The bundled vocabulary: toxic predicates seen in the evaluation corpus,
/// their negated forms used by the polarity attack, and mild synonyms used
/// by the rewrite filter mode.
inline ToxicVocabulary default_vocabulary() {
    ToxicVocabulary v;
    v.entries = {
        {"idiots", "not idiots", "clever", 6.0},
        {"awful", "not awful", "wonderful", 6.0},
        {"stupid", "not stupid", "sensible", 6.0},
        {"in hell", "not in hell", "in heaven", 6.0},
        {"the worst", "not the worst", "the best", 6.0},
        {"morons", "not morons", "geniuses", 6.0},
        {"screw you", "don't screw you", "bless you", 6.0},
        {"terrible", "not terrible", "great", 6.0},
        {"suck", "don't suck", "shine", 6.0},
        {"a shame", "not a shame", "a delight", 6.0},
        {"stupidity", "no stupidity", "wisdom", 6.0},
        {"racist", "not racist", "fair", 6.0},
        {"sexist", "not sexist", "tolerant", 6.0},
        {"supremacists", "not supremacists", "egalitarians", 6.0},
        {"assholes", "not assholes", "sweethearts", 6.0},
        {"ignorant", "not ignorant", "informed", 6.0},
        {"a moron", "not a moron", "a genius", 6.0},
        {"nationalists", "not nationalists", "moderates", 6.0},
        {"rubbish", "not rubbish", "brilliant", 6.0},
        {"up their ass", "not up their ass", "in the clouds", 6.0},
        {"uneducated", "not uneducated", "schooled", 6.0},
        {"an idiot", "not an idiot", "a genius", 6.0},
        {"an abortion", "not an abortion", "a blessing", 6.0},
    };
    detail::validate_vocabulary(v);
    return v;
}

} // namespace toxfilter
