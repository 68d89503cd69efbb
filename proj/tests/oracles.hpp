#pragma once

// Independent reference implementations the tests compare the library
// against.  They favour obvious correctness over speed: top-down memoised
// recursion over the full edit graph instead of the banded bottom-up tables
// the library uses, and exhaustive span enumeration instead of anchored
// search.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <toxfilter/charmap.hpp>
#include <toxfilter/match.hpp>
#include <toxfilter/vocabulary.hpp>

namespace oracles {

inline std::string normalize(std::string_view raw) {
    std::string norm;
    for (char c : raw) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalpha(u)) {
            norm.push_back(static_cast<char>(std::tolower(u)));
        } else if (std::isspace(u) && !norm.empty() && norm.back() != ' ') {
            norm.push_back(' ');
        }
    }
    while (!norm.empty() && norm.back() == ' ') norm.pop_back();
    return norm;
}

struct AlignOracle {
    std::string pattern; // normalized, owned
    std::string_view text;
    const toxfilter::HomoglyphTable* table;
    std::map<std::pair<std::size_t, std::size_t>, int> memo;

    int sub(char pc, char tc) const {
        if (pc == ' ') return table->is_segmentator(tc) ? 0 : 1;
        return table->compatible(tc, pc) ? 0 : 1;
    }

    int del(char tc, std::size_t k) const {
        if (table->is_segmentator(tc)) return 0;
        if (k > 0 && pattern[k - 1] != ' ' && table->compatible(tc, pattern[k - 1])) return 0;
        return 1;
    }

    int solve(std::size_t k, std::size_t j) {
        if (k == pattern.size() && j == text.size()) return 0;
        auto it = memo.find({k, j});
        if (it != memo.end()) return it->second;
        int best = 1 << 20;
        if (k < pattern.size() && j < text.size())
            best = std::min(best, sub(pattern[k], text[j]) + solve(k + 1, j + 1));
        if (k < pattern.size()) best = std::min(best, 1 + solve(k + 1, j));
        if (j < text.size()) best = std::min(best, del(text[j], k) + solve(k, j + 1));
        memo[{k, j}] = best;
        return best;
    }
};

inline int alignment_cost(std::string_view span, std::string_view pattern,
                          const toxfilter::HomoglyphTable& table) {
    AlignOracle o{normalize(pattern), span, &table, {}};
    return o.solve(0, 0);
}

/// Exhaustive equivalent of Matcher::find_matches: every (start, end) pair is
/// scored with the recursive oracle, then the same canonical-span, boundary,
/// ranking and non-overlap rules are applied.
inline std::vector<toxfilter::MatchSpan> find_spans(std::string_view text,
                                                    const toxfilter::ToxicVocabulary& vocab,
                                                    const toxfilter::HomoglyphTable& table,
                                                    toxfilter::MatchParams params,
                                                    bool negated_field = false) {
    struct Cand {
        std::size_t start, end, entry;
        int cost, letters;
    };
    std::vector<Cand> cands;
    for (std::size_t e = 0; e < vocab.entries.size(); ++e) {
        const std::string& raw = negated_field ? vocab.entries[e].negated : vocab.entries[e].term;
        std::string norm = normalize(raw);
        int letters = 0;
        for (char c : norm) letters += c != ' ';
        int budget = static_cast<int>(std::floor((1.0 - params.min_similarity) * letters));
        std::size_t window = 2 * norm.size() + static_cast<std::size_t>(budget) + 2;
        for (std::size_t s = 0; s < text.size(); ++s) {
            if (!table.compatible(text[s], norm.front())) continue;
            for (std::size_t end = s + 1; end <= std::min(text.size(), s + window); ++end) {
                char last = text[end - 1];
                if (table.is_segmentator(last) && !table.compatible(last, norm.back())) continue;
                if (params.boundary_check) {
                    if (s > 0 && table.in_any_class(text[s - 1])) continue;
                    if (end < text.size() && table.in_any_class(text[end])) continue;
                }
                int cost = oracles::alignment_cost(text.substr(s, end - s), norm, table);
                if (cost > budget) continue;
                cands.push_back({s, end, e, cost, letters});
            }
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.letters != b.letters) return a.letters > b.letters;
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.start != b.start) return a.start < b.start;
        if (a.end != b.end) return a.end > b.end;
        return a.entry < b.entry;
    });
    std::vector<Cand> kept;
    for (const Cand& c : cands) {
        bool overlap = false;
        for (const Cand& k : kept) overlap = overlap || (c.start < k.end && k.start < c.end);
        if (!overlap) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end(), [](const Cand& a, const Cand& b) { return a.start < b.start; });
    std::vector<toxfilter::MatchSpan> spans;
    for (const Cand& c : kept) {
        spans.push_back({c.start, c.end, c.entry, c.cost,
                         negated_field ? vocab.entries[c.entry].negated : vocab.entries[c.entry].term});
    }
    return spans;
}

} // namespace oracles
