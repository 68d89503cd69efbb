#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "charmap.hpp"
#include "errors.hpp"
#include "vocabulary.hpp"

namespace toxfilter {

/// Matching knobs.  `min_similarity` is the fraction of a pattern's letters
/// that must align without extra cost: a pattern with m letters tolerates
/// floor((1 - min_similarity) * m) units of alignment cost.  When
/// `boundary_check` is set, a span is rejected if the character right before
/// or right after it belongs to any letter class, so fragments inside words
/// do not match ("ass" never fires inside "class").
struct MatchParams {
    double min_similarity = 0.8;
    bool boundary_check = true;
};

/// A located vocabulary pattern: text[start, end) aligned to `pattern` with
/// the given cost.
struct MatchSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t entry_index = 0;
    int cost = 0;
    std::string pattern;
};

enum class NeutraliseMode { prune, synonym };

inline NeutraliseMode neutralise_mode_from_string(std::string_view s) {
    if (s == "prune") return NeutraliseMode::prune;
    if (s == "synonym") return NeutraliseMode::synonym;
    throw input_error("unknown neutralise mode '" + std::string(s) + "'");
}

namespace detail {

/// Canonical pattern form: lowercase letters, single spaces between words,
/// everything else dropped.
inline std::string normalize_pattern(std::string_view raw) {
    std::string norm;
    for (char c : raw) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalpha(u)) {
            norm.push_back(static_cast<char>(std::tolower(u)));
        } else if (std::isspace(u)) {
            if (!norm.empty() && norm.back() != ' ') norm.push_back(' ');
        }
    }
    while (!norm.empty() && norm.back() == ' ') norm.pop_back();
    return norm;
}

inline int letter_count(std::string_view norm) noexcept {
    int n = 0;
    for (char c : norm) {
        if (c != ' ') ++n;
    }
    return n;
}

inline int cost_budget(int letters, double min_similarity) noexcept {
    return static_cast<int>(std::floor((1.0 - min_similarity) * letters));
}

/// A located pattern before presentation: indices only, no owned strings.
struct MatchCandidate {
    std::size_t start, end, entry_index;
    int cost, letters;
};

/// Matching runs once per scored record, so per-call vector churn would
/// dominate on short texts; every thread reuses one set of DP buffers.
/// `rows` holds one DP row per trie depth so sibling subtrees can re-read
/// their parent's row, with `lo`/`hi` the live column band of each row.
struct MatchScratch {
    std::vector<std::uint32_t> text_masks, prefix_union;
    std::vector<int> rows;
    std::vector<std::size_t> lo, hi;
    std::vector<MatchCandidate> candidates, kept;
};

inline MatchScratch& match_scratch() {
    static thread_local MatchScratch scratch;
    return scratch;
}

/// Cost of consuming text char with mask `tm` against pattern char `pc`.
inline int substitute_cost(char pc, std::uint32_t tm) noexcept {
    if (pc == ' ') return (tm & seg_bit) ? 0 : 1;
    return (tm & (1u << (pc - 'a'))) ? 0 : 1;
}

/// Cost of deleting a text char after pattern char `pc` has been consumed
/// (pc == 0 when nothing has been consumed yet).  Segmentators are free, and
/// so are glyphs still compatible with the preceding pattern letter, which
/// absorbs character repetitions.
inline int delete_cost(char pc, std::uint32_t tm) noexcept {
    if (tm & seg_bit) return 0;
    if (pc != 0 && pc != ' ' && (tm & (1u << (pc - 'a')))) return 0;
    return 1;
}

} // namespace detail

/// Alignment cost of the whole text span against a vocabulary pattern.
/// Compatible substitutions, segmentator deletions and repetition collapses
/// are free; everything else costs one unit.
inline int alignment_cost(std::string_view span, std::string_view pattern,
                          const HomoglyphTable& table) {
    std::string norm = detail::normalize_pattern(pattern);
    if (norm.empty()) throw input_error("pattern '" + std::string(pattern) + "' has no letters");
    const std::size_t M = norm.size();
    const std::size_t N = span.size();
    std::vector<int> prev(N + 1), cur(N + 1);
    prev[0] = 0;
    for (std::size_t j = 1; j <= N; ++j)
        prev[j] = prev[j - 1] + detail::delete_cost(0, table.membership(span[j - 1]));
    for (std::size_t k = 1; k <= M; ++k) {
        char pc = norm[k - 1];
        cur[0] = static_cast<int>(k);
        for (std::size_t j = 1; j <= N; ++j) {
            std::uint32_t tm = table.membership(span[j - 1]);
            cur[j] = std::min({prev[j - 1] + detail::substitute_cost(pc, tm),
                               cur[j - 1] + detail::delete_cost(pc, tm),
                               prev[j] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[N];
}

/// Finds approximate occurrences of vocabulary patterns in free text and
/// applies the two filter rewrites.  Construction precompiles the patterns;
/// the object is immutable afterwards and safe to share across threads.
class Matcher {
public:
    enum class Field { term, negated };

    Matcher(const ToxicVocabulary& vocab, const HomoglyphTable& table, MatchParams params,
            Field field = Field::term)
        : entries_(vocab.entries), table_(table), params_(params) {
        if (!(params.min_similarity >= 0.0 && params.min_similarity <= 1.0))
            throw config_error("min_similarity must lie in [0, 1]");
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const std::string& raw = field == Field::term ? entries_[i].term : entries_[i].negated;
            if (raw.empty() && field == Field::negated)
                throw config_error("vocabulary term '" + entries_[i].term + "' has no negated form");
            Pattern p;
            p.norm = detail::normalize_pattern(raw);
            if (p.norm.empty())
                throw config_error("vocabulary pattern '" + raw + "' has no letters");
            p.entry_index = i;
            p.display = raw;
            p.letters = detail::letter_count(p.norm);
            p.budget = detail::cost_budget(p.letters, params.min_similarity);
            p.window = 2 * p.norm.size() + static_cast<std::size_t>(p.budget) + 2;
            p.first_mask = 1u << (p.norm.front() - 'a');
            p.last_mask = 1u << (p.norm.back() - 'a');
            for (char c : p.norm) {
                if (c != ' ') p.needed_mask |= 1u << (c - 'a');
            }
            max_window_ = std::max(max_window_, p.window);
            max_depth_ = std::max(max_depth_, p.norm.size());
            anchor_mask_ |= p.first_mask;
            patterns_.push_back(std::move(p));
        }

        // Patterns sharing a normalized prefix ("not stupid", "not sexist")
        // share DP rows for that prefix, so compile them into a trie.  Each
        // node carries bounds over its subtree: the loosest budget and widest
        // window any member allows, and the letters every member requires.
        trie_.push_back({});
        for (std::size_t idx = 0; idx < patterns_.size(); ++idx) {
            int node = 0;
            for (char c : patterns_[idx].norm) {
                int child = -1;
                for (int s = trie_[node].first_child; s != -1; s = trie_[s].next_sibling) {
                    if (trie_[s].pc == c) {
                        child = s;
                        break;
                    }
                }
                if (child == -1) {
                    child = static_cast<int>(trie_.size());
                    trie_.push_back({});
                    trie_[child].pc = c;
                    trie_[child].next_sibling = trie_[node].first_child;
                    trie_[node].first_child = child;
                }
                node = child;
            }
            // Entries with identical normalized patterns yield identical
            // spans; overlap resolution keeps the lowest entry index, so
            // recording only the first matches the per-pattern behaviour.
            if (trie_[node].pattern == -1) trie_[node].pattern = static_cast<int>(idx);
        }
        aggregate_trie(0);
    }

    /// Best non-overlapping pattern spans, sorted by start position.  Longer
    /// patterns win overlaps, then lower cost, then leftmost start, then the
    /// longer span.
    std::vector<MatchSpan> find_matches(std::string_view text) const {
        const std::vector<detail::MatchCandidate>& kept = match_candidates(text);
        std::vector<MatchSpan> result;
        result.reserve(kept.size());
        for (const detail::MatchCandidate& c : kept) {
            result.push_back({c.start, c.end, c.entry_index, c.cost,
                              patterns_[c.entry_index].display});
        }
        return result;
    }

private:
    /// Winning non-overlapping candidates sorted by start, held in per-thread
    /// scratch: valid until the next matching call on the same thread.
    const std::vector<detail::MatchCandidate>& match_candidates(std::string_view text) const {
        detail::MatchScratch& scratch = detail::match_scratch();
        std::vector<detail::MatchCandidate>& candidates = scratch.candidates;
        std::vector<detail::MatchCandidate>& kept = scratch.kept;
        candidates.clear();
        kept.clear();

        const std::size_t n = text.size();
        if (n == 0) return kept;

        scratch.text_masks.resize(n);
        std::vector<std::uint32_t>& tm = scratch.text_masks;
        for (std::size_t i = 0; i < n; ++i) tm[i] = table_.membership(text[i]);

        const std::size_t width = std::min(max_window_, n) + 1;
        scratch.rows.resize((max_depth_ + 1) * width);
        scratch.lo.resize(max_depth_ + 1);
        scratch.hi.resize(max_depth_ + 1);
        scratch.prefix_union.resize(width);

        Walk walk;
        walk.tm = tm.data();
        walk.pre = scratch.prefix_union.data();
        walk.rows = scratch.rows.data();
        walk.stride = width;
        walk.lo = scratch.lo.data();
        walk.hi = scratch.hi.data();
        walk.n = n;
        walk.out = &candidates;

        const int root_budget = trie_[0].max_budget;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(tm[i] & anchor_mask_)) continue;
            if (params_.boundary_check && i > 0 && (tm[i - 1] & (seg_bit - 1))) continue;

            // prefix letter unions from the anchor, shared by all patterns here
            const std::size_t maxW = std::min(max_window_, n - i);
            walk.pre[0] = 0;
            for (std::size_t j = 1; j <= maxW; ++j) walk.pre[j] = walk.pre[j - 1] | tm[i + j - 1];

            // Row 0: cost of deleting the first j window chars before any
            // pattern char is consumed.  Values only grow along the row, so
            // fill stops at the first over-budget cell.
            walk.i = i;
            walk.rows[0] = 0;
            walk.lo[0] = 0;
            walk.hi[0] = 0;
            for (std::size_t j = 1; j <= maxW; ++j) {
                const int v = walk.rows[j - 1] + !(tm[i + j - 1] & seg_bit);
                if (v > root_budget) break;
                walk.rows[j] = v;
                walk.hi[0] = j;
            }

            for (int c = trie_[0].first_child; c != -1; c = trie_[c].next_sibling) {
                if (trie_[c].pc != ' ' && !(tm[i] & (1u << (trie_[c].pc - 'a')))) continue;
                descend(c, 1, walk);
            }
        }

        std::sort(candidates.begin(), candidates.end(),
                  [](const detail::MatchCandidate& a, const detail::MatchCandidate& b) {
                      if (a.letters != b.letters) return a.letters > b.letters;
                      if (a.cost != b.cost) return a.cost < b.cost;
                      if (a.start != b.start) return a.start < b.start;
                      if (a.end != b.end) return a.end > b.end;
                      return a.entry_index < b.entry_index;
                  });

        for (const detail::MatchCandidate& c : candidates) {
            bool overlaps = false;
            for (const detail::MatchCandidate& k : kept) {
                if (c.start < k.end && k.start < c.end) {
                    overlaps = true;
                    break;
                }
            }
            if (!overlaps) kept.push_back(c);
        }
        std::sort(kept.begin(), kept.end(),
                  [](const detail::MatchCandidate& a, const detail::MatchCandidate& b) {
                      return a.start < b.start;
                  });
        return kept;
    }

public:
    /// Replaces every matched span with the plain vocabulary term; bytes
    /// outside matched spans pass through untouched.
    std::string deobfuscate(std::string_view text) const {
        const std::vector<detail::MatchCandidate>& spans = match_candidates(text);
        std::string out;
        out.reserve(text.size());
        std::size_t pos = 0;
        for (const detail::MatchCandidate& s : spans) {
            out.append(text.substr(pos, s.start - pos));
            out += entries_[s.entry_index].term;
            pos = s.end;
        }
        out.append(text.substr(pos));
        return out;
    }

    /// Removes matched spans (prune) or swaps them for the entry's synonym.
    /// Pruning also tidies the whitespace the removal leaves behind.
    std::string neutralise(std::string_view text, NeutraliseMode mode) const {
        const std::vector<detail::MatchCandidate>& spans = match_candidates(text);
        std::string out(text);
        for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
            if (mode == NeutraliseMode::synonym) {
                const std::string& syn = entries_[it->entry_index].synonym;
                if (syn.empty())
                    throw config_error("vocabulary term '" + entries_[it->entry_index].term +
                                       "' has no synonym");
                out.replace(it->start, it->end - it->start, syn);
            } else {
                out.erase(it->start, it->end - it->start);
                std::size_t p = it->start;
                auto space_at = [&](std::size_t q) {
                    return q < out.size() && std::isspace(static_cast<unsigned char>(out[q]));
                };
                bool left_space = p > 0 && std::isspace(static_cast<unsigned char>(out[p - 1]));
                if (left_space && space_at(p)) {
                    out.erase(p, 1);
                } else if (left_space &&
                           (p == out.size() || !std::isalnum(static_cast<unsigned char>(out[p])))) {
                    out.erase(p - 1, 1);
                } else if (p == 0 && space_at(0)) {
                    out.erase(0, 1);
                }
            }
        }
        return out;
    }

    const std::vector<VocabEntry>& entries() const noexcept { return entries_; }
    const HomoglyphTable& table() const noexcept { return table_; }
    const MatchParams& params() const noexcept { return params_; }

private:
    struct Pattern {
        std::string norm;
        std::string display;
        std::size_t entry_index = 0;
        int letters = 0;
        int budget = 0;
        std::size_t window = 0;
        std::uint32_t first_mask = 0;
        std::uint32_t last_mask = 0;
        std::uint32_t needed_mask = 0;
    };

    /// One normalized pattern character; `pattern` indexes patterns_ when a
    /// pattern ends here.  The bounds aggregate the node's whole subtree so a
    /// shared prefix is explored under the loosest constraints any member
    /// allows, which can only add work, never lose a match.
    struct TrieNode {
        char pc = 0;
        int pattern = -1;
        int first_child = -1;
        int next_sibling = -1;
        int max_budget = 0;
        std::size_t max_window = 0;
        std::uint32_t req_mask = ~0u;
    };

    void aggregate_trie(int idx) {
        TrieNode& node = trie_[idx];
        if (node.pattern >= 0) {
            const Pattern& p = patterns_[node.pattern];
            node.max_budget = p.budget;
            node.max_window = p.window;
            node.req_mask = p.needed_mask;
        }
        for (int c = node.first_child; c != -1; c = trie_[c].next_sibling) {
            aggregate_trie(c);
            node.max_budget = std::max(node.max_budget, trie_[c].max_budget);
            node.max_window = std::max(node.max_window, trie_[c].max_window);
            node.req_mask &= trie_[c].req_mask;
        }
    }

    /// Per-anchor state threaded through the trie walk.
    struct Walk {
        const std::uint32_t* tm = nullptr;
        std::uint32_t* pre = nullptr;
        int* rows = nullptr;
        std::size_t stride = 0;
        std::size_t* lo = nullptr;
        std::size_t* hi = nullptr;
        std::size_t n = 0, i = 0;
        std::vector<detail::MatchCandidate>* out = nullptr;
    };

    /// Computes the DP row for `node` from its parent's row and recurses.
    /// Banded: cost only accumulates, so cells already over the subtree's
    /// loosest budget can never feed a within-budget cell.  Only the live
    /// column band [lo, hi] of the parent row is extended; band-edge cells
    /// are stamped with a dead sentinel so reads outside the band register
    /// as over budget.  Sibling subtrees re-read the parent row afterwards:
    /// the sentinels only ever overwrite provably dead cells, never live
    /// band values, so the row stays valid for them.
    void descend(int idx, std::size_t depth, Walk& st) const {
        const TrieNode& node = trie_[idx];
        const std::size_t avail = st.n - st.i;
        const std::size_t W = std::min(node.max_window, avail);

        // every letter all members need that is absent from the window
        // costs at least one unit for each of them; reject the subtree
        if (std::popcount(node.req_mask & ~st.pre[W]) > node.max_budget) return;

        const std::uint32_t* wm = st.tm + st.i;
        const int budget = node.max_budget;
        const int dead = budget + 1;
        constexpr std::size_t npos = static_cast<std::size_t>(-1);
        int* prev = st.rows + (depth - 1) * st.stride;
        int* cur = st.rows + depth * st.stride;
        const std::size_t plo = st.lo[depth - 1], phi = st.hi[depth - 1];

        const std::uint32_t sub_mask = node.pc == ' ' ? seg_bit : 1u << (node.pc - 'a');
        const std::uint32_t del_mask = node.pc == ' ' ? seg_bit : (seg_bit | sub_mask);
        const std::size_t jbeg = plo == 0 ? 1 : plo;
        if (jbeg > W) return;
        if (jbeg > 1) prev[jbeg - 1] = dead;
        const std::size_t jend = phi + 1 <= W ? phi + 1 : W;
        if (phi + 1 <= W) prev[phi + 1] = dead;
        int left = static_cast<int>(depth);
        cur[0] = left;
        std::size_t new_lo = npos, new_hi = 0;
        if (left <= budget) new_lo = 0;
        for (std::size_t j = jbeg; j <= jend; ++j) {
            const std::uint32_t m = wm[j - 1];
            int v = prev[j - 1] + !(m & sub_mask);
            const int dv = left + !(m & del_mask);
            if (dv < v) v = dv;
            const int iv = prev[j] + 1;
            if (iv < v) v = iv;
            cur[j] = left = v;
            if (v <= budget) {
                if (new_lo == npos) new_lo = j;
                new_hi = j;
            }
        }
        // past the band only free deletes can keep a cell alive
        for (std::size_t j = jend + 1; j <= W && left <= budget; ++j) {
            left += !(wm[j - 1] & del_mask);
            if (left > budget) break;
            cur[j] = left;
            new_hi = j;
        }
        if (new_lo == npos) return;
        st.lo[depth] = new_lo;
        st.hi[depth] = new_hi;

        if (node.pattern >= 0) {
            const Pattern& p = patterns_[node.pattern];
            const std::size_t Wp = std::min(p.window, avail);
            const std::size_t last_j = std::min(new_hi, Wp);
            for (std::size_t j = new_lo == 0 ? 1 : new_lo; j <= last_j; ++j) {
                if (cur[j] > p.budget) continue;
                const std::size_t end = st.i + j;
                const std::uint32_t last = st.tm[end - 1];
                if ((last & seg_bit) && !(last & p.last_mask)) continue;
                if (params_.boundary_check && end < st.n && (st.tm[end] & (seg_bit - 1)))
                    continue;
                st.out->push_back({st.i, end, p.entry_index, cur[j], p.letters});
            }
        }
        for (int c = node.first_child; c != -1; c = trie_[c].next_sibling) descend(c, depth + 1, st);
    }

    std::vector<VocabEntry> entries_;
    std::vector<Pattern> patterns_;
    HomoglyphTable table_;
    MatchParams params_;
    std::size_t max_window_ = 0;
    std::size_t max_depth_ = 0;
    std::vector<TrieNode> trie_;
    std::uint32_t anchor_mask_ = 0;
};

inline std::vector<MatchSpan> find_matches(std::string_view text, const ToxicVocabulary& vocab,
                                           const HomoglyphTable& table, MatchParams params = {}) {
    return Matcher(vocab, table, params).find_matches(text);
}

inline std::string deobfuscate(std::string_view text, const ToxicVocabulary& vocab,
                               const HomoglyphTable& table, MatchParams params = {}) {
    return Matcher(vocab, table, params).deobfuscate(text);
}

inline std::string neutralise(std::string_view text, const ToxicVocabulary& vocab,
                              const HomoglyphTable& table, NeutraliseMode mode,
                              MatchParams params = {}) {
    return Matcher(vocab, table, params, Matcher::Field::negated).neutralise(text, mode);
}

} // namespace toxfilter
