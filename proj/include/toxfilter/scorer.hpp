#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "vocabulary.hpp"

namespace toxfilter {

inline double logistic(double x) noexcept {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

/// Anything that maps a text to a toxicity score in [0, 1].
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual double score(const std::string& text) const = 0;
    virtual std::string name() const = 0;
};

/// Splits on non-alphanumeric bytes and lowercases, so punctuation and case
/// never affect scoring.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

/// Transparent stand-in for a black-box toxicity model: a logistic over the
/// weighted count of vocabulary phrases in the token stream.  With the
/// default bias -3 and weight 6 one hit scores ~0.95 and zero hits ~0.05.
/// The phrase match is verbatim on tokens, so the scorer is blind to
/// homoglyph spellings and treats "not stupid" the same as "stupid", which
/// is exactly the weakness the attacks in this project exercise.
class LexiconScorer : public Scorer {
public:
    explicit LexiconScorer(const ToxicVocabulary& vocab, double bias = -3.0) : bias_(bias) {
        for (std::size_t i = 0; i < vocab.entries.size(); ++i) {
            Phrase p;
            p.tokens = tokenize(vocab.entries[i].term);
            p.weight = vocab.entries[i].weight;
            if (!p.tokens.empty()) phrases_.push_back(std::move(p));
        }
        std::stable_sort(phrases_.begin(), phrases_.end(), [](const Phrase& a, const Phrase& b) {
            return a.tokens.size() > b.tokens.size();
        });
    }

    double score(const std::string& text) const override {
        std::vector<std::string> tokens = tokenize(text);
        double sum = bias_;
        for (std::size_t i = 0; i < tokens.size();) {
            std::size_t consumed = 1;
            for (const Phrase& p : phrases_) {
                if (p.tokens.size() > tokens.size() - i) continue;
                bool match = true;
                for (std::size_t k = 0; k < p.tokens.size() && match; ++k)
                    match = tokens[i + k] == p.tokens[k];
                if (match) {
                    sum += p.weight;
                    consumed = p.tokens.size();
                    break;
                }
            }
            i += consumed;
        }
        return logistic(sum);
    }

    std::string name() const override { return "lexicon"; }

private:
    struct Phrase {
        std::vector<std::string> tokens;
        double weight = 0.0;
    };

    std::vector<Phrase> phrases_;
    double bias_ = -3.0;
};

inline double score_local(const std::string& text, const ToxicVocabulary& vocab) {
    return LexiconScorer(vocab).score(text);
}

} // namespace toxfilter
