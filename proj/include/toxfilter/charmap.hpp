#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace toxfilter {

constexpr std::uint32_t seg_bit = 1u << 26;

/// Character equivalence classes used by both the attack generator and the
/// approximate matcher.  Each base letter a-z owns a set of glyphs that may
/// stand in for it; a separate set of segmentator glyphs may be inserted
/// between letters without changing what a reader perceives.  A glyph can
/// belong to several classes ('+' reads as both 't' and 'x'), so membership
/// is kept as a bitmask per byte: bit 0..25 for the letter classes, bit 26
/// for the segmentator set.
class HomoglyphTable {
public:
    HomoglyphTable() {
        for (int i = 0; i < 26; ++i) {
            classes_[i] = {char('a' + i), char('A' + i)};
        }
        rebuild();
    }

    /// Adds glyphs to the class of `base` (a lowercase letter).
    void add_class(char base, std::string_view glyphs) {
        if (base < 'a' || base > 'z')
            throw input_error(std::string("class base must be a lowercase letter, got '") + base + "'");
        std::string& cls = classes_[base - 'a'];
        for (char g : glyphs) {
            if (cls.find(g) == std::string::npos) cls.push_back(g);
        }
        rebuild();
    }

    /// Adds glyphs to the segmentator set.
    void add_segmentators(std::string_view glyphs) {
        for (char g : glyphs) {
            if (std::isalpha(static_cast<unsigned char>(g)))
                throw input_error(std::string("segmentator set must not contain the letter '") + g + "'");
            if (segmentators_.find(g) == std::string::npos) segmentators_.push_back(g);
        }
        rebuild();
    }

    /// Glyphs registered for `base`, in insertion order.  Always contains the
    /// lowercase and uppercase forms of the letter itself.
    const std::string& letter_class(char base) const {
        char b = lower(base);
        if (b < 'a' || b > 'z')
            throw input_error(std::string("no class for non-letter '") + base + "'");
        return classes_[b - 'a'];
    }

    const std::string& segmentators() const noexcept { return segmentators_; }

    /// True when `glyph` may stand in for the letter `base`.
    bool compatible(char glyph, char base) const noexcept {
        char b = lower(base);
        if (b < 'a' || b > 'z') return false;
        return (mask_[byte(glyph)] & (1u << (b - 'a'))) != 0;
    }

    bool is_segmentator(char glyph) const noexcept {
        return (mask_[byte(glyph)] & seg_bit) != 0;
    }

    /// True when `glyph` belongs to at least one letter class.
    bool in_any_class(char glyph) const noexcept {
        return (mask_[byte(glyph)] & (seg_bit - 1)) != 0;
    }

    /// Bitmask of class memberships for `glyph`.
    std::uint32_t membership(char glyph) const noexcept { return mask_[byte(glyph)]; }

    /// Set-wise comparison; glyph insertion order does not matter.
    friend bool operator==(const HomoglyphTable& a, const HomoglyphTable& b) {
        auto sorted = [](std::string s) {
            std::sort(s.begin(), s.end());
            return s;
        };
        for (int i = 0; i < 26; ++i) {
            if (sorted(a.classes_[i]) != sorted(b.classes_[i])) return false;
        }
        return sorted(a.segmentators_) == sorted(b.segmentators_);
    }

private:
    static char lower(char c) noexcept {
        return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    static unsigned char byte(char c) noexcept { return static_cast<unsigned char>(c); }

    void rebuild() noexcept {
        mask_.fill(0);
        for (int i = 0; i < 26; ++i) {
            for (char g : classes_[i]) mask_[byte(g)] |= 1u << i;
        }
        for (char g : segmentators_) mask_[byte(g)] |= seg_bit;
    }

    std::array<std::string, 26> classes_;
    std::string segmentators_;
    std::array<std::uint32_t, 256> mask_{};
};

/// The homoglyph alphabet the attack tooling ships with.
inline HomoglyphTable default_table() {
    HomoglyphTable t;
    t.add_class('a', "aA4@");
    t.add_class('b', "bB83");
    t.add_class('c', "cC(<");
    t.add_class('d', "dD");
    t.add_class('e', "eE3");
    t.add_class('f', "fF");
    t.add_class('g', "g9G6");
    t.add_class('h', "hH#");
    t.add_class('i', "yiI1!");
    t.add_class('j', "jJ|]");
    t.add_class('k', "Kk");
    t.add_class('l', "lL|/\\");
    t.add_class('m', "mM");
    t.add_class('n', "nN");
    t.add_class('o', "oO0");
    t.add_class('p', "pP");
    t.add_class('q', "qQ9");
    t.add_class('r', "rR");
    t.add_class('s', "sS5$");
    t.add_class('t', "tT+7");
    t.add_class('u', "uvUV");
    t.add_class('v', "vVuU");
    t.add_class('w', "wW");
    t.add_class('x', "xX%+");
    t.add_class('y', "Yy&i");
    t.add_class('z', "zZ2");
    t.add_segmentators(".:;-= \"*?'_");
    return t;
}

/// Default table plus ',' as a segmentator; the experiment harness uses this
/// one so that comma-separated glyph runs collapse cleanly.
inline HomoglyphTable experiment_table() {
    HomoglyphTable t = default_table();
    t.add_segmentators(",");
    return t;
}

/// Parses the table file format: one class per line, `<base>: <glyphs>`,
/// where base `_` names the segmentator set.  `#` starts a comment; blank
/// lines are skipped.  Classes accumulate across repeated lines.
inline HomoglyphTable load_table(std::string_view text) {
    HomoglyphTable t;
    bool saw_class = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos || line[first] == '#') continue;
        line.remove_prefix(first);
        if (line.size() < 2 || line[1] != ':')
            throw parse_error("expected '<base>: <glyphs>'", line_no);
        char base = line[0];
        std::string_view rest = line.substr(2);
        if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        try {
            if (base == '_') {
                t.add_segmentators(rest);
            } else if (base >= 'a' && base <= 'z') {
                std::string glyphs;
                for (char g : rest) {
                    if (g != ' ' && g != '\t') glyphs.push_back(g);
                }
                t.add_class(base, glyphs);
                saw_class = true;
            } else {
                throw input_error(std::string("class base must be a lowercase letter or '_', got '") + base + "'");
            }
        } catch (const input_error& e) {
            throw parse_error(e.what(), line_no);
        }
    }
    if (!saw_class) throw parse_error("table defines no letter class");
    return t;
}

/// Inverse of load_table up to glyph order.
inline std::string serialize_table(const HomoglyphTable& t) {
    std::string out;
    for (char base = 'a'; base <= 'z'; ++base) {
        out += base;
        out += ": ";
        out += t.letter_class(base);
        out += '\n';
    }
    out += "_: ";
    out += t.segmentators();
    out += '\n';
    return out;
}

} // namespace toxfilter
