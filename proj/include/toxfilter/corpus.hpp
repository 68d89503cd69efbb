#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "vocabulary.hpp"

namespace toxfilter {

/// One corpus comment with the toxicity a reference model assigned to its
/// unattacked form.
struct Comment {
    std::string id;
    std::string topic;
    std::string text;
    double reference_toxicity = 0.0;
};

/// Parses the corpus TSV: header `id<TAB>topic<TAB>toxicity<TAB>text`, one
/// comment per row.  Ids must be unique and toxicity must lie in [0, 1].
inline std::vector<Comment> load_corpus(std::string_view text) {
    std::vector<Comment> corpus;
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
            if (fields.size() != 4 || fields[0] != "id" || fields[1] != "topic" ||
                fields[2] != "toxicity" || fields[3] != "text")
                throw parse_error("expected header 'id\\ttopic\\ttoxicity\\ttext'", line_no);
            saw_header = true;
            continue;
        }
        if (fields.size() != 4) throw parse_error("expected 4 tab-separated fields", line_no);
        Comment c;
        c.id = std::string(fields[0]);
        c.topic = std::string(fields[1]);
        c.text = std::string(fields[3]);
        try {
            std::size_t used = 0;
            c.reference_toxicity = std::stod(std::string(fields[2]), &used);
            if (used != fields[2].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw parse_error("toxicity is not a number: '" + std::string(fields[2]) + "'", line_no);
        }
        if (c.id.empty()) throw parse_error("comment id is empty", line_no);
        if (!(c.reference_toxicity >= 0.0 && c.reference_toxicity <= 1.0))
            throw parse_error("toxicity of '" + c.id + "' is outside [0, 1]", line_no);
        if (c.text.empty()) throw parse_error("comment '" + c.id + "' has empty text", line_no);
        for (const Comment& other : corpus) {
            if (other.id == c.id) throw parse_error("duplicate comment id '" + c.id + "'", line_no);
        }
        corpus.push_back(std::move(c));
    }
    if (!saw_header) throw parse_error("missing corpus header");
    if (corpus.empty()) throw parse_error("corpus has no comments");
    return corpus;
}

inline std::string serialize_corpus(const std::vector<Comment>& corpus) {
    std::string out = "id\ttopic\ttoxicity\ttext\n";
    char buf[32];
    for (const Comment& c : corpus) {
        std::snprintf(buf, sizeof buf, "%.2f", c.reference_toxicity);
        out += c.id;
        out += '\t';
        out += c.topic;
        out += '\t';
        out += buf;
        out += '\t';
        out += c.text;
        out += '\n';
    }
    return out;
}

} // namespace toxfilter
