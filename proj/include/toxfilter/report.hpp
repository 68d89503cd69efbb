#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "harness.hpp"
#include "pipeline.hpp"
#include "stats.hpp"

namespace toxfilter {

namespace detail {

// Scores that should compare equal can differ by rounding noise when they
// travel through text files; compare with a hair of slack.
constexpr double score_eps = 1e-9;

} // namespace detail

/// Groups records by (dataset, parent comment) in first-appearance order and
/// aggregates.  Errored records count into `total` and `excluded` and are
/// left out of every statistic.  A cell whose records all errored keeps NaN
/// means rather than inventing numbers.
inline std::vector<CategorySummary> summarize(const std::vector<ScoreRecord>& records,
                                              const std::vector<Comment>& corpus,
                                              const Cutoffs& cutoffs = {}) {
    std::vector<CategorySummary> cells;
    auto cell_for = [&](const ScoreRecord& r) -> CategorySummary& {
        for (CategorySummary& c : cells) {
            if (c.dataset == r.dataset && c.parent_id == r.parent_id) return c;
        }
        CategorySummary c;
        c.dataset = r.dataset;
        c.parent_id = r.parent_id;
        c.reference = r.reference;
        c.corpus_reference = std::nan("");
        for (const Comment& p : corpus) {
            if (p.id == r.parent_id) {
                c.corpus_reference = p.reference_toxicity;
                break;
            }
        }
        cells.push_back(std::move(c));
        return cells.back();
    };

    struct Samples {
        std::vector<double> raw, filtered, raw_ms, filtered_ms, ratio;
    };
    std::vector<Samples> samples;

    for (const ScoreRecord& r : records) {
        CategorySummary& cell = cell_for(r);
        std::size_t idx = static_cast<std::size_t>(&cell - cells.data());
        if (samples.size() < cells.size()) samples.resize(cells.size());
        Samples& s = samples[idx];
        ++cell.total;
        if (r.error) {
            ++cell.excluded;
            continue;
        }
        s.raw.push_back(r.raw_score);
        s.filtered.push_back(r.filtered_score);
        s.raw_ms.push_back(r.raw_ms);
        s.filtered_ms.push_back(r.filtered_ms);
        if (r.raw_ms > 0.0) s.ratio.push_back(r.filtered_ms / r.raw_ms);
        if (r.raw_score >= r.reference - detail::score_eps) ++cell.raw_ge_reference;
        if (r.filtered_score >= r.reference - detail::score_eps) ++cell.filtered_ge_reference;
        if (r.raw_score < cutoffs.moderate) ++cell.raw_below_moderate;
        if (r.raw_score < cutoffs.stringent) ++cell.raw_below_stringent;
        if (r.filtered_score < cutoffs.moderate) ++cell.filtered_below_moderate;
        if (r.filtered_score < cutoffs.stringent) ++cell.filtered_below_stringent;
    }

    for (std::size_t i = 0; i < cells.size(); ++i) {
        CategorySummary& cell = cells[i];
        const Samples& s = samples[i];
        if (s.raw.empty()) {
            cell.raw_mean = cell.raw_std = cell.filtered_mean = cell.filtered_std = std::nan("");
            cell.raw_time_mean_ms = cell.raw_time_median_ms = std::nan("");
            cell.filtered_time_mean_ms = cell.filtered_time_median_ms = std::nan("");
            cell.median_time_ratio = std::nan("");
            continue;
        }
        cell.raw_mean = mean(s.raw);
        cell.raw_std = sample_stddev(s.raw);
        cell.filtered_mean = mean(s.filtered);
        cell.filtered_std = sample_stddev(s.filtered);
        cell.raw_time_mean_ms = mean(s.raw_ms);
        cell.raw_time_median_ms = median(s.raw_ms);
        cell.filtered_time_mean_ms = mean(s.filtered_ms);
        cell.filtered_time_median_ms = median(s.filtered_ms);
        cell.median_time_ratio = s.ratio.empty() ? std::nan("") : median(s.ratio);
    }
    return cells;
}

/// One-sided Welch test per dataset: is the mean toxicity drop (reference
/// minus score) of raw attacked texts larger than the drop after filtering?
inline std::vector<DatasetSignificance> drop_significance(const std::vector<ScoreRecord>& records) {
    std::vector<DatasetSignificance> out;
    std::vector<std::string> order;
    for (const ScoreRecord& r : records) {
        bool seen = false;
        for (const std::string& d : order) seen = seen || d == r.dataset;
        if (!seen) order.push_back(r.dataset);
    }
    for (const std::string& dataset : order) {
        std::vector<double> raw_drop, filtered_drop;
        for (const ScoreRecord& r : records) {
            if (r.dataset != dataset || r.error) continue;
            raw_drop.push_back(r.reference - r.raw_score);
            filtered_drop.push_back(r.reference - r.filtered_score);
        }
        DatasetSignificance sig;
        sig.dataset = dataset;
        sig.p_value = raw_drop.size() < 2 ? std::nan("") : welch_one_sided_p(raw_drop, filtered_drop);
        out.push_back(std::move(sig));
    }
    return out;
}

inline std::string records_to_csv(const std::vector<ScoreRecord>& records) {
    std::string out =
        "dataset,parent_id,variant_index,attack_kind,reference,raw_score,filtered_score,error,error_detail\n";
    for (const ScoreRecord& r : records) {
        out += detail::csv_quote(r.dataset);
        out += ',';
        out += detail::csv_quote(r.parent_id);
        out += ',';
        out += std::to_string(r.variant_index);
        out += ',';
        out += to_string(r.attack_kind);
        out += ',';
        out += detail::format_fixed(r.reference);
        out += ',';
        out += r.error ? "" : detail::format_fixed(r.raw_score);
        out += ',';
        out += r.error ? "" : detail::format_fixed(r.filtered_score);
        out += ',';
        out += r.error ? '1' : '0';
        out += ',';
        out += detail::csv_quote(r.error_detail);
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw parse_error("unterminated quote", line_no);
    fields.push_back(std::move(cur));
    return fields;
}

} // namespace detail

/// Inverse of records_to_csv.  Timing columns are not persisted, so they
/// come back as zero.
inline std::vector<ScoreRecord> parse_records_csv(const std::string& text) {
    std::vector<ScoreRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_header = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_csv_row(line, line_no);
        if (!saw_header) {
            if (fields.size() != 9 || fields[0] != "dataset")
                throw parse_error("unexpected records header", line_no);
            saw_header = true;
            continue;
        }
        if (fields.size() != 9) throw parse_error("expected 9 columns", line_no);
        ScoreRecord r;
        r.dataset = fields[0];
        r.parent_id = fields[1];
        try {
            r.variant_index = std::stoull(fields[2]);
            r.attack_kind = attack_kind_from_string(fields[3]);
            r.reference = std::stod(fields[4]);
            r.error = fields[7] == "1";
            if (!r.error) {
                r.raw_score = std::stod(fields[5]);
                r.filtered_score = std::stod(fields[6]);
            } else {
                r.raw_score = r.filtered_score = std::nan("");
            }
        } catch (const input_error&) {
            throw;
        } catch (const std::exception& e) {
            throw parse_error(std::string("bad record: ") + e.what(), line_no);
        }
        r.error_detail = fields[8];
        records.push_back(std::move(r));
    }
    if (!saw_header) throw parse_error("records file is empty");
    return records;
}

namespace detail {

inline nlohmann::ordered_json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

} // namespace detail

inline nlohmann::ordered_json summary_to_json(const std::vector<CategorySummary>& cells,
                                              const std::vector<DatasetSignificance>& significance) {
    nlohmann::ordered_json datasets = nlohmann::ordered_json::object();
    for (const CategorySummary& c : cells) {
        datasets[c.dataset][c.parent_id] = {
            {"total", c.total},
            {"excluded", c.excluded},
            {"reference", detail::json_number(c.reference)},
            {"corpus_reference", detail::json_number(c.corpus_reference)},
            {"raw_mean", detail::json_number(c.raw_mean)},
            {"raw_std", detail::json_number(c.raw_std)},
            {"filtered_mean", detail::json_number(c.filtered_mean)},
            {"filtered_std", detail::json_number(c.filtered_std)},
            {"raw_ge_reference", c.raw_ge_reference},
            {"filtered_ge_reference", c.filtered_ge_reference},
            {"raw_below_moderate", c.raw_below_moderate},
            {"raw_below_stringent", c.raw_below_stringent},
            {"filtered_below_moderate", c.filtered_below_moderate},
            {"filtered_below_stringent", c.filtered_below_stringent},
        };
    }
    nlohmann::ordered_json sig = nlohmann::ordered_json::object();
    for (const DatasetSignificance& s : significance)
        sig[s.dataset] = detail::json_number(s.p_value);
    return {{"datasets", datasets}, {"significance", sig}};
}

inline std::string summary_to_csv(const std::vector<CategorySummary>& cells) {
    std::string out =
        "dataset,category,total,excluded,reference,corpus_reference,raw_mean,raw_std,"
        "filtered_mean,filtered_std,raw_ge_reference,filtered_ge_reference,"
        "raw_below_moderate,raw_below_stringent,filtered_below_moderate,filtered_below_stringent\n";
    for (const CategorySummary& c : cells) {
        out += detail::csv_quote(c.dataset);
        out += ',';
        out += detail::csv_quote(c.parent_id);
        out += ',';
        out += std::to_string(c.total);
        out += ',';
        out += std::to_string(c.excluded);
        out += ',';
        out += detail::format_fixed(c.reference);
        out += ',';
        out += detail::format_fixed(c.corpus_reference);
        out += ',';
        out += detail::format_fixed(c.raw_mean);
        out += ',';
        out += detail::format_fixed(c.raw_std);
        out += ',';
        out += detail::format_fixed(c.filtered_mean);
        out += ',';
        out += detail::format_fixed(c.filtered_std);
        out += ',';
        out += std::to_string(c.raw_ge_reference);
        out += ',';
        out += std::to_string(c.filtered_ge_reference);
        out += ',';
        out += std::to_string(c.raw_below_moderate);
        out += ',';
        out += std::to_string(c.raw_below_stringent);
        out += ',';
        out += std::to_string(c.filtered_below_moderate);
        out += ',';
        out += std::to_string(c.filtered_below_stringent);
        out += '\n';
    }
    return out;
}

inline std::string fig_counts_csv(const std::vector<CategorySummary>& cells) {
    std::string out = "dataset,category,total,excluded,raw_ge_reference,filtered_ge_reference\n";
    for (const CategorySummary& c : cells) {
        out += detail::csv_quote(c.dataset);
        out += ',';
        out += detail::csv_quote(c.parent_id);
        out += ',';
        out += std::to_string(c.total);
        out += ',';
        out += std::to_string(c.excluded);
        out += ',';
        out += std::to_string(c.raw_ge_reference);
        out += ',';
        out += std::to_string(c.filtered_ge_reference);
        out += '\n';
    }
    return out;
}

inline std::string timings_csv(const std::vector<CategorySummary>& cells) {
    std::string out =
        "dataset,category,raw_mean_ms,raw_median_ms,filtered_mean_ms,filtered_median_ms,"
        "median_ratio\n";
    for (const CategorySummary& c : cells) {
        out += detail::csv_quote(c.dataset);
        out += ',';
        out += detail::csv_quote(c.parent_id);
        out += ',';
        out += detail::format_fixed(c.raw_time_mean_ms);
        out += ',';
        out += detail::format_fixed(c.raw_time_median_ms);
        out += ',';
        out += detail::format_fixed(c.filtered_time_mean_ms);
        out += ',';
        out += detail::format_fixed(c.filtered_time_median_ms);
        out += ',';
        out += detail::format_fixed(c.median_time_ratio);
        out += '\n';
    }
    return out;
}

/// Writes records.csv, summary.json (or summary.csv), fig_counts.csv and
/// timings.csv into `out_dir`.  Everything except timings.csv is
/// byte-reproducible for a fixed config and inputs.
inline void emit_report(const std::vector<ScoreRecord>& records,
                        const std::vector<CategorySummary>& cells,
                        const std::vector<DatasetSignificance>& significance,
                        const std::string& out_dir, const std::string& format = "json") {
    if (format != "json" && format != "csv")
        throw config_error("report format must be 'json' or 'csv'");
    std::filesystem::create_directories(out_dir);
    auto path = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
    detail::write_file(path("records.csv"), records_to_csv(records));
    if (format == "json") {
        detail::write_file(path("summary.json"), summary_to_json(cells, significance).dump(2) + "\n");
    } else {
        detail::write_file(path("summary.csv"), summary_to_csv(cells));
    }
    detail::write_file(path("fig_counts.csv"), fig_counts_csv(cells));
    detail::write_file(path("timings.csv"), timings_csv(cells));
}

} // namespace toxfilter
