// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "sgeval/core.hpp"
#include "sgeval/io/file.hpp"

namespace sgeval {

enum class ReportFormat { Json, Csv };

/// Fixed four-decimal rendering; "nan" when no image contributed.
inline std::string format_score(double score) {
    if (std::isnan(score)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", score);
    return buf;
}

namespace detail {

// Score rounded to four decimals as a JSON number, null when undefined.
inline nlohmann::ordered_json json_score(double score) {
    if (std::isnan(score)) return nullptr;
    return nlohmann::ordered_json::parse(format_score(score));
}

inline void require_entries(const MetricReport& report) {
    if (report.entries.empty()) throw ConfigError("nothing to report");
}

}  // namespace detail

/// {"scores": {"R@50": 0.4871, ...}, "images_counted": {"R@50": 12, ...},
///  "per_image": {"R@50": [[id, score], ...], ...}}  (per_image optional)
inline std::string render_json(const MetricReport& report, bool per_image = false) {
    detail::require_entries(report);
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    nlohmann::ordered_json counted = nlohmann::ordered_json::object();
    nlohmann::ordered_json images = nlohmann::ordered_json::object();
    for (const auto& e : report.entries) {
        const auto label = e.label();
        scores[label] = detail::json_score(e.score);
        counted[label] = e.images_counted;
        if (per_image) {
            auto rows = nlohmann::ordered_json::array();
            for (const auto& [id, s] : e.per_image) rows.push_back({id, detail::json_score(s)});
            images[label] = std::move(rows);
        }
    }
    nlohmann::ordered_json root;
    root["scores"] = std::move(scores);
    root["images_counted"] = std::move(counted);
    if (per_image) root["per_image"] = std::move(images);
    return root.dump(2) + "\n";
}

/// Header "metric,score,images_counted"; per-image rows, when requested,
/// follow as "metric,image_id,score" after a blank line.
inline std::string render_csv(const MetricReport& report, bool per_image = false) {
    detail::require_entries(report);
    std::string out = "metric,score,images_counted\n";
    for (const auto& e : report.entries)
        out += e.label() + "," + format_score(e.score) + "," + std::to_string(e.images_counted) + "\n";
    if (per_image) {
        out += "\nmetric,image_id,score\n";
        for (const auto& e : report.entries)
            for (const auto& [id, s] : e.per_image)
                out += e.label() + "," + std::to_string(id) + "," + format_score(s) + "\n";
    }
    return out;
}

/// Aligned plain-text table for terminals.
inline std::string render_table(const MetricReport& report) {
    detail::require_entries(report);
    std::size_t width = 6;
    for (const auto& e : report.entries) width = std::max(width, e.label().size());
    auto pad = [&](std::string s) {
        s.resize(width, ' ');
        return s;
    };
    std::string out = pad("metric") + "   score    images\n";
    for (const auto& e : report.entries) {
        std::string score = format_score(e.score);
        score.insert(0, score.size() < 6 ? 6 - score.size() : 0, ' ');
        out += pad(e.label()) + "  " + score + "  " + std::to_string(e.images_counted) + "\n";
    }
    return out;
}

inline void write_report(const MetricReport& report, const std::filesystem::path& path, ReportFormat format,
                         bool per_image = false) {
    io::write_file_text(path, format == ReportFormat::Json ? render_json(report, per_image)
                                                          : render_csv(report, per_image));
}

}  // namespace sgeval
