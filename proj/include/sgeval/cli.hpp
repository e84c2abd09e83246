// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Command-line front end: `sgeval eval` and `sgeval validate`.
//
// Exit status: 0 success, 2 invalid input data, 3 I/O failure, 4 bad
// configuration.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sgeval/core.hpp"
#include "sgeval/io/dataset.hpp"
#include "sgeval/io/report.hpp"
#include "sgeval/metrics.hpp"

namespace sgeval::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kIo = 3, kConfig = 4 };

struct Invocation {
    std::string gt_path;
    std::string pred_path;
    double iou_threshold = 0.5;
    std::string mode = "mask";
    std::string k = "20,50,100";
    std::string rel_k = "1,10";
    bool include_infinity = false;
    std::string metrics = "all";
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string output;
    std::string format = "json";
    bool per_image = false;
};

namespace detail {

inline std::vector<std::string> split_commas(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(',', start), text.size());
        auto item = text.substr(start, end - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

inline std::int64_t parse_positive(const std::string& s, const char* what) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 1)
        throw ConfigError(std::string("invalid ") + what + " value '" + s + "'");
    return v;
}

}  // namespace detail

/// Turns command-line settings into an evaluation config.
inline EvalConfig make_config(const Invocation& inv) {
    EvalConfig cfg;
    cfg.iou_threshold = inv.iou_threshold;
    if (inv.mode == "mask")
        cfg.match_mode = MatchMode::Mask;
    else if (inv.mode == "bbox")
        cfg.match_mode = MatchMode::BBox;
    else
        throw ConfigError("unknown mode '" + inv.mode + "' (expected mask or bbox)");

    for (const auto& s : detail::split_commas(inv.k)) cfg.k_specs.push_back(KSpec::absolute(detail::parse_positive(s, "k")));
    for (const auto& s : detail::split_commas(inv.rel_k))
        cfg.k_specs.push_back(KSpec::relative(detail::parse_positive(s, "rel-k")));
    if (inv.include_infinity) cfg.k_specs.push_back(KSpec::infinity());

    if (inv.metrics == "all") {
        cfg.metrics.insert(std::begin(kAllMetrics), std::end(kAllMetrics));
    } else {
        for (const auto& name : detail::split_commas(inv.metrics)) {
            const auto m = parse_metric(name);
            if (!m) throw ConfigError("unknown metric '" + name + "'");
            cfg.metrics.insert(*m);
        }
    }
    cfg.thread_count = inv.threads;
    if (inv.format != "json" && inv.format != "csv")
        throw ConfigError("unknown format '" + inv.format + "' (expected json or csv)");
    cfg.check();
    return cfg;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    }
}

inline int run_validate(const Invocation& inv, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg_mode = make_config(inv).match_mode;
        const auto inputs = load_inputs(inv.gt_path, inv.pred_path);
        const auto violations = validate_inputs(inputs, cfg_mode);
        for (const auto& v : violations) out << to_string(v) << "\n";
        if (!violations.empty()) {
            err << "error: " << violations.size() << " violation(s) found\n";
            return int{kValidation};
        }
        out << "ok: " << inputs.gt.images.size() << " ground-truth images, " << inputs.pred.images.size()
            << " predicted images\n";
        return int{kOk};
    });
}

inline int run_eval(const Invocation& inv, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = make_config(inv);
        const auto inputs = load_inputs(inv.gt_path, inv.pred_path);
        // Structural problems only; mask files are checked as they load.
        const auto violations = validate_inputs(inputs, MatchMode::BBox);
        if (!violations.empty()) {
            err << "error: " << to_string(violations.front());
            if (violations.size() > 1) err << " (and " << violations.size() - 1 << " more)";
            err << "\n";
            return int{kValidation};
        }
        const auto report = evaluate_inputs(inputs, cfg);
        out << render_table(report);
        if (!inv.output.empty())
            write_report(report, inv.output, inv.format == "csv" ? ReportFormat::Csv : ReportFormat::Json,
                         inv.per_image);
        return int{kOk};
    });
}

/// Parses argv and dispatches. Usage errors exit with kConfig.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Scene graph generation evaluation"};
    app.require_subcommand(1);
    Invocation inv;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--gt", inv.gt_path, "Ground-truth JSON file")->required();
        sub->add_option("--pred", inv.pred_path, "Prediction (triplet) JSON file")->required();
        sub->add_option("--mode", inv.mode, "Instance matching on 'mask' or 'bbox'")->capture_default_str();
        sub->add_option("--iou-threshold", inv.iou_threshold, "Matching requires IoU strictly above this")
            ->capture_default_str();
    };

    auto* eval = app.add_subcommand("eval", "Evaluate a prediction file against ground truth");
    add_common(eval);
    eval->add_option("--k", inv.k, "Comma list of absolute k")->capture_default_str();
    eval->add_option("--rel-k", inv.rel_k, "Comma list of relative k factors")->capture_default_str();
    eval->add_flag("--include-infinity", inv.include_infinity, "Also report k = infinity");
    eval->add_option("--metrics", inv.metrics, "Comma list of R,mR,PR,ngR,mNgR,InstR,PRank or 'all'")
        ->capture_default_str();
    eval->add_option("--threads", inv.threads, "Worker threads")->capture_default_str();
    eval->add_option("--output", inv.output, "Write the report to this file");
    eval->add_option("--format", inv.format, "Report file format: json or csv")->capture_default_str();
    eval->add_flag("--per-image", inv.per_image, "Include per-image scores in the report file");

    auto* validate = app.add_subcommand("validate", "Check files without evaluating");
    add_common(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help
        err << "error: " << e.what() << "\n";
        return kConfig;
    }

    if (eval->parsed()) return run_eval(inv, out, err);
    return run_validate(inv, out, err);
}

}  // namespace sgeval::cli
