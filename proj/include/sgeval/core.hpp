// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "sgeval/mask.hpp"

namespace sgeval {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unsupported file content (JSON, TIFF, PNG).
class FormatError : public Error {
public:
    using Error::Error;
};

/// The file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Inconsistent evaluation settings.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Data violates a dataset invariant (e.g. id mismatch between files).
class ValidationError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct BBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    double area() const { return std::max(0.0, x2 - x1) * std::max(0.0, y2 - y1); }
    friend bool operator==(const BBox&, const BBox&) = default;
};

/// One visual object: class label plus box. Its mask, when present, lives in
/// the owning ImageRecord at the same index.
struct Instance {
    std::int64_t category = 0;
    BBox bbox;

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// (subject, predicate, object). Subject and object index the owning record's
/// instance list. Carries no confidence score; order in a sequence does.
struct Triplet {
    std::int64_t sbj = 0;
    std::int64_t predicate = 0;
    std::int64_t obj = 0;

    friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

using TripletSet = std::set<Triplet>;
using InstancePair = std::pair<std::int64_t, std::int64_t>;

struct ImageRecord {
    std::int64_t id = 0;
    std::int64_t width = 0;
    std::int64_t height = 0;
    std::vector<Instance> instances;
    /// Descending confidence for predictions; set semantics for ground truth.
    std::vector<Triplet> triplets;
    /// Mask file, relative to the directory of the JSON file it came from.
    std::optional<std::string> mask_source;
    /// Decoded masks, one per instance, when already resident in memory.
    std::vector<BinaryMask> masks;

    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct DatasetMeta {
    std::vector<std::string> predicate_classes;
    std::vector<std::string> instance_classes;

    std::size_t num_predicates() const { return predicate_classes.size(); }
    std::size_t num_instance_classes() const { return instance_classes.size(); }
    friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

/// Triplet budget per image.
class KSpec {
public:
    enum class Kind { Absolute, Relative, Infinity };

    static KSpec absolute(std::int64_t n) {
        if (n < 1) throw ConfigError("absolute k must be >= 1, got " + std::to_string(n));
        return KSpec(Kind::Absolute, n);
    }
    static KSpec relative(std::int64_t factor) {
        if (factor < 1) throw ConfigError("relative k must be >= 1, got " + std::to_string(factor));
        return KSpec(Kind::Relative, factor);
    }
    static KSpec infinity() { return KSpec(Kind::Infinity, 0); }

    Kind kind() const { return kind_; }
    std::int64_t value() const { return value_; }
    bool is_infinite() const { return kind_ == Kind::Infinity; }

    /// Number of triplets allowed for an image with `gt_count` annotations;
    /// nullopt means unbounded.
    std::optional<std::int64_t> resolve(std::size_t gt_count) const {
        switch (kind_) {
        case Kind::Absolute: return value_;
        case Kind::Relative: return value_ * static_cast<std::int64_t>(gt_count);
        case Kind::Infinity: break;
        }
        return std::nullopt;
    }

    /// "50", "x10", "inf".
    std::string label() const {
        switch (kind_) {
        case Kind::Absolute: return std::to_string(value_);
        case Kind::Relative: return "x" + std::to_string(value_);
        case Kind::Infinity: break;
        }
        return "inf";
    }

    // Absolute ascending, then relative ascending, infinity last.
    friend auto operator<=>(const KSpec& a, const KSpec& b) {
        return std::tie(a.kind_, a.value_) <=> std::tie(b.kind_, b.value_);
    }
    friend bool operator==(const KSpec&, const KSpec&) = default;

private:
    KSpec(Kind kind, std::int64_t value) : kind_(kind), value_(value) {}

    Kind kind_;
    std::int64_t value_;
};

enum class MatchMode { Mask, BBox };

enum class Metric { R, mR, PR, ngR, mNgR, InstR, PRank };

inline constexpr Metric kAllMetrics[] = {Metric::R,    Metric::mR,    Metric::PR,   Metric::ngR,
                                         Metric::mNgR, Metric::InstR, Metric::PRank};

inline std::string_view metric_name(Metric m) {
    switch (m) {
    case Metric::R: return "R";
    case Metric::mR: return "mR";
    case Metric::PR: return "PR";
    case Metric::ngR: return "ngR";
    case Metric::mNgR: return "mNgR";
    case Metric::InstR: return "InstR";
    case Metric::PRank: return "PRank";
    }
    return "?";
}

inline std::optional<Metric> parse_metric(std::string_view name) {
    for (Metric m : kAllMetrics)
        if (metric_name(m) == name) return m;
    return std::nullopt;
}

/// True for the metrics that take a triplet budget.
inline bool is_k_metric(Metric m) {
    return m != Metric::InstR && m != Metric::PRank;
}

struct EvalConfig {
    double iou_threshold = 0.5;
    MatchMode match_mode = MatchMode::Mask;
    std::vector<KSpec> k_specs;
    std::set<Metric> metrics;
    unsigned thread_count = 1;

    /// Throws ConfigError when the settings cannot produce a report.
    void check() const {
        if (!(iou_threshold > 0.0 && iou_threshold < 1.0))
            throw ConfigError("iou threshold must lie in (0, 1)");
        if (thread_count == 0) throw ConfigError("thread count must be positive");
        if (metrics.empty()) throw ConfigError("no metrics requested");
        const bool wants_k = std::any_of(metrics.begin(), metrics.end(), is_k_metric);
        if (wants_k && k_specs.empty())
            throw ConfigError("k-parameterized metrics requested but no k given");
    }
};

/// One row of a report: a metric at one budget (or a k-free metric).
struct MetricEntry {
    Metric metric = Metric::R;
    std::optional<KSpec> k;
    double score = 0.0;  // NaN when no image contributed
    std::size_t images_counted = 0;
    /// (image id, score) for every contributing image, in dataset order.
    std::vector<std::pair<std::int64_t, double>> per_image;

    /// "R@50", "mR@x10", "ngR@inf", "InstR".
    std::string label() const {
        std::string out(metric_name(metric));
        if (k) out += "@" + k->label();
        return out;
    }
};

struct MetricReport {
    std::vector<MetricEntry> entries;
    std::size_t image_count = 0;

    const MetricEntry* find(std::string_view label) const {
        for (const auto& e : entries)
            if (e.label() == label) return &e;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
    std::int64_t image_id = 0;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::string to_string(const Violation& v) {
    return "image " + std::to_string(v.image_id) + ": " + v.message;
}

/// Structural checks on a list of records against the dataset catalogs.
/// Violations are returned, never thrown.
inline std::vector<Violation> validate_dataset(const std::vector<ImageRecord>& records,
                                               const DatasetMeta& meta) {
    std::vector<Violation> out;
    std::set<std::int64_t> seen_ids;
    const auto num_classes = static_cast<std::int64_t>(meta.num_instance_classes());
    const auto num_predicates = static_cast<std::int64_t>(meta.num_predicates());

    for (const auto& rec : records) {
        auto add = [&](std::string msg) { out.push_back({rec.id, std::move(msg)}); };

        if (!seen_ids.insert(rec.id).second) add("duplicate image id");
        if (rec.width < 0 || rec.height < 0) add("negative image dimensions");

        const auto n = static_cast<std::int64_t>(rec.instances.size());
        for (std::int64_t i = 0; i < n; ++i) {
            const auto& inst = rec.instances[static_cast<std::size_t>(i)];
            const std::string tag = "instance " + std::to_string(i) + ": ";
            if (inst.category < 0 || inst.category >= num_classes)
                add(tag + "category " + std::to_string(inst.category) + " out of range");
            if (inst.bbox.x1 > inst.bbox.x2) add(tag + "x1 > x2");
            if (inst.bbox.y1 > inst.bbox.y2) add(tag + "y1 > y2");
        }

        for (std::size_t t = 0; t < rec.triplets.size(); ++t) {
            const auto& tr = rec.triplets[t];
            const std::string tag = "triplet " + std::to_string(t) + ": ";
            if (tr.sbj < 0 || tr.sbj >= n)
                add(tag + "sbj index " + std::to_string(tr.sbj) + " out of range");
            if (tr.obj < 0 || tr.obj >= n)
                add(tag + "obj index " + std::to_string(tr.obj) + " out of range");
            if (tr.predicate < 0 || tr.predicate >= num_predicates)
                add(tag + "predicate " + std::to_string(tr.predicate) + " out of range");
        }

        if (!rec.masks.empty()) {
            if (rec.masks.size() != rec.instances.size())
                add("mask count " + std::to_string(rec.masks.size()) + " does not match instance count " +
                    std::to_string(rec.instances.size()));
            for (std::size_t i = 0; i < rec.masks.size(); ++i) {
                const auto& m = rec.masks[i];
                if (static_cast<std::int64_t>(m.width()) != rec.width ||
                    static_cast<std::int64_t>(m.height()) != rec.height)
                    add("mask " + std::to_string(i) + " is " + std::to_string(m.width()) + "x" +
                        std::to_string(m.height()) + ", image is " + std::to_string(rec.width) + "x" +
                        std::to_string(rec.height));
            }
        }
    }
    return out;
}

/// Catalog checks: both lists non-empty, names unique.
inline std::vector<std::string> validate_meta(const DatasetMeta& meta) {
    std::vector<std::string> out;
    auto check = [&](const std::vector<std::string>& names, const char* what) {
        if (names.empty()) out.push_back(std::string(what) + " list is empty");
        std::set<std::string> uniq(names.begin(), names.end());
        if (uniq.size() != names.size()) out.push_back(std::string(what) + " names are not unique");
    };
    check(meta.predicate_classes, "predicate class");
    check(meta.instance_classes, "instance class");
    return out;
}

/// Ground truth is a set: drop repeated triplets, keeping first occurrences.
inline std::vector<Triplet> dedupe_keep_first(const std::vector<Triplet>& triplets) {
    std::vector<Triplet> out;
    out.reserve(triplets.size());
    std::set<Triplet> seen;
    for (const auto& t : triplets)
        if (seen.insert(t).second) out.push_back(t);
    return out;
}

}  // namespace sgeval
