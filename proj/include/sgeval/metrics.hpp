// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sgeval/core.hpp"
#include "sgeval/geometry.hpp"

namespace sgeval {

// ---------------------------------------------------------------------------
// Triplet selection
// ---------------------------------------------------------------------------

enum class Constraint {
    Graph,    ///< at most one triplet per (sbj, obj)
    NoGraph,  ///< any number per (sbj, obj) as long as predicates differ
};

struct SelectionRule {
    Constraint constraint = Constraint::Graph;
    std::optional<std::int64_t> budget;  ///< nullopt = unbounded
};

/// Scans `ordered` front to back keeping admissible triplets until the budget
/// is used up. Exact repeats are always dropped (first occurrence wins).
inline std::vector<Triplet> select_triplets(std::span<const Triplet> ordered, const SelectionRule& rule) {
    std::vector<Triplet> out;
    if (rule.budget && *rule.budget <= 0) return out;

    std::set<InstancePair> pairs;
    std::set<Triplet> seen;
    for (const auto& t : ordered) {
        if (rule.budget && static_cast<std::int64_t>(out.size()) >= *rule.budget) break;
        const bool fresh = rule.constraint == Constraint::Graph ? pairs.insert({t.sbj, t.obj}).second
                                                                : seen.insert(t).second;
        if (fresh) out.push_back(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-image scores. All of them require a non-empty ground-truth set; the
// dataset framework skips images where it is empty.
// ---------------------------------------------------------------------------

inline double recall_at_k(const TripletSet& gt, const TripletSet& matched) {
    std::size_t hits = 0;
    for (const auto& t : gt) hits += matched.count(t);
    return static_cast<double>(hits) / static_cast<double>(gt.size());
}

namespace detail {

// Per-predicate (hits, total) over gt, where `hit(t)` decides each gt triplet.
template <class HitFn>
double mean_over_predicates(const TripletSet& gt, HitFn&& hit) {
    std::map<std::int64_t, std::pair<std::size_t, std::size_t>> per_predicate;
    for (const auto& t : gt) {
        auto& [hits, total] = per_predicate[t.predicate];
        ++total;
        if (hit(t)) ++hits;
    }
    double sum = 0.0;
    for (const auto& [p, counts] : per_predicate)
        sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
    return sum / static_cast<double>(per_predicate.size());
}

inline std::set<InstancePair> strip_predicates(const TripletSet& triplets) {
    std::set<InstancePair> out;
    for (const auto& t : triplets) out.insert({t.sbj, t.obj});
    return out;
}

}  // namespace detail

/// Recall computed per predicate class present in `gt`, then averaged with
/// equal weights.
inline double mean_recall_at_k(const TripletSet& gt, const TripletSet& matched) {
    return detail::mean_over_predicates(gt, [&](const Triplet& t) { return matched.count(t) > 0; });
}

/// Recall over (sbj, obj) pairs; predicates are ignored on both sides.
inline double pair_recall_at_k(const TripletSet& gt, const TripletSet& matched) {
    const auto gt_pairs = detail::strip_predicates(gt);
    const auto matched_pairs = detail::strip_predicates(matched);
    std::size_t hits = 0;
    for (const auto& p : gt_pairs) hits += matched_pairs.count(p);
    return static_cast<double>(hits) / static_cast<double>(gt_pairs.size());
}

/// Best achievable recall given only which ground-truth instances matched.
inline double recall_at_infinity(const TripletSet& gt, const MatchMapping& mapping) {
    std::size_t hits = 0;
    for (const auto& t : gt)
        if (mapping.has_gt(t.sbj) && mapping.has_gt(t.obj)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(gt.size());
}

inline double mean_recall_at_infinity(const TripletSet& gt, const MatchMapping& mapping) {
    return detail::mean_over_predicates(
        gt, [&](const Triplet& t) { return mapping.has_gt(t.sbj) && mapping.has_gt(t.obj); });
}

inline double pair_recall_at_infinity(const TripletSet& gt, const MatchMapping& mapping) {
    const auto gt_pairs = detail::strip_predicates(gt);
    std::size_t hits = 0;
    for (const auto& [s, o] : gt_pairs)
        if (mapping.has_gt(s) && mapping.has_gt(o)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(gt_pairs.size());
}

/// Average rank (0 = best) of the ground-truth predicate among the model's
/// predicates for the same pair.
///
/// `matched_sequence` holds every matched triplet in confidence order, over
/// ground-truth indices, without exact repeats. A triplet's rank is the
/// number of earlier triplets sharing its (sbj, obj). Ranks are averaged per
/// predicate class, then across classes; unmatched gt triplets and classes
/// without any ranked triplet are left out. Returns nullopt if nothing was
/// ranked.
inline std::optional<double> predicate_rank(const TripletSet& gt, std::span<const Triplet> matched_sequence) {
    std::map<Triplet, std::size_t> rank_of;
    std::map<InstancePair, std::size_t> seen_for_pair;
    for (const auto& t : matched_sequence) {
        auto& count = seen_for_pair[{t.sbj, t.obj}];
        rank_of.try_emplace(t, count);
        ++count;
    }

    std::map<std::int64_t, std::pair<double, std::size_t>> per_predicate;  // rank sum, count
    for (const auto& t : gt) {
        auto it = rank_of.find(t);
        if (it == rank_of.end()) continue;
        auto& [sum, n] = per_predicate[t.predicate];
        sum += static_cast<double>(it->second);
        ++n;
    }
    if (per_predicate.empty()) return std::nullopt;

    double total = 0.0;
    for (const auto& [p, acc] : per_predicate) total += acc.first / static_cast<double>(acc.second);
    return total / static_cast<double>(per_predicate.size());
}

// ---------------------------------------------------------------------------
// Image-level evaluation
// ---------------------------------------------------------------------------

/// One report column: a metric at one budget, or a k-free metric.
struct Column {
    Metric metric = Metric::R;
    std::optional<KSpec> k;

    friend bool operator==(const Column&, const Column&) = default;
};

/// Report columns in presentation order: metrics R, mR, PR, ngR, mNgR,
/// InstR, PRank; absolute k ascending, then relative, then infinity.
inline std::vector<Column> build_columns(const EvalConfig& config) {
    std::vector<KSpec> ks = config.k_specs;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    std::vector<Column> cols;
    for (Metric m : kAllMetrics) {
        if (!config.metrics.count(m)) continue;
        if (is_k_metric(m))
            for (const auto& k : ks) cols.push_back({m, k});
        else
            cols.push_back({m, std::nullopt});
    }
    return cols;
}

/// Scores for one image, one entry per column; nullopt where the image is
/// skipped. Both records must already hold masks in mask mode.
inline std::vector<std::optional<double>> evaluate_image(const ImageRecord& gt, const ImageRecord& pred,
                                                         const EvalConfig& config, std::span<const Column> columns) {
    std::vector<std::optional<double>> scores(columns.size());
    if (columns.empty()) return scores;

    const auto gt_list = dedupe_keep_first(gt.triplets);
    const TripletSet gt_set(gt_list.begin(), gt_list.end());
    const MatchMapping mapping = get_mapping(pred, gt, config.iou_threshold, config.match_mode);

    // Matched sets per (constraint, resolved budget); several k may resolve
    // to the same budget on one image.
    std::map<std::pair<Constraint, std::int64_t>, TripletSet> matched_cache;
    auto matched_for = [&](Constraint c, std::int64_t budget) -> const TripletSet& {
        auto key = std::make_pair(c, budget);
        auto it = matched_cache.find(key);
        if (it == matched_cache.end()) {
            const auto selected = select_triplets(pred.triplets, {c, budget});
            it = matched_cache.emplace(key, apply_matching(mapping, selected)).first;
        }
        return it->second;
    };

    for (std::size_t i = 0; i < columns.size(); ++i) {
        const auto& col = columns[i];
        switch (col.metric) {
        case Metric::InstR:
            if (!gt.instances.empty()) scores[i] = instance_recall(mapping, gt.instances.size());
            break;
        case Metric::PRank: {
            if (gt_set.empty()) break;
            const auto sequence = apply_matching_ordered(mapping, pred.triplets);
            scores[i] = predicate_rank(gt_set, sequence);
            break;
        }
        default: {
            if (gt_set.empty()) break;
            if (col.k->is_infinite()) {
                // The graph constraint has no effect at an unbounded budget.
                switch (col.metric) {
                case Metric::R:
                case Metric::ngR: scores[i] = recall_at_infinity(gt_set, mapping); break;
                case Metric::mR:
                case Metric::mNgR: scores[i] = mean_recall_at_infinity(gt_set, mapping); break;
                case Metric::PR: scores[i] = pair_recall_at_infinity(gt_set, mapping); break;
                default: break;
                }
                break;
            }
            const auto budget = *col.k->resolve(gt_set.size());
            const bool no_graph = col.metric == Metric::ngR || col.metric == Metric::mNgR;
            const auto& matched = matched_for(no_graph ? Constraint::NoGraph : Constraint::Graph, budget);
            switch (col.metric) {
            case Metric::R:
            case Metric::ngR: scores[i] = recall_at_k(gt_set, matched); break;
            case Metric::mR:
            case Metric::mNgR: scores[i] = mean_recall_at_k(gt_set, matched); break;
            case Metric::PR: scores[i] = pair_recall_at_k(gt_set, matched); break;
            default: break;
            }
        }
        }
    }
    return scores;
}

// ---------------------------------------------------------------------------
// Dataset-level framework
// ---------------------------------------------------------------------------

enum class Role { GroundTruth, Prediction };

/// Mask loader used when masks are expected to be resident already.
struct ResidentMasksOnly {
    std::vector<BinaryMask> operator()(const ImageRecord& rec, Role role) const {
        throw ValidationError("image " + std::to_string(rec.id) + ": " +
                              (role == Role::GroundTruth ? "ground-truth" : "predicted") +
                              " masks are not loaded");
    }
};

namespace detail {

inline std::vector<std::optional<std::size_t>> align_predictions(const std::vector<ImageRecord>& gt,
                                                                 const std::vector<ImageRecord>& pred) {
    std::unordered_map<std::int64_t, std::size_t> gt_index;
    for (std::size_t i = 0; i < gt.size(); ++i)
        if (!gt_index.emplace(gt[i].id, i).second)
            throw ValidationError("duplicate ground-truth image id " + std::to_string(gt[i].id));

    std::vector<std::optional<std::size_t>> pred_for_gt(gt.size());
    for (std::size_t j = 0; j < pred.size(); ++j) {
        auto it = gt_index.find(pred[j].id);
        if (it == gt_index.end())
            throw ValidationError("prediction for image id " + std::to_string(pred[j].id) +
                                  " has no ground-truth counterpart");
        if (pred_for_gt[it->second])
            throw ValidationError("duplicate prediction image id " + std::to_string(pred[j].id));
        pred_for_gt[it->second] = j;
    }
    return pred_for_gt;
}

}  // namespace detail

/// Runs the per-image pipeline over every ground-truth image and averages
/// each column over the images that contribute to it.
///
/// Ground-truth images without a prediction record are scored against an
/// empty prediction. Images are distributed over `config.thread_count`
/// workers; per-image results are reduced in dataset order, so the report
/// does not depend on the thread count.
///
/// `load_masks(record, role)` is called in mask mode for records whose
/// masks are not resident; it may run concurrently for different images.
template <class MaskLoader>
MetricReport evaluate_dataset(const std::vector<ImageRecord>& gt, const std::vector<ImageRecord>& pred,
                              const EvalConfig& config, MaskLoader&& load_masks) {
    config.check();
    const auto columns = build_columns(config);
    const auto pred_for_gt = detail::align_predictions(gt, pred);
    const std::size_t n = gt.size();

    std::vector<std::vector<std::optional<double>>> per_image(n);
    std::vector<std::exception_ptr> errors(n);

    auto with_masks = [&](const ImageRecord& rec, Role role) -> std::optional<ImageRecord> {
        if (config.match_mode != MatchMode::Mask || rec.instances.empty() ||
            rec.masks.size() == rec.instances.size())
            return std::nullopt;
        ImageRecord copy = rec;
        copy.masks = load_masks(rec, role);
        return copy;
    };

    auto process = [&](std::size_t i) {
        try {
            const ImageRecord& g = gt[i];
            ImageRecord empty_pred;
            empty_pred.id = g.id;
            empty_pred.width = g.width;
            empty_pred.height = g.height;
            const ImageRecord& p = pred_for_gt[i] ? pred[*pred_for_gt[i]] : empty_pred;

            const auto g_loaded = with_masks(g, Role::GroundTruth);
            const auto p_loaded = with_masks(p, Role::Prediction);
            per_image[i] = evaluate_image(g_loaded ? *g_loaded : g, p_loaded ? *p_loaded : p, config, columns);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const std::size_t workers = std::min<std::size_t>(config.thread_count, std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) process(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) process(i);
            });
    }

    // First failure in dataset order, independent of scheduling.
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    MetricReport report;
    report.image_count = n;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        MetricEntry entry;
        entry.metric = columns[c].metric;
        entry.k = columns[c].k;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (const auto& s = per_image[i][c]) {
                sum += *s;
                entry.per_image.emplace_back(gt[i].id, *s);
            }
        }
        entry.images_counted = entry.per_image.size();
        entry.score = entry.images_counted ? sum / static_cast<double>(entry.images_counted)
                                           : std::numeric_limits<double>::quiet_NaN();
        report.entries.push_back(std::move(entry));
    }
    return report;
}

/// Overload for records whose masks are resident (or for box mode).
inline MetricReport evaluate_dataset(const std::vector<ImageRecord>& gt, const std::vector<ImageRecord>& pred,
                                     const EvalConfig& config) {
    return evaluate_dataset(gt, pred, config, ResidentMasksOnly{});
}

}  // namespace sgeval
