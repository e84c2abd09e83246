// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgeval/core.hpp"
#include "sgeval/mask.hpp"

namespace sgeval {

/// Intersection over union of two axis-aligned boxes (continuous area).
/// Zero when the union is empty.
inline double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    const double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

/// Pixel IoU. Throws std::invalid_argument on a dimension mismatch.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument("mask iou: dimension mismatch (" + std::to_string(a.width()) + "x" +
                                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                                    std::to_string(b.height()) + ")");
    const auto wa = a.words();
    const auto wb = b.words();
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < wa.size(); ++i) {
        inter += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
        uni += static_cast<std::size_t>(std::popcount(wa[i] | wb[i]));
    }
    return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

/// Injective association predicted instance -> ground-truth instance.
class MatchMapping {
public:
    MatchMapping() = default;
    MatchMapping(std::size_t pred_count, std::size_t gt_count)
        : pred_to_gt_(pred_count), gt_to_pred_(gt_count) {}

    /// Build from explicit pairs. Throws std::invalid_argument if the pairs
    /// are not injective or out of range.
    static MatchMapping from_pairs(std::size_t pred_count, std::size_t gt_count,
                                   std::span<const InstancePair> pairs) {
        MatchMapping m(pred_count, gt_count);
        for (auto [p, g] : pairs) {
            if (p < 0 || g < 0 || static_cast<std::size_t>(p) >= pred_count ||
                static_cast<std::size_t>(g) >= gt_count)
                throw std::invalid_argument("mapping pair out of range");
            if (m.pred_to_gt_[p] || m.gt_to_pred_[g]) throw std::invalid_argument("mapping is not injective");
            m.assign(p, g);
        }
        return m;
    }

    std::size_t pred_count() const { return pred_to_gt_.size(); }
    std::size_t gt_count() const { return gt_to_pred_.size(); }

    bool has_pred(std::int64_t pred) const {
        return pred >= 0 && static_cast<std::size_t>(pred) < pred_to_gt_.size() && pred_to_gt_[pred].has_value();
    }
    bool has_gt(std::int64_t gt) const {
        return gt >= 0 && static_cast<std::size_t>(gt) < gt_to_pred_.size() && gt_to_pred_[gt].has_value();
    }
    std::int64_t gt_of(std::int64_t pred) const { return *pred_to_gt_.at(static_cast<std::size_t>(pred)); }
    std::int64_t pred_of(std::int64_t gt) const { return *gt_to_pred_.at(static_cast<std::size_t>(gt)); }

    std::size_t size() const {
        return static_cast<std::size_t>(
            std::count_if(pred_to_gt_.begin(), pred_to_gt_.end(), [](const auto& v) { return v.has_value(); }));
    }
    bool empty() const { return size() == 0; }

    /// Pairs sorted by predicted index.
    std::vector<InstancePair> pairs() const {
        std::vector<InstancePair> out;
        for (std::size_t p = 0; p < pred_to_gt_.size(); ++p)
            if (pred_to_gt_[p]) out.emplace_back(static_cast<std::int64_t>(p), *pred_to_gt_[p]);
        return out;
    }

    /// Claim gt for pred, releasing whatever pred held gt before.
    void assign(std::int64_t pred, std::int64_t gt) {
        if (auto& old = gt_to_pred_[gt]) pred_to_gt_[*old].reset();
        gt_to_pred_[gt] = pred;
        pred_to_gt_[pred] = gt;
    }

    friend bool operator==(const MatchMapping&, const MatchMapping&) = default;

private:
    std::vector<std::optional<std::int64_t>> pred_to_gt_;
    std::vector<std::optional<std::int64_t>> gt_to_pred_;
};

/// Greedy class-respecting instance matching.
///
/// Predicted instances are visited in list order. Each picks the same-class
/// ground-truth instance with the highest IoU (lowest index on ties); it
/// claims that instance if the IoU is strictly above `threshold` and either
/// nobody holds it yet or the incumbent's IoU is strictly lower. A displaced
/// incumbent stays unmatched.
///
/// `iou_of(pred_index, gt_index)` is only called for same-class pairs.
template <class IouFn>
MatchMapping get_mapping(std::span<const Instance> pred, std::span<const Instance> gt, double threshold,
                         IouFn&& iou_of) {
    MatchMapping mapping(pred.size(), gt.size());
    std::vector<double> held_iou(gt.size(), 0.0);

    for (std::size_t m = 0; m < pred.size(); ++m) {
        std::optional<std::size_t> best;
        double best_iou = 0.0;
        for (std::size_t g = 0; g < gt.size(); ++g) {
            if (gt[g].category != pred[m].category) continue;
            const double v = iou_of(m, g);
            if (!best || v > best_iou) {
                best = g;
                best_iou = v;
            }
        }
        if (!best || !(best_iou > threshold)) continue;

        const auto x = static_cast<std::int64_t>(*best);
        if (!mapping.has_gt(x) || best_iou > held_iou[*best]) {
            mapping.assign(static_cast<std::int64_t>(m), x);
            held_iou[*best] = best_iou;
        }
    }
    return mapping;
}

/// Box-mode matching.
inline MatchMapping get_mapping(std::span<const Instance> pred, std::span<const Instance> gt, double threshold) {
    return get_mapping(pred, gt, threshold,
                       [&](std::size_t m, std::size_t g) { return iou(pred[m].bbox, gt[g].bbox); });
}

/// Matching between two image records in the given mode. In mask mode every
/// instance must have a resident mask.
inline MatchMapping get_mapping(const ImageRecord& pred, const ImageRecord& gt, double threshold, MatchMode mode) {
    if (mode == MatchMode::BBox) return get_mapping(pred.instances, gt.instances, threshold);

    auto require_masks = [](const ImageRecord& rec, const char* what) {
        if (rec.masks.size() != rec.instances.size())
            throw ValidationError("image " + std::to_string(rec.id) + ": " + what + " has " +
                                  std::to_string(rec.instances.size()) + " instances but " +
                                  std::to_string(rec.masks.size()) + " masks");
    };
    require_masks(pred, "prediction");
    require_masks(gt, "ground truth");
    return get_mapping(pred.instances, gt.instances, threshold, [&](std::size_t m, std::size_t g) {
        const auto& a = pred.masks[m];
        const auto& b = gt.masks[g];
        if (a.width() != b.width() || a.height() != b.height())
            throw ValidationError("image " + std::to_string(gt.id) + ": predicted mask " + std::to_string(m) +
                                  " is " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                  ", ground truth is " + std::to_string(b.width()) + "x" +
                                  std::to_string(b.height()));
        return iou(a, b);
    });
}

/// Rewrites selected triplets (over predicted indices) into ground-truth
/// indices, dropping any triplet with an unmatched endpoint.
inline TripletSet apply_matching(const MatchMapping& mapping, std::span<const Triplet> selected) {
    TripletSet out;
    for (const auto& t : selected)
        if (mapping.has_pred(t.sbj) && mapping.has_pred(t.obj))
            out.insert({mapping.gt_of(t.sbj), t.predicate, mapping.gt_of(t.obj)});
    return out;
}

/// Same rewrite, preserving order and dropping exact repeats (first wins).
inline std::vector<Triplet> apply_matching_ordered(const MatchMapping& mapping, std::span<const Triplet> ordered) {
    std::vector<Triplet> out;
    TripletSet seen;
    for (const auto& t : ordered) {
        if (!mapping.has_pred(t.sbj) || !mapping.has_pred(t.obj)) continue;
        Triplet g{mapping.gt_of(t.sbj), t.predicate, mapping.gt_of(t.obj)};
        if (seen.insert(g).second) out.push_back(g);
    }
    return out;
}

/// Fraction of ground-truth instances that received a prediction.
/// Caller skips images with gt_count == 0.
inline double instance_recall(const MatchMapping& mapping, std::size_t gt_count) {
    return static_cast<double>(mapping.size()) / static_cast<double>(gt_count);
}

}  // namespace sgeval
