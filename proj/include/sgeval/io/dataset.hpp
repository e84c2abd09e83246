// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgeval/core.hpp"
#include "sgeval/io/png.hpp"
#include "sgeval/io/tiff.hpp"
#include "sgeval/io/triplet_file.hpp"
#include "sgeval/metrics.hpp"

namespace sgeval {

/// Ground truth plus one submission, with the directories their mask
/// files are resolved against.
struct EvalInputs {
    GroundTruthFile gt;
    TripletFile pred;
    std::filesystem::path gt_dir;
    std::filesystem::path pred_dir;
};

inline EvalInputs load_inputs(const std::filesystem::path& gt_path, const std::filesystem::path& pred_path) {
    EvalInputs in;
    in.gt = read_ground_truth_file(gt_path);
    in.pred = read_triplet_file(pred_path);
    in.gt_dir = gt_path.parent_path();
    in.pred_dir = pred_path.parent_path();

    // Predictions carry no image size; take it from the matching gt record.
    std::unordered_map<std::int64_t, const ImageRecord*> by_id;
    for (const auto& g : in.gt.images) by_id.emplace(g.id, &g);
    for (auto& p : in.pred.images)
        if (auto it = by_id.find(p.id); it != by_id.end()) {
            p.width = it->second->width;
            p.height = it->second->height;
        }
    return in;
}

/// Resolves mask files relative to their JSON file's directory. Ground truth
/// comes from indexed PNGs, predictions from multi-page TIFFs.
struct FileMaskLoader {
    std::filesystem::path gt_dir;
    std::filesystem::path pred_dir;

    std::vector<BinaryMask> operator()(const ImageRecord& rec, Role role) const {
        const std::string who = "image " + std::to_string(rec.id);
        if (!rec.mask_source)
            throw ValidationError(who + ": mask mode requires seg_filename");

        if (role == Role::GroundTruth) {
            auto masks = read_gt_masks(gt_dir / *rec.mask_source, rec.instances.size());
            if (!masks.empty() && (static_cast<std::int64_t>(masks[0].width()) != rec.width ||
                                   static_cast<std::int64_t>(masks[0].height()) != rec.height))
                throw ValidationError(who + ": ground-truth mask is " + std::to_string(masks[0].width()) + "x" +
                                      std::to_string(masks[0].height()) + ", image is " +
                                      std::to_string(rec.width) + "x" + std::to_string(rec.height));
            return masks;
        }

        auto masks = read_prediction_masks(pred_dir / *rec.mask_source);
        if (masks.size() != rec.instances.size())
            throw ValidationError(who + ": TIFF has " + std::to_string(masks.size()) + " pages but " +
                                  std::to_string(rec.instances.size()) + " instances are listed");
        if (rec.width > 0 && rec.height > 0)
            for (std::size_t i = 0; i < masks.size(); ++i)
                if (static_cast<std::int64_t>(masks[i].width()) != rec.width ||
                    static_cast<std::int64_t>(masks[i].height()) != rec.height)
                    throw ValidationError(who + ": TIFF page " + std::to_string(i) + " is " +
                                          std::to_string(masks[i].width()) + "x" +
                                          std::to_string(masks[i].height()) + ", image is " +
                                          std::to_string(rec.width) + "x" + std::to_string(rec.height));
        return masks;
    }
};

/// Every problem found in a ground-truth / submission pair. In mask mode
/// this decodes every mask file once.
inline std::vector<Violation> validate_inputs(const EvalInputs& in, MatchMode mode) {
    std::vector<Violation> out;
    for (const auto& msg : validate_meta(in.gt.meta)) out.push_back({0, "dataset: " + msg});
    for (auto& v : validate_dataset(in.gt.images, in.gt.meta)) {
        v.message = "ground truth: " + v.message;
        out.push_back(std::move(v));
    }
    for (auto& v : validate_dataset(in.pred.images, in.gt.meta)) {
        v.message = "prediction: " + v.message;
        out.push_back(std::move(v));
    }

    std::set<std::int64_t> gt_ids;
    for (const auto& g : in.gt.images) gt_ids.insert(g.id);
    for (const auto& p : in.pred.images)
        if (!gt_ids.count(p.id)) out.push_back({p.id, "prediction: no ground-truth image with this id"});

    if (mode == MatchMode::Mask) {
        const FileMaskLoader loader{in.gt_dir, in.pred_dir};
        auto check = [&](const ImageRecord& rec, Role role) {
            if (rec.instances.empty()) return;
            const char* side = role == Role::GroundTruth ? "ground truth: " : "prediction: ";
            try {
                (void)loader(rec, role);
            } catch (const Error& e) {
                out.push_back({rec.id, side + std::string(e.what())});
            }
        };
        for (const auto& g : in.gt.images) check(g, Role::GroundTruth);
        for (const auto& p : in.pred.images)
            if (gt_ids.count(p.id)) check(p, Role::Prediction);
    }
    return out;
}

/// Loads masks from disk as needed and evaluates.
inline MetricReport evaluate_inputs(const EvalInputs& in, const EvalConfig& config) {
    return evaluate_dataset(in.gt.images, in.pred.images, config, FileMaskLoader{in.gt_dir, in.pred_dir});
}

}  // namespace sgeval
