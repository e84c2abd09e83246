// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Seeded generators for small random evaluation cases (property tests and
// oracle comparisons) and for larger synthetic datasets written to disk.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "sgeval/core.hpp"
#include "sgeval/io/png.hpp"
#include "sgeval/io/tiff.hpp"
#include "sgeval/io/triplet_file.hpp"

namespace testdata {

using sgeval::BBox;
using sgeval::BinaryMask;
using sgeval::DatasetMeta;
using sgeval::ImageRecord;
using sgeval::Instance;
using sgeval::Triplet;

inline DatasetMeta make_meta(std::size_t predicates, std::size_t classes) {
    DatasetMeta meta;
    for (std::size_t p = 0; p < predicates; ++p) meta.predicate_classes.push_back("pred" + std::to_string(p));
    for (std::size_t c = 0; c < classes; ++c) meta.instance_classes.push_back("class" + std::to_string(c));
    return meta;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    long uniform(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(gen_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(gen_); }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

/// One small random dataset with its oracle geometry.
struct Case {
    DatasetMeta meta;
    std::vector<ImageRecord> gt, pred;
    std::vector<oracle::Geometry> geometry;  // parallel to gt
    bool masks = false;
};

struct CaseLimits {
    long max_images = 3;
    long max_instances = 6;
    long max_triplets = 20;
    long max_predicates = 8;
    long classes = 3;
    long grid = 12;
};

namespace detail {

inline BBox random_box(Rng& rng, long grid) {
    const long x1 = rng.uniform(0, grid - 1), y1 = rng.uniform(0, grid - 1);
    const long x2 = rng.uniform(x1 + 1, grid), y2 = rng.uniform(y1 + 1, grid);
    return {double(x1), double(y1), double(x2), double(y2)};
}

inline BBox jitter(Rng& rng, BBox b, long grid) {
    auto clamp = [&](double v) { return std::clamp(v, 0.0, double(grid)); };
    b.x1 = clamp(b.x1 + double(rng.uniform(-1, 1)));
    b.y1 = clamp(b.y1 + double(rng.uniform(-1, 1)));
    b.x2 = clamp(b.x2 + double(rng.uniform(-1, 1)));
    b.y2 = clamp(b.y2 + double(rng.uniform(-1, 1)));
    if (b.x1 > b.x2) std::swap(b.x1, b.x2);
    if (b.y1 > b.y2) std::swap(b.y1, b.y2);
    return b;
}

inline std::vector<std::uint8_t> rasterize(Rng& rng, const BBox& b, long grid, double noise) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(grid * grid), 0);
    for (long y = 0; y < grid; ++y)
        for (long x = 0; x < grid; ++x) {
            bool on = oracle::in_box(b, std::size_t(x), std::size_t(y));
            if (rng.chance(noise)) on = !on;
            px[static_cast<std::size_t>(y * grid + x)] = on ? 255 : 0;
        }
    return px;
}

}  // namespace detail

/// Random case: up to `max_images` images with up to `max_instances`
/// instances and `max_triplets` triplets on each side. Predictions are
/// jittered copies of ground truth plus distractors, in shuffled order,
/// so matches, misses and duplicate claims all occur.
inline Case random_case(Rng& rng, bool masks, const CaseLimits& lim = {}) {
    Case c;
    c.masks = masks;
    const long predicates = rng.uniform(1, lim.max_predicates);
    c.meta = make_meta(static_cast<std::size_t>(predicates), static_cast<std::size_t>(lim.classes));
    const long images = rng.uniform(1, lim.max_images);

    for (long img = 0; img < images; ++img) {
        ImageRecord g, p;
        g.id = p.id = img * 7 + 3;
        g.width = g.height = p.width = p.height = lim.grid;
        oracle::Geometry geo{masks, std::size_t(lim.grid), std::size_t(lim.grid), {}, {}};

        const long ng = rng.uniform(0, lim.max_instances);
        for (long i = 0; i < ng; ++i)
            g.instances.push_back({rng.uniform(0, lim.classes - 1), detail::random_box(rng, lim.grid)});

        // Predicted instances: copies of gt (maybe twice), plus noise.
        std::vector<long> source;  // gt index each prediction derives from, -1 for none
        for (long i = 0; i < ng; ++i) {
            const long copies = rng.chance(0.75) ? (rng.chance(0.2) ? 2 : 1) : 0;
            for (long k = 0; k < copies; ++k) source.push_back(i);
        }
        const long extra = rng.uniform(0, 2);
        for (long k = 0; k < extra; ++k) source.push_back(-1);
        std::shuffle(source.begin(), source.end(), rng.engine());
        if (static_cast<long>(source.size()) > lim.max_instances) source.resize(std::size_t(lim.max_instances));

        for (long s : source) {
            Instance inst;
            if (s >= 0) {
                inst = g.instances[std::size_t(s)];
                if (rng.chance(0.6)) inst.bbox = detail::jitter(rng, inst.bbox, lim.grid);
                if (rng.chance(0.1)) inst.category = rng.uniform(0, lim.classes - 1);
            } else {
                inst = {rng.uniform(0, lim.classes - 1), detail::random_box(rng, lim.grid)};
            }
            p.instances.push_back(inst);
        }

        const long nt = ng ? rng.uniform(0, lim.max_triplets) : 0;
        for (long t = 0; t < nt; ++t)
            g.triplets.push_back(
                {rng.uniform(0, ng - 1), rng.uniform(0, predicates - 1), rng.uniform(0, ng - 1)});

        const long np = static_cast<long>(p.instances.size());
        const long npt = np ? rng.uniform(0, lim.max_triplets) : 0;
        for (long t = 0; t < npt; ++t) {
            Triplet tr;
            // Mostly echo a gt triplet through the source correspondence.
            if (!g.triplets.empty() && rng.chance(0.7)) {
                const auto& gt_t = g.triplets[std::size_t(rng.uniform(0, long(g.triplets.size()) - 1))];
                auto pick = [&](long gt_index) {
                    std::vector<long> cands;
                    for (long m = 0; m < np; ++m)
                        if (source[std::size_t(m)] == gt_index) cands.push_back(m);
                    return cands.empty() ? rng.uniform(0, np - 1) : cands[std::size_t(rng.uniform(0, long(cands.size()) - 1))];
                };
                tr = {pick(gt_t.sbj), rng.chance(0.6) ? gt_t.predicate : rng.uniform(0, predicates - 1),
                      pick(gt_t.obj)};
            } else {
                tr = {rng.uniform(0, np - 1), rng.uniform(0, predicates - 1), rng.uniform(0, np - 1)};
            }
            p.triplets.push_back(tr);
        }

        if (masks) {
            const double noise = rng.chance(0.5) ? 0.0 : 0.05;
            for (const auto& inst : g.instances) {
                geo.gt_pixels.push_back(detail::rasterize(rng, inst.bbox, lim.grid, noise));
                g.masks.push_back(BinaryMask::from_pixels(geo.width, geo.height, geo.gt_pixels.back()));
            }
            for (const auto& inst : p.instances) {
                geo.pred_pixels.push_back(detail::rasterize(rng, inst.bbox, lim.grid, noise));
                p.masks.push_back(BinaryMask::from_pixels(geo.width, geo.height, geo.pred_pixels.back()));
            }
        }

        c.gt.push_back(std::move(g));
        // Some gt images get no prediction record at all.
        if (rng.chance(0.9)) c.pred.push_back(std::move(p));
        c.geometry.push_back(std::move(geo));
    }
    return c;
}

// ---------------------------------------------------------------------------
// Synthetic datasets on disk
// ---------------------------------------------------------------------------

struct SyntheticSpec {
    std::uint64_t seed = 1;
    std::size_t images = 10;
    std::size_t width = 64;
    std::size_t height = 64;
    std::size_t instances = 8;
    std::size_t pred_triplets = 100;
    std::size_t gt_triplets = 12;
    std::size_t predicates = 16;
    std::size_t classes = 6;
    bool perfect = false;  ///< prediction identical to ground truth
    sgeval::tiff::Compression compression = sgeval::tiff::Compression::Deflate;
};

struct SyntheticPaths {
    std::filesystem::path gt_json;
    std::filesystem::path pred_json;
    std::uintmax_t raw_mask_bytes = 0;   ///< one byte per pixel per predicted mask
    std::uintmax_t tiff_bytes = 0;
};

/// Non-overlapping ellipses, one per grid cell.
inline std::vector<BinaryMask> blob_masks(Rng& rng, std::size_t n, std::size_t w, std::size_t h) {
    const std::size_t cols = std::max<std::size_t>(1, (n + 1) / 2), rows = n > 1 ? 2 : 1;
    const double cw = double(w) / double(cols), ch = double(h) / double(rows);
    std::vector<BinaryMask> out;
    for (std::size_t i = 0; i < n; ++i) {
        BinaryMask m(w, h);
        const double cx = cw * (double(i % cols) + 0.5), cy = ch * (double(i / cols) + 0.5);
        const double rx = cw * (0.25 + 0.2 * double(rng.uniform(0, 100)) / 100.0);
        const double ry = ch * (0.25 + 0.2 * double(rng.uniform(0, 100)) / 100.0);
        const auto lo = [](double v) { return std::size_t(std::max(0.0, std::floor(v))); };
        const std::size_t y0 = lo(cy - ry), y1 = std::min(h, lo(cy + ry) + 1);
        const std::size_t x0 = lo(cx - rx), x1 = std::min(w, lo(cx + rx) + 1);
        for (std::size_t y = y0; y < y1; ++y)
            for (std::size_t x = x0; x < x1; ++x) {
                const double dx = (double(x) + 0.5 - cx) / rx, dy = (double(y) + 0.5 - cy) / ry;
                if (dx * dx + dy * dy <= 1.0) m.set(x, y);
            }
        out.push_back(std::move(m));
    }
    return out;
}

inline BinaryMask shifted(const BinaryMask& m, long dx, long dy) {
    BinaryMask out(m.width(), m.height());
    for (std::size_t y = 0; y < m.height(); ++y)
        for (std::size_t x = 0; x < m.width(); ++x) {
            const long sx = long(x) - dx, sy = long(y) - dy;
            if (sx >= 0 && sy >= 0 && sx < long(m.width()) && sy < long(m.height()) &&
                m.get(std::size_t(sx), std::size_t(sy)))
                out.set(x, y);
        }
    return out;
}

inline BBox bounds(const BinaryMask& m) {
    long x1 = long(m.width()), y1 = long(m.height()), x2 = 0, y2 = 0;
    for (std::size_t y = 0; y < m.height(); ++y)
        for (std::size_t x = 0; x < m.width(); ++x)
            if (m.get(x, y)) {
                x1 = std::min(x1, long(x));
                y1 = std::min(y1, long(y));
                x2 = std::max(x2, long(x) + 1);
                y2 = std::max(y2, long(y) + 1);
            }
    if (x1 > x2) return {};
    return {double(x1), double(y1), double(x2), double(y2)};
}

/// Writes gt.json, pred.json, one PNG and one TIFF per image into `dir`.
inline SyntheticPaths write_synthetic(const std::filesystem::path& dir, const SyntheticSpec& spec) {
    std::filesystem::create_directories(dir);
    Rng rng(spec.seed);
    sgeval::GroundTruthFile gt;
    gt.meta = make_meta(spec.predicates, spec.classes);
    sgeval::TripletFile pred;
    SyntheticPaths paths{dir / "gt.json", dir / "pred.json", 0, 0};

    for (std::size_t i = 0; i < spec.images; ++i) {
        ImageRecord g, p;
        g.id = p.id = static_cast<std::int64_t>(1000 + i);
        g.width = static_cast<std::int64_t>(spec.width);
        g.height = static_cast<std::int64_t>(spec.height);
        g.mask_source = "gt_" + std::to_string(i) + ".png";
        p.mask_source = "pred_" + std::to_string(i) + ".tiff";

        const auto gt_masks = blob_masks(rng, spec.instances, spec.width, spec.height);
        for (const auto& m : gt_masks)
            g.instances.push_back({rng.uniform(0, long(spec.classes) - 1), bounds(m)});
        const long n = long(spec.instances);
        // At most one predicate per (sbj, obj), so a perfect prediction
        // reaches full recall under the graph constraint too.
        std::set<sgeval::InstancePair> used;
        for (std::size_t t = 0; t < spec.gt_triplets && n > 1; ++t) {
            const Triplet tr{rng.uniform(0, n - 1), rng.uniform(0, long(spec.predicates) - 1), rng.uniform(0, n - 1)};
            if (used.insert({tr.sbj, tr.obj}).second) g.triplets.push_back(tr);
        }

        // Predictions: the gt instances in reverse order, masks shifted a
        // little; triplets echo gt (some with wrong predicates) then noise.
        std::vector<BinaryMask> pred_masks;
        std::vector<long> gt_to_pred(std::size_t(n), 0);
        for (long k = n - 1; k >= 0; --k) {
            const auto& src = gt_masks[std::size_t(k)];
            auto m = spec.perfect ? src : shifted(src, rng.uniform(-2, 2), rng.uniform(-2, 2));
            gt_to_pred[std::size_t(k)] = long(p.instances.size());
            p.instances.push_back({g.instances[std::size_t(k)].category, bounds(m)});
            pred_masks.push_back(std::move(m));
        }
        for (const auto& t : g.triplets) {
            if (!spec.perfect && rng.chance(0.3))
                p.triplets.push_back({gt_to_pred[std::size_t(t.sbj)], rng.uniform(0, long(spec.predicates) - 1),
                                      gt_to_pred[std::size_t(t.obj)]});
            p.triplets.push_back({gt_to_pred[std::size_t(t.sbj)], t.predicate, gt_to_pred[std::size_t(t.obj)]});
        }
        if (!spec.perfect) {
            std::shuffle(p.triplets.begin(), p.triplets.end(), rng.engine());
            while (p.triplets.size() < spec.pred_triplets)
                p.triplets.push_back({rng.uniform(0, n - 1), rng.uniform(0, long(spec.predicates) - 1),
                                      rng.uniform(0, n - 1)});
            p.triplets.resize(spec.pred_triplets);
        }

        sgeval::write_gt_masks(gt_masks, spec.width, spec.height, dir / *g.mask_source);
        if (!pred_masks.empty()) {
            sgeval::write_prediction_masks(pred_masks, dir / *p.mask_source, spec.compression);
            paths.tiff_bytes += std::filesystem::file_size(dir / *p.mask_source);
            paths.raw_mask_bytes += pred_masks.size() * spec.width * spec.height;
        }
        gt.images.push_back(std::move(g));
        pred.images.push_back(std::move(p));
    }
    sgeval::write_ground_truth_file(gt, paths.gt_json);
    sgeval::write_triplet_file(pred, paths.pred_json);
    return paths;
}

}  // namespace testdata
