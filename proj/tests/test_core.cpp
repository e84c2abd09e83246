// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "sgeval/core.hpp"
#include "support/random_data.hpp"

namespace {

using namespace sgeval;

ImageRecord two_instance_record() {
    ImageRecord rec;
    rec.id = 7;
    rec.width = rec.height = 10;
    rec.instances = {{0, {0, 0, 5, 5}}, {1, {2, 2, 9, 9}}};
    rec.triplets = {{0, 1, 1}};
    return rec;
}

TEST(ValidateDataset, WellFormedRecordHasNoViolations) {
    const auto meta = testdata::make_meta(3, 2);
    EXPECT_TRUE(validate_dataset({two_instance_record()}, meta).empty());
}

TEST(ValidateDataset, ObjIndexOutOfRange) {
    const auto meta = testdata::make_meta(5, 2);
    auto rec = two_instance_record();
    rec.instances.push_back({0, {}});
    rec.instances.push_back({0, {}});
    rec.triplets = {{0, 3, 5}};  // only 4 instances
    const auto v = validate_dataset({rec}, meta);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].image_id, 7);
    EXPECT_NE(v[0].message.find("obj index 5 out of range"), std::string::npos);
}

TEST(ValidateDataset, InvertedBox) {
    const auto meta = testdata::make_meta(3, 2);
    auto rec = two_instance_record();
    rec.instances[0].bbox = {10, 0, 5, 5};
    const auto v = validate_dataset({rec}, meta);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].message.find("x1 > x2"), std::string::npos);
}

TEST(ValidateDataset, CategoryPredicateDuplicateIdAndMaskSize) {
    const auto meta = testdata::make_meta(1, 1);
    auto a = two_instance_record();  // category 1 and predicate 1 out of range
    auto b = two_instance_record();  // duplicate id
    b.masks = {BinaryMask(10, 10), BinaryMask(10, 9)};
    const auto v = validate_dataset({a, b}, meta);
    auto has = [&](const std::string& s) {
        return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.message.find(s) != std::string::npos; });
    };
    EXPECT_TRUE(has("category 1 out of range"));
    EXPECT_TRUE(has("predicate 1 out of range"));
    EXPECT_TRUE(has("duplicate image id"));
    EXPECT_TRUE(has("mask 1 is 10x9"));
}

TEST(ValidateDataset, SelfRelationsPassThrough) {
    const auto meta = testdata::make_meta(3, 2);
    auto rec = two_instance_record();
    rec.triplets = {{1, 0, 1}};
    EXPECT_TRUE(validate_dataset({rec}, meta).empty());
}

TEST(ValidateDataset, IsPure) {
    testdata::Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        auto c = testdata::random_case(rng, false);
        c.gt[0].triplets.push_back({99, 99, -1});
        EXPECT_EQ(validate_dataset(c.gt, c.meta), validate_dataset(c.gt, c.meta));
    }
}

TEST(ValidateMeta, EmptyAndDuplicateNames) {
    DatasetMeta meta{{"on", "on"}, {}};
    const auto v = validate_meta(meta);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_TRUE(validate_meta(testdata::make_meta(2, 2)).empty());
}

TEST(KSpec, ResolveAndLabels) {
    EXPECT_EQ(*KSpec::absolute(50).resolve(7), 50);
    EXPECT_EQ(*KSpec::relative(10).resolve(7), 70);
    EXPECT_FALSE(KSpec::infinity().resolve(7).has_value());
    EXPECT_EQ(KSpec::absolute(50).label(), "50");
    EXPECT_EQ(KSpec::relative(10).label(), "x10");
    EXPECT_EQ(KSpec::infinity().label(), "inf");
    EXPECT_THROW(KSpec::absolute(0), ConfigError);
    EXPECT_THROW(KSpec::relative(-1), ConfigError);
}

TEST(KSpec, OrderingAbsoluteThenRelativeThenInfinity) {
    std::vector<KSpec> ks{KSpec::infinity(), KSpec::relative(1), KSpec::absolute(100), KSpec::absolute(20)};
    std::sort(ks.begin(), ks.end());
    EXPECT_EQ(ks[0], KSpec::absolute(20));
    EXPECT_EQ(ks[1], KSpec::absolute(100));
    EXPECT_EQ(ks[2], KSpec::relative(1));
    EXPECT_EQ(ks[3], KSpec::infinity());
}

TEST(EvalConfig, Checks) {
    EvalConfig cfg;
    cfg.metrics = {Metric::R};
    EXPECT_THROW(cfg.check(), ConfigError);  // no k
    cfg.k_specs = {KSpec::absolute(20)};
    EXPECT_NO_THROW(cfg.check());
    cfg.iou_threshold = 1.0;
    EXPECT_THROW(cfg.check(), ConfigError);
    cfg.iou_threshold = 0.5;
    cfg.metrics = {Metric::InstR};
    cfg.k_specs.clear();
    EXPECT_NO_THROW(cfg.check());  // InstR needs no k
}

TEST(Metric, NamesRoundTrip) {
    for (Metric m : kAllMetrics) EXPECT_EQ(parse_metric(metric_name(m)), m);
    EXPECT_FALSE(parse_metric("Recall").has_value());
}

TEST(BinaryMask, PixelsRoundTripAndCount) {
    testdata::Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t w = std::size_t(rng.uniform(1, 70)), h = std::size_t(rng.uniform(1, 9));
        std::vector<std::uint8_t> px(w * h);
        std::size_t on = 0;
        for (auto& v : px) {
            v = rng.chance(0.3) ? std::uint8_t(rng.uniform(1, 255)) : 0;
            on += v != 0;
        }
        const auto m = BinaryMask::from_pixels(w, h, px);
        EXPECT_EQ(m.count(), on);
        const auto back = m.to_pixels(1);
        for (std::size_t i = 0; i < px.size(); ++i) EXPECT_EQ(back[i] != 0, px[i] != 0);
    }
}

}  // namespace
