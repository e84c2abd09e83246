// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON interchange files.
//
// Prediction ("triplet") file:
//
//   {"version": 1,
//    "images": [{"id": 123, "seg_filename": "seg_file.tiff",
//                "instances": [{"bbox": [x1, y1, x2, y2], "category": 2}, ...],
//                "triplets": [[sbj, predicate, obj], ...]}, ...]}
//
// Triplets are listed by decreasing confidence. Instance i is page i of the
// TIFF named by seg_filename.
//
// Ground-truth file: the same layout plus top-level "predicate_classes" and
// "instance_classes" string lists, per-image "width" and "height", and a
// seg_filename pointing to an indexed PNG. Repeated gt triplets collapse.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgeval/core.hpp"
#include "sgeval/io/file.hpp"

namespace sgeval {

class UnsupportedVersionError : public FormatError {
public:
    using FormatError::FormatError;
};

inline constexpr std::int64_t kFormatVersion = 1;

struct TripletFile {
    std::int64_t version = kFormatVersion;
    std::vector<ImageRecord> images;
};

struct GroundTruthFile {
    DatasetMeta meta;
    std::vector<ImageRecord> images;
};

namespace detail {

using nlohmann::json;

inline const json& member(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw FormatError(where + ": missing \"" + key + "\"");
    return *it;
}

inline std::int64_t as_int(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) {
        if (v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
            throw FormatError(where + ": integer out of range");
        return static_cast<std::int64_t>(v.get<std::uint64_t>());
    }
    if (!v.is_number_integer()) throw FormatError(where + ": expected an integer");
    return v.get<std::int64_t>();
}

inline double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw FormatError(where + ": expected a number");
    return v.get<double>();
}

inline const json& as_array(const json& v, const std::string& where) {
    if (!v.is_array()) throw FormatError(where + ": expected an array");
    return v;
}

inline void check_version(const json& root) {
    const auto version = as_int(member(root, "version", "file"), "version");
    if (version != kFormatVersion)
        throw UnsupportedVersionError("unsupported file version " + std::to_string(version) + " (expected " +
                                      std::to_string(kFormatVersion) + ")");
}

inline ImageRecord parse_image(const json& img, std::size_t index, bool ground_truth) {
    const std::string where = "images[" + std::to_string(index) + "]";
    if (!img.is_object()) throw FormatError(where + ": expected an object");

    ImageRecord rec;
    rec.id = as_int(member(img, "id", where), where + ".id");
    if (ground_truth) {
        rec.width = as_int(member(img, "width", where), where + ".width");
        rec.height = as_int(member(img, "height", where), where + ".height");
    }
    if (auto it = img.find("seg_filename"); it != img.end() && !it->is_null()) {
        if (!it->is_string()) throw FormatError(where + ".seg_filename: expected a string");
        rec.mask_source = it->get<std::string>();
    }

    const auto& instances = as_array(member(img, "instances", where), where + ".instances");
    rec.instances.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const std::string w = where + ".instances[" + std::to_string(i) + "]";
        const auto& inst = instances[i];
        if (!inst.is_object()) throw FormatError(w + ": expected an object");
        const auto& bbox = as_array(member(inst, "bbox", w), w + ".bbox");
        if (bbox.size() != 4) throw FormatError(w + ".bbox: expected 4 numbers");
        Instance out;
        out.bbox = {as_number(bbox[0], w + ".bbox"), as_number(bbox[1], w + ".bbox"),
                    as_number(bbox[2], w + ".bbox"), as_number(bbox[3], w + ".bbox")};
        out.category = as_int(member(inst, "category", w), w + ".category");
        rec.instances.push_back(out);
    }

    const auto& triplets = as_array(member(img, "triplets", where), where + ".triplets");
    rec.triplets.reserve(triplets.size());
    for (std::size_t t = 0; t < triplets.size(); ++t) {
        const std::string w = where + ".triplets[" + std::to_string(t) + "]";
        const auto& tr = as_array(triplets[t], w);
        if (tr.size() != 3) throw FormatError(w + ": expected [sbj, predicate, obj]");
        rec.triplets.push_back({as_int(tr[0], w), as_int(tr[1], w), as_int(tr[2], w)});
    }
    if (ground_truth) rec.triplets = dedupe_keep_first(rec.triplets);
    return rec;
}

inline std::vector<std::string> parse_names(const json& root, const char* key) {
    const auto& arr = as_array(member(root, key, "file"), key);
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw FormatError(std::string(key) + ": expected strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

inline json parse_root(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {  // syntax errors and out-of-range numbers
        throw FormatError(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw FormatError("file: expected a JSON object");
    return root;
}

inline nlohmann::ordered_json image_to_json(const ImageRecord& rec, bool ground_truth) {
    nlohmann::ordered_json img;
    img["id"] = rec.id;
    if (ground_truth) {
        img["width"] = rec.width;
        img["height"] = rec.height;
    }
    if (rec.mask_source) img["seg_filename"] = *rec.mask_source;
    auto instances = nlohmann::ordered_json::array();
    for (const auto& inst : rec.instances) {
        nlohmann::ordered_json o;
        o["bbox"] = {inst.bbox.x1, inst.bbox.y1, inst.bbox.x2, inst.bbox.y2};
        o["category"] = inst.category;
        instances.push_back(std::move(o));
    }
    img["instances"] = std::move(instances);
    auto triplets = nlohmann::ordered_json::array();
    for (const auto& t : rec.triplets) triplets.push_back({t.sbj, t.predicate, t.obj});
    img["triplets"] = std::move(triplets);
    return img;
}

}  // namespace detail

inline TripletFile parse_triplet_file(const std::string& text) {
    const auto root = detail::parse_root(text);
    detail::check_version(root);
    const auto& images = detail::as_array(detail::member(root, "images", "file"), "images");
    TripletFile out;
    out.images.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) out.images.push_back(detail::parse_image(images[i], i, false));
    return out;
}

inline GroundTruthFile parse_ground_truth_file(const std::string& text) {
    const auto root = detail::parse_root(text);
    detail::check_version(root);
    GroundTruthFile out;
    out.meta.predicate_classes = detail::parse_names(root, "predicate_classes");
    out.meta.instance_classes = detail::parse_names(root, "instance_classes");
    const auto& images = detail::as_array(detail::member(root, "images", "file"), "images");
    out.images.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) out.images.push_back(detail::parse_image(images[i], i, true));
    return out;
}

inline std::string to_json_text(const TripletFile& file) {
    nlohmann::ordered_json root;
    root["version"] = file.version;
    auto images = nlohmann::ordered_json::array();
    for (const auto& rec : file.images) images.push_back(detail::image_to_json(rec, false));
    root["images"] = std::move(images);
    return root.dump(1, '\t') + "\n";
}

inline std::string to_json_text(const GroundTruthFile& file) {
    nlohmann::ordered_json root;
    root["version"] = kFormatVersion;
    root["predicate_classes"] = file.meta.predicate_classes;
    root["instance_classes"] = file.meta.instance_classes;
    auto images = nlohmann::ordered_json::array();
    for (const auto& rec : file.images) images.push_back(detail::image_to_json(rec, true));
    root["images"] = std::move(images);
    return root.dump(1, '\t') + "\n";
}

namespace detail {
inline std::string read_text(const std::filesystem::path& path) {
    const auto bytes = io::read_file_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}
}  // namespace detail

inline TripletFile read_triplet_file(const std::filesystem::path& path) {
    const auto text = detail::read_text(path);
    try {
        return parse_triplet_file(text);
    } catch (const UnsupportedVersionError& e) {
        throw UnsupportedVersionError(path.string() + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

inline GroundTruthFile read_ground_truth_file(const std::filesystem::path& path) {
    const auto text = detail::read_text(path);
    try {
        return parse_ground_truth_file(text);
    } catch (const UnsupportedVersionError& e) {
        throw UnsupportedVersionError(path.string() + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

inline void write_triplet_file(const TripletFile& file, const std::filesystem::path& path) {
    io::write_file_text(path, to_json_text(file));
}

inline void write_ground_truth_file(const GroundTruthFile& file, const std::filesystem::path& path) {
    io::write_file_text(path, to_json_text(file));
}

}  // namespace sgeval
