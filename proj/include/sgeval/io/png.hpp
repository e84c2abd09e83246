// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Ground-truth masks as one indexed grayscale PNG per image: pixel value 0 is
// background, value v >= 1 assigns the pixel to instance v - 1. Panoptic
// ground truth never overlaps, so one plane holds every instance.

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sgeval/core.hpp"
#include "sgeval/io/file.hpp"
#include "sgeval/mask.hpp"

namespace sgeval::png {

/// Decoded single-channel image, one 16-bit value per pixel.
struct IndexImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint16_t> values;
};

namespace detail {

struct ReadState {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;
    char message[256] = {};
};

inline void png_cb_error(png_structp png, png_const_charp msg) {
    auto* st = static_cast<ReadState*>(png_get_error_ptr(png));
    std::snprintf(st->message, sizeof st->message, "%s", msg ? msg : "libpng error");
    png_longjmp(png, 1);
}

inline void png_cb_warning(png_structp, png_const_charp) {}

inline void png_cb_read(png_structp png, png_bytep out, png_size_t len) {
    auto* st = static_cast<ReadState*>(png_get_io_ptr(png));
    if (len > st->data.size() - st->pos) png_error(png, "unexpected end of data");
    std::memcpy(out, st->data.data() + st->pos, len);
    st->pos += len;
}

struct WriteState {
    std::vector<std::uint8_t> bytes;
    char message[256] = {};
};

inline void png_cb_write_error(png_structp png, png_const_charp msg) {
    auto* st = static_cast<WriteState*>(png_get_error_ptr(png));
    std::snprintf(st->message, sizeof st->message, "%s", msg ? msg : "libpng error");
    png_longjmp(png, 1);
}

inline void png_cb_write(png_structp png, png_bytep in, png_size_t len) {
    auto* st = static_cast<WriteState*>(png_get_io_ptr(png));
    st->bytes.insert(st->bytes.end(), in, in + len);
}

inline void png_cb_flush(png_structp) {}

// Everything libpng may longjmp across lives in the caller's frame; this
// frame owns no objects with destructors.
inline bool decode_into(ReadState& st, IndexImage& img, std::vector<std::uint8_t>& raw, std::size_t max_pixels) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st, png_cb_error, png_cb_warning);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, &st, png_cb_read);
    png_set_user_limits(png, 1u << 16, 1u << 16);
    png_read_info(png, info);

    png_uint_32 w = 0, h = 0;
    int depth = 0, color = 0, interlace = 0;
    png_get_IHDR(png, info, &w, &h, &depth, &color, &interlace, nullptr, nullptr);
    if (color != PNG_COLOR_TYPE_GRAY) png_error(png, "ground-truth PNG must be single-channel grayscale");
    if (depth != 8 && depth != 16) png_error(png, "unsupported bit depth (need 8 or 16)");
    if (std::uint64_t{w} * h > max_pixels) png_error(png, "image too large");
    const int passes = png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const std::size_t bytes_per_px = depth == 16 ? 2 : 1;
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    if (row_bytes != w * bytes_per_px) png_error(png, "unexpected row layout");
    raw.resize(row_bytes * h);
    for (int pass = 0; pass < passes; ++pass)
        for (png_uint_32 y = 0; y < h; ++y) png_read_row(png, raw.data() + std::size_t{y} * row_bytes, nullptr);
    png_read_end(png, nullptr);

    img.width = w;
    img.height = h;
    img.values.resize(std::size_t{w} * h);
    for (std::size_t i = 0; i < img.values.size(); ++i)
        img.values[i] = depth == 16 ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]) : raw[i];
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

inline bool encode_into(WriteState& st, const IndexImage& img, std::vector<std::uint8_t>& raw) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &st, png_cb_write_error, png_cb_warning);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &st, png_cb_write, png_cb_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 16,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t row_bytes = img.width * 2;
    for (std::size_t y = 0; y < img.height; ++y) png_write_row(png, raw.data() + y * row_bytes);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

}  // namespace detail

/// Decodes an 8- or 16-bit grayscale PNG held in memory.
inline IndexImage decode(std::span<const std::uint8_t> file, std::size_t max_pixels = std::size_t{1} << 26) {
    if (file.size() < 8 || png_sig_cmp(file.data(), 0, 8) != 0) throw FormatError("png: bad signature");
    detail::ReadState st;
    st.data = file;
    IndexImage img;
    std::vector<std::uint8_t> raw;
    if (!detail::decode_into(st, img, raw, max_pixels))
        throw FormatError(std::string("png: ") + (st.message[0] ? st.message : "decode failed"));
    return img;
}

/// Encodes as a 16-bit grayscale PNG.
inline std::vector<std::uint8_t> encode(const IndexImage& img) {
    if (img.width == 0 || img.height == 0) throw FormatError("png: zero-sized image");
    if (img.values.size() != img.width * img.height) throw FormatError("png: value buffer does not match size");
    std::vector<std::uint8_t> raw(img.values.size() * 2);
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        raw[2 * i] = static_cast<std::uint8_t>(img.values[i] >> 8);
        raw[2 * i + 1] = static_cast<std::uint8_t>(img.values[i]);
    }
    detail::WriteState st;
    if (!detail::encode_into(st, img, raw))
        throw IoError(std::string("png: ") + (st.message[0] ? st.message : "encode failed"));
    return std::move(st.bytes);
}

/// Splits an index plane into `instance_count` binary masks.
inline std::vector<BinaryMask> split_instances(const IndexImage& img, std::size_t instance_count) {
    std::vector<BinaryMask> masks(instance_count, BinaryMask(img.width, img.height));
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        const auto v = img.values[i];
        if (v == 0) continue;
        if (v > instance_count)
            throw FormatError("png: pixel value " + std::to_string(v) + " exceeds instance count " +
                              std::to_string(instance_count));
        masks[v - 1].set(i % img.width, i / img.width);
    }
    return masks;
}

/// Inverse of split_instances. Masks must not overlap.
inline IndexImage merge_instances(std::span<const BinaryMask> masks, std::size_t width, std::size_t height) {
    if (masks.size() > 0xFFFF) throw FormatError("png: more than 65535 instances");
    IndexImage img{width, height, std::vector<std::uint16_t>(width * height, 0)};
    for (std::size_t m = 0; m < masks.size(); ++m) {
        if (masks[m].width() != width || masks[m].height() != height)
            throw FormatError("png: mask " + std::to_string(m) + " does not match image size");
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x) {
                if (!masks[m].get(x, y)) continue;
                auto& v = img.values[y * width + x];
                if (v != 0) throw FormatError("png: ground-truth masks overlap");
                v = static_cast<std::uint16_t>(m + 1);
            }
    }
    return img;
}

}  // namespace sgeval::png

namespace sgeval {

/// Reads an indexed ground-truth PNG into `instance_count` disjoint masks.
inline std::vector<BinaryMask> read_gt_masks(const std::filesystem::path& path, std::size_t instance_count) {
    const auto bytes = io::read_file_bytes(path);
    try {
        return png::split_instances(png::decode(bytes), instance_count);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

inline void write_gt_masks(std::span<const BinaryMask> masks, std::size_t width, std::size_t height,
                           const std::filesystem::path& path) {
    io::write_file_bytes(path, png::encode(png::merge_instances(masks, width, height)));
}

}  // namespace sgeval
