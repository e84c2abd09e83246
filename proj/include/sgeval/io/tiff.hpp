// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Minimal multi-page TIFF codec for binary instance masks.
//
// Reads and writes classic (32-bit offset) TIFF, either byte order,
// single-channel 8-bit strips compressed with Deflate (tags 8 and 32946) or
// LZMA (34925). Each page is one mask; any nonzero pixel is foreground.
// Everything else is rejected with FormatError.

#include <lzma.h>
#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sgeval/core.hpp"
#include "sgeval/io/file.hpp"
#include "sgeval/mask.hpp"

namespace sgeval::tiff {

enum class Compression : std::uint16_t {
    Deflate = 8,
    AdobeDeflate = 32946,
    Lzma = 34925,
};

/// Upper bounds that keep hostile files from exhausting memory.
struct Limits {
    std::size_t max_pages = 1 << 16;
    std::uint64_t max_pixels_per_page = std::uint64_t{1} << 26;
};

namespace detail {

enum Tag : std::uint16_t {
    NewSubfileType = 254,
    ImageWidth = 256,
    ImageLength = 257,
    BitsPerSample = 258,
    CompressionTag = 259,
    Photometric = 262,
    StripOffsets = 273,
    SamplesPerPixel = 277,
    RowsPerStrip = 278,
    StripByteCounts = 279,
    PlanarConfig = 284,
    PageNumber = 297,
    Predictor = 317,
    TileWidth = 322,
    TileLength = 323,
    TileOffsets = 324,
    TileByteCounts = 325,
    SampleFormat = 339,
};

enum FieldType : std::uint16_t {
    Byte = 1,
    Ascii = 2,
    Short = 3,
    Long = 4,
    Rational = 5,
    SByte = 6,
    Undefined = 7,
    SShort = 8,
    SLong = 9,
    SRational = 10,
    Float = 11,
    Double = 12,
    Ifd = 13,
};

inline std::size_t type_size(std::uint16_t type) {
    switch (type) {
    case Byte:
    case Ascii:
    case SByte:
    case Undefined: return 1;
    case Short:
    case SShort: return 2;
    case Long:
    case SLong:
    case Float:
    case Ifd: return 4;
    case Rational:
    case SRational:
    case Double: return 8;
    default: return 0;
    }
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {
        if (data_.size() < 8) throw FormatError("tiff: file too short for a header");
        if (data_[0] == 'I' && data_[1] == 'I')
            little_ = true;
        else if (data_[0] == 'M' && data_[1] == 'M')
            little_ = false;
        else
            throw FormatError("tiff: bad byte-order mark");
        const auto magic = u16(2);
        if (magic == 43) throw FormatError("tiff: BigTIFF is not supported");
        if (magic != 42) throw FormatError("tiff: bad magic number " + std::to_string(magic));
    }

    std::uint16_t u16(std::uint64_t off) const {
        check(off, 2);
        const auto a = data_[off], b = data_[off + 1];
        return little_ ? static_cast<std::uint16_t>(a | (b << 8)) : static_cast<std::uint16_t>((a << 8) | b);
    }
    std::uint32_t u32(std::uint64_t off) const {
        check(off, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint32_t byte = data_[off + (little_ ? 3 - i : i)];
            v = (v << 8) | byte;
        }
        return v;
    }
    std::span<const std::uint8_t> bytes(std::uint64_t off, std::uint64_t len) const {
        check(off, len);
        return data_.subspan(static_cast<std::size_t>(off), static_cast<std::size_t>(len));
    }
    std::size_t size() const { return data_.size(); }

private:
    void check(std::uint64_t off, std::uint64_t len) const {
        if (off > data_.size() || len > data_.size() - off) throw FormatError("tiff: offset beyond end of file");
    }

    std::span<const std::uint8_t> data_;
    bool little_ = true;
};

struct Entry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::uint64_t value_offset = 0;  // where the value bytes live
};

inline std::vector<std::uint64_t> read_uints(const Reader& r, const Entry& e) {
    if (e.type != Short && e.type != Long && e.type != Byte)
        throw FormatError("tiff: unexpected field type " + std::to_string(e.type));
    const std::size_t sz = type_size(e.type);
    (void)r.bytes(e.value_offset, std::uint64_t{e.count} * sz);  // bounds check before allocating
    std::vector<std::uint64_t> out;
    out.reserve(e.count);
    for (std::uint32_t i = 0; i < e.count; ++i) {
        const std::uint64_t off = e.value_offset + std::uint64_t{i} * sz;
        if (e.type == Short)
            out.push_back(r.u16(off));
        else if (e.type == Long)
            out.push_back(r.u32(off));
        else
            out.push_back(r.bytes(off, 1)[0]);
    }
    return out;
}

inline void inflate_strip(std::span<const std::uint8_t> in, std::span<std::uint8_t> out) {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw FormatError("tiff: zlib init failed");
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const auto produced = zs.total_out;
    inflateEnd(&zs);
    // The stream must end, checksum included, exactly when the strip is full.
    if (rc != Z_STREAM_END || produced != out.size()) throw FormatError("tiff: corrupt deflate strip");
}

inline void unlzma_strip(std::span<const std::uint8_t> in, std::span<std::uint8_t> out) {
    lzma_stream ls = LZMA_STREAM_INIT;
    if (lzma_stream_decoder(&ls, std::uint64_t{1} << 30, 0) != LZMA_OK) throw FormatError("tiff: lzma init failed");
    ls.next_in = in.data();
    ls.avail_in = in.size();
    ls.next_out = out.data();
    ls.avail_out = out.size();
    // Run on past a full buffer so the block and stream checks are verified.
    lzma_ret rc = LZMA_OK;
    while (rc == LZMA_OK) {
        const auto before_in = ls.avail_in, before_out = ls.avail_out;
        rc = lzma_code(&ls, LZMA_FINISH);
        if (rc == LZMA_OK && ls.avail_in == before_in && ls.avail_out == before_out) break;
    }
    const auto produced = ls.total_out;
    lzma_end(&ls);
    if (rc != LZMA_STREAM_END || produced != out.size()) throw FormatError("tiff: corrupt lzma strip");
}

inline std::vector<std::uint8_t> deflate_bytes(std::span<const std::uint8_t> in) {
    uLongf len = compressBound(static_cast<uLong>(in.size()));
    std::vector<std::uint8_t> out(len);
    if (compress2(out.data(), &len, in.data(), static_cast<uLong>(in.size()), Z_BEST_COMPRESSION) != Z_OK)
        throw IoError("tiff: deflate failed");
    out.resize(len);
    return out;
}

inline std::vector<std::uint8_t> lzma_bytes(std::span<const std::uint8_t> in) {
    std::vector<std::uint8_t> out(lzma_stream_buffer_bound(in.size()));
    std::size_t pos = 0;
    if (lzma_easy_buffer_encode(LZMA_PRESET_DEFAULT, LZMA_CHECK_CRC64, nullptr, in.data(), in.size(), out.data(),
                                &pos, out.size()) != LZMA_OK)
        throw IoError("tiff: lzma encode failed");
    out.resize(pos);
    return out;
}

inline BinaryMask decode_page(const Reader& r, std::uint64_t ifd, const Limits& limits, std::uint64_t& next_ifd) {
    const std::uint16_t n = r.u16(ifd);
    std::map<std::uint16_t, Entry> entries;
    for (std::uint16_t i = 0; i < n; ++i) {
        const std::uint64_t at = ifd + 2 + std::uint64_t{i} * 12;
        Entry e;
        const std::uint16_t tag = r.u16(at);
        e.type = r.u16(at + 2);
        e.count = r.u32(at + 4);
        const std::size_t sz = type_size(e.type);
        const std::uint64_t total = std::uint64_t{e.count} * (sz ? sz : 1);
        e.value_offset = total <= 4 ? at + 8 : r.u32(at + 8);
        entries[tag] = e;
    }
    next_ifd = r.u32(ifd + 2 + std::uint64_t{n} * 12);

    auto scalar = [&](std::uint16_t tag, std::optional<std::uint64_t> fallback) -> std::uint64_t {
        auto it = entries.find(tag);
        if (it == entries.end()) {
            if (!fallback) throw FormatError("tiff: missing required tag " + std::to_string(tag));
            return *fallback;
        }
        const auto v = read_uints(r, it->second);
        if (v.empty()) throw FormatError("tiff: empty value for tag " + std::to_string(tag));
        return v[0];
    };

    if (entries.count(TileWidth) || entries.count(TileOffsets) || entries.count(TileLength) ||
        entries.count(TileByteCounts))
        throw FormatError("tiff: tiled images are not supported");

    const std::uint64_t width = scalar(ImageWidth, std::nullopt);
    const std::uint64_t height = scalar(ImageLength, std::nullopt);
    if (width == 0 || height == 0) throw FormatError("tiff: zero-sized page");
    if (width * height > limits.max_pixels_per_page) throw FormatError("tiff: page too large");

    if (auto it = entries.find(BitsPerSample); it != entries.end())
        for (auto b : read_uints(r, it->second))
            if (b != 8) throw FormatError("tiff: only 8-bit samples are supported, got " + std::to_string(b));
    if (scalar(SamplesPerPixel, 1) != 1) throw FormatError("tiff: only single-channel pages are supported");
    if (scalar(Predictor, 1) != 1) throw FormatError("tiff: predictors are not supported");
    if (scalar(SampleFormat, 1) != 1) throw FormatError("tiff: only unsigned integer samples are supported");

    const auto compression = scalar(CompressionTag, 1);
    if (compression != static_cast<std::uint64_t>(Compression::Deflate) &&
        compression != static_cast<std::uint64_t>(Compression::AdobeDeflate) &&
        compression != static_cast<std::uint64_t>(Compression::Lzma))
        throw FormatError("tiff: unsupported compression " + std::to_string(compression));

    std::uint64_t rows_per_strip = scalar(RowsPerStrip, height);
    if (rows_per_strip == 0) throw FormatError("tiff: RowsPerStrip is zero");
    rows_per_strip = std::min(rows_per_strip, height);

    auto offsets_it = entries.find(StripOffsets);
    auto counts_it = entries.find(StripByteCounts);
    if (offsets_it == entries.end() || counts_it == entries.end()) throw FormatError("tiff: missing strip tags");
    const std::uint64_t strips = (height + rows_per_strip - 1) / rows_per_strip;
    if (offsets_it->second.count != strips || counts_it->second.count != strips)
        throw FormatError("tiff: strip count does not match image height");
    const auto offsets = read_uints(r, offsets_it->second);
    const auto counts = read_uints(r, counts_it->second);
    for (std::uint64_t s = 0; s < strips; ++s) (void)r.bytes(offsets[s], counts[s]);

    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width * height));
    for (std::uint64_t s = 0; s < strips; ++s) {
        const std::uint64_t row0 = s * rows_per_strip;
        const std::uint64_t rows = std::min(rows_per_strip, height - row0);
        std::span<std::uint8_t> out(pixels.data() + row0 * width, static_cast<std::size_t>(rows * width));
        const auto in = r.bytes(offsets[s], counts[s]);
        if (compression == static_cast<std::uint64_t>(Compression::Lzma))
            unlzma_strip(in, out);
        else
            inflate_strip(in, out);
    }
    return BinaryMask::from_pixels(static_cast<std::size_t>(width), static_cast<std::size_t>(height), pixels);
}

}  // namespace detail

/// Decodes every page of an in-memory TIFF file.
inline std::vector<BinaryMask> decode(std::span<const std::uint8_t> file, const Limits& limits = {}) {
    detail::Reader r(file);
    std::vector<BinaryMask> pages;
    std::set<std::uint64_t> visited;
    std::uint64_t ifd = r.u32(4);
    while (ifd != 0) {
        if (!visited.insert(ifd).second) throw FormatError("tiff: IFD chain loops");
        if (pages.size() >= limits.max_pages) throw FormatError("tiff: too many pages");
        std::uint64_t next = 0;
        pages.push_back(detail::decode_page(r, ifd, limits, next));
        ifd = next;
    }
    if (pages.empty()) throw FormatError("tiff: file has no pages");
    return pages;
}

/// Encodes masks as a multi-page TIFF, one page per mask, one strip per
/// page. Foreground pixels are written as 1.
inline std::vector<std::uint8_t> encode(std::span<const BinaryMask> masks, Compression compression) {
    if (masks.empty()) throw FormatError("tiff: refusing to write a file with zero pages");
    const auto width = masks.front().width();
    const auto height = masks.front().height();
    if (width == 0 || height == 0) throw FormatError("tiff: zero-sized mask");
    for (const auto& m : masks)
        if (m.width() != width || m.height() != height) throw FormatError("tiff: masks differ in size");
    if (width > std::numeric_limits<std::uint32_t>::max() || height > std::numeric_limits<std::uint32_t>::max())
        throw FormatError("tiff: mask too large");

    std::vector<std::uint8_t> out{'I', 'I', 42, 0, 0, 0, 0, 0};
    auto put16 = [&](std::uint16_t v) {
        out.push_back(static_cast<std::uint8_t>(v));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    };
    auto put32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    auto patch32 = [&](std::size_t at, std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
    };

    std::size_t link_at = 4;  // where the offset of the next IFD goes
    for (std::size_t page = 0; page < masks.size(); ++page) {
        const auto pixels = masks[page].to_pixels(1);
        const auto strip = compression == Compression::Lzma ? detail::lzma_bytes(pixels) : detail::deflate_bytes(pixels);

        const std::size_t strip_at = out.size();
        out.insert(out.end(), strip.begin(), strip.end());
        if (out.size() % 2) out.push_back(0);  // IFDs start on a word boundary
        if (out.size() > std::numeric_limits<std::uint32_t>::max()) throw IoError("tiff: file exceeds 4 GiB");

        patch32(link_at, static_cast<std::uint32_t>(out.size()));
        struct Field {
            std::uint16_t tag, type;
            std::uint32_t value;
        };
        const Field fields[] = {
            {detail::NewSubfileType, detail::Long, 2},  // page of a multi-page image
            {detail::ImageWidth, detail::Long, static_cast<std::uint32_t>(width)},
            {detail::ImageLength, detail::Long, static_cast<std::uint32_t>(height)},
            {detail::BitsPerSample, detail::Short, 8},
            {detail::CompressionTag, detail::Short, static_cast<std::uint16_t>(compression)},
            {detail::Photometric, detail::Short, 1},  // BlackIsZero
            {detail::StripOffsets, detail::Long, static_cast<std::uint32_t>(strip_at)},
            {detail::SamplesPerPixel, detail::Short, 1},
            {detail::RowsPerStrip, detail::Long, static_cast<std::uint32_t>(height)},
            {detail::StripByteCounts, detail::Long, static_cast<std::uint32_t>(strip.size())},
            {detail::PlanarConfig, detail::Short, 1},
        };
        put16(static_cast<std::uint16_t>(std::size(fields)));
        for (const auto& f : fields) {
            put16(f.tag);
            put16(f.type);
            put32(1);
            if (f.type == detail::Short) {
                put16(static_cast<std::uint16_t>(f.value));
                put16(0);
            } else {
                put32(f.value);
            }
        }
        link_at = out.size();
        put32(0);
    }
    return out;
}

}  // namespace sgeval::tiff

namespace sgeval {

/// One binary mask per TIFF page, in page order.
inline std::vector<BinaryMask> read_prediction_masks(const std::filesystem::path& path) {
    const auto bytes = io::read_file_bytes(path);
    try {
        return tiff::decode(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

inline void write_prediction_masks(std::span<const BinaryMask> masks, const std::filesystem::path& path,
                                   tiff::Compression compression = tiff::Compression::Deflate) {
    io::write_file_bytes(path, tiff::encode(masks, compression));
}

}  // namespace sgeval
