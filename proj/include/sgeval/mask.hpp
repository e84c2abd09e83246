// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace sgeval {

/// Bit-packed binary pixel mask, row-major. Any nonzero input pixel is
/// foreground.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(std::size_t width, std::size_t height)
        : width_(width), height_(height), words_((width * height + 63) / 64, 0) {}

    /// From one byte per pixel (row-major, width * height bytes).
    static BinaryMask from_pixels(std::size_t width, std::size_t height,
                                  std::span<const std::uint8_t> pixels) {
        if (pixels.size() != width * height)
            throw std::invalid_argument("pixel buffer does not match mask dimensions");
        BinaryMask m(width, height);
        for (std::size_t i = 0; i < pixels.size(); ++i)
            if (pixels[i] != 0) m.words_[i >> 6] |= std::uint64_t{1} << (i & 63);
        return m;
    }

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t size() const { return width_ * height_; }

    bool get(std::size_t x, std::size_t y) const {
        const std::size_t i = y * width_ + x;
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::size_t x, std::size_t y, bool on = true) {
        const std::size_t i = y * width_ + x;
        const std::uint64_t bit = std::uint64_t{1} << (i & 63);
        if (on)
            words_[i >> 6] |= bit;
        else
            words_[i >> 6] &= ~bit;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    /// One byte per pixel, 0 or `on_value`.
    std::vector<std::uint8_t> to_pixels(std::uint8_t on_value = 1) const {
        std::vector<std::uint8_t> out(size(), 0);
        for (std::size_t i = 0; i < out.size(); ++i)
            if ((words_[i >> 6] >> (i & 63)) & 1u) out[i] = on_value;
        return out;
    }

    std::span<const std::uint64_t> words() const { return words_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::uint64_t> words_;  // padding bits past size() stay zero
};

}  // namespace sgeval
