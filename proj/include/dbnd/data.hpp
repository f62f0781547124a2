#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dbnd/rng.hpp"

namespace dbnd {

// Grayscale raster with intensities in [0,1], row-major.
struct Image {
    int width = 0;
    int height = 0;
    Eigen::VectorXd pixels;  // length width*height

    int size() const { return width * height; }
};

inline bool image_is_valid(const Image& img) {
    if (img.width <= 0 || img.height <= 0) return false;
    if (img.pixels.size() != img.size()) return false;
    return (img.pixels.array() >= 0.0).all() && (img.pixels.array() <= 1.0).all();
}

// Byte <-> intensity. Fixed global range 0..255, so the round trip
// denormalize(normalize(k)) == k is exact for every byte.
inline double normalize_byte(std::uint8_t k) { return k / 255.0; }

inline std::uint8_t denormalize(double p) {
    const long k = std::lround(255.0 * p);
    return static_cast<std::uint8_t>(std::clamp(k, 0l, 255l));
}

// ---------------------------------------------------------------------------
// IDX container (the MNIST binary format), big-endian:
//   images: magic 0x00000803 | count | rows | cols | count*rows*cols bytes
//   labels: magic 0x00000801 | count | count bytes
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803u;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801u;

namespace detail {

inline std::uint32_t read_u32_be(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error(std::string("idx: unexpected end of file reading ") + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline std::string hex_u32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", v);
    return buf;
}

}  // namespace detail

inline std::vector<Image> load_idx(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("idx: cannot open " + path);

    const std::uint32_t magic = detail::read_u32_be(in, "magic");
    if (magic != kIdxImagesMagic)
        throw std::runtime_error("idx: bad image magic " + detail::hex_u32(magic) + " in " + path);

    const std::uint32_t count = detail::read_u32_be(in, "count");
    const std::uint32_t rows = detail::read_u32_be(in, "rows");
    const std::uint32_t cols = detail::read_u32_be(in, "cols");
    if (rows == 0 || cols == 0)
        throw std::runtime_error("idx: zero image dimensions in " + path);

    const std::size_t px = std::size_t(rows) * cols;
    std::vector<std::uint8_t> buf(px);
    std::vector<Image> images;
    images.reserve(count);
    for (std::uint32_t n = 0; n < count; ++n) {
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(px)))
            throw std::runtime_error("idx: truncated payload in " + path);
        Image img{static_cast<int>(cols), static_cast<int>(rows),
                  Eigen::VectorXd(static_cast<Eigen::Index>(px))};
        for (std::size_t i = 0; i < px; ++i) img.pixels[static_cast<Eigen::Index>(i)] = normalize_byte(buf[i]);
        images.push_back(std::move(img));
    }
    return images;
}

// Labels are parsed for completeness; the denoising pipeline never uses them.
inline std::vector<std::uint8_t> load_idx_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("idx: cannot open " + path);

    const std::uint32_t magic = detail::read_u32_be(in, "magic");
    if (magic != kIdxLabelsMagic)
        throw std::runtime_error("idx: bad label magic " + detail::hex_u32(magic) + " in " + path);

    const std::uint32_t count = detail::read_u32_be(in, "count");
    std::vector<std::uint8_t> labels(count);
    if (count > 0 && !in.read(reinterpret_cast<char*>(labels.data()), count))
        throw std::runtime_error("idx: truncated payload in " + path);
    return labels;
}

// ---------------------------------------------------------------------------
// Corruption and pairing
// ---------------------------------------------------------------------------

// Adds i.i.d. zero-mean Gaussian noise of the given variance (sigma^2) to
// every pixel and clamps back into [0,1]. Deterministic for a fixed seed.
inline Image add_awgn(const Image& img, double variance, std::uint64_t seed) {
    if (variance < 0.0) throw std::invalid_argument("add_awgn: negative variance");
    RngStream rng(seed);
    const double sd = std::sqrt(variance);
    Image out{img.width, img.height, Eigen::VectorXd(img.pixels.size())};
    for (Eigen::Index i = 0; i < img.pixels.size(); ++i)
        out.pixels[i] = std::clamp(img.pixels[i] + sd * rng.gaussian(), 0.0, 1.0);
    return out;
}

struct ImagePair {
    Image clean;
    Image noisy;
};

struct PairedDataset {
    std::vector<ImagePair> pairs;
    double noise_variance = 0.0;
};

// One (clean, noisy) pair per input image, index-aligned. Each image gets
// its own derived noise stream, so the result does not depend on order of
// generation.
inline PairedDataset make_pairs(const std::vector<Image>& clean, double variance,
                                std::uint64_t seed) {
    if (clean.empty()) throw std::invalid_argument("make_pairs: empty input");
    for (const Image& img : clean)
        if (img.width != clean.front().width || img.height != clean.front().height)
            throw std::invalid_argument("make_pairs: images must share one size");

    PairedDataset ds;
    ds.noise_variance = variance;
    ds.pairs.reserve(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i)
        ds.pairs.push_back({clean[i], add_awgn(clean[i], variance, derive_seed(seed, i))});
    return ds;
}

// Splits a sequence into consecutive batches; the last one may be short.
// Concatenating the batches gives back the source in order.
template <typename T>
std::vector<std::span<const T>> batches(const std::vector<T>& items, std::size_t batch_size) {
    if (batch_size == 0) throw std::invalid_argument("batches: batch_size must be >= 1");
    std::vector<std::span<const T>> out;
    out.reserve(items.size() / batch_size + 1);
    for (std::size_t i = 0; i < items.size(); i += batch_size)
        out.emplace_back(items.data() + i, std::min(batch_size, items.size() - i));
    return out;
}

inline std::vector<std::span<const ImagePair>> batches(const PairedDataset& ds,
                                                       std::size_t batch_size) {
    return batches(ds.pairs, batch_size);
}

// Stacks images into a matrix with one sample per row.
inline Eigen::MatrixXd images_matrix(const std::vector<Image>& images) {
    if (images.empty()) throw std::invalid_argument("images_matrix: empty input");
    const Eigen::Index px = images.front().pixels.size();
    Eigen::MatrixXd X(static_cast<Eigen::Index>(images.size()), px);
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].pixels.size() != px)
            throw std::invalid_argument("images_matrix: images must share one size");
        X.row(static_cast<Eigen::Index>(i)) = images[i].pixels.transpose();
    }
    return X;
}

}  // namespace dbnd
