#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dbnd/data.hpp"
#include "dbnd/rng.hpp"

// Synthetic stand-in for a handwritten-digit corpus: seeded stroke renderings
// of the ten digits with random affine jitter, written in the same IDX
// container the real dataset uses. Pixel statistics are deliberately close
// to scanned digits (mostly exact-zero background, near-saturated strokes,
// a thin antialiased fringe) so corruption and reconstruction behave the
// same way. Useful for tests and demos when the real files are not on disk.

namespace dbnd {
namespace synth {

struct Vec2 {
    double x;
    double y;
};

using Polyline = std::vector<Vec2>;

inline const std::vector<std::vector<Polyline>>& digit_strokes() {
    static const std::vector<std::vector<Polyline>> strokes = [] {
        std::vector<std::vector<Polyline>> d(10);
        auto ring = [](double cx, double cy, double rx, double ry, int n) {
            Polyline p;
            for (int i = 0; i <= n; ++i) {
                const double t = 2.0 * M_PI * i / n;
                p.push_back({cx + rx * std::sin(t), cy - ry * std::cos(t)});
            }
            return p;
        };
        d[0] = {ring(0.5, 0.5, 0.30, 0.40, 12)};
        d[1] = {{{0.38, 0.22}, {0.56, 0.08}, {0.56, 0.92}}};
        d[2] = {{{0.22, 0.28}, {0.32, 0.12}, {0.55, 0.08}, {0.74, 0.18}, {0.76, 0.38}, {0.24, 0.90}, {0.80, 0.90}}};
        d[3] = {{{0.25, 0.14}, {0.52, 0.08}, {0.72, 0.22}, {0.58, 0.44}, {0.44, 0.50},
                 {0.64, 0.56}, {0.74, 0.74}, {0.54, 0.92}, {0.26, 0.84}}};
        d[4] = {{{0.62, 0.08}, {0.20, 0.62}, {0.82, 0.62}}, {{0.62, 0.30}, {0.62, 0.92}}};
        d[5] = {{{0.74, 0.10}, {0.30, 0.10}, {0.26, 0.46}, {0.55, 0.42}, {0.74, 0.58},
                 {0.70, 0.82}, {0.46, 0.92}, {0.26, 0.82}}};
        d[6] = {{{0.64, 0.10}, {0.42, 0.24}, {0.30, 0.52}, {0.32, 0.76}, {0.50, 0.90},
                 {0.68, 0.78}, {0.66, 0.56}, {0.46, 0.50}, {0.32, 0.62}}};
        d[7] = {{{0.20, 0.10}, {0.80, 0.10}, {0.46, 0.90}}};
        d[8] = {ring(0.5, 0.30, 0.20, 0.20, 10), ring(0.5, 0.70, 0.25, 0.22, 10)};
        d[9] = {{{0.36, 0.90}, {0.58, 0.76}, {0.70, 0.48}, {0.68, 0.24}, {0.50, 0.10},
                 {0.34, 0.22}, {0.36, 0.44}, {0.56, 0.50}, {0.70, 0.40}}};
        return d;
    }();
    return strokes;
}

namespace detail {

inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double ex = p.x - (a.x + t * dx), ey = p.y - (a.y + t * dy);
    return std::sqrt(ex * ex + ey * ey);
}

}  // namespace detail

inline constexpr int kDigitSide = 28;

// Renders one digit with random rotation, scale and shift. Intensity ramps
// linearly across an antialias band around the stroke; background pixels
// are exactly zero.
inline Image render_digit(int digit, RngStream& rng) {
    if (digit < 0 || digit > 9) throw std::invalid_argument("render_digit: digit outside 0..9");
    const auto& strokes = digit_strokes()[static_cast<std::size_t>(digit)];

    const double angle = (rng.uniform() - 0.5) * 0.28;
    const double sx = 17.0 + 5.0 * rng.uniform();
    const double sy = 17.0 + 5.0 * rng.uniform();
    const double tx = 14.0 + (rng.uniform() - 0.5) * 3.0;
    const double ty = 14.0 + (rng.uniform() - 0.5) * 3.0;
    const double half_width = 1.0 + 0.5 * rng.uniform();
    const double aa_band = 0.8;
    const double ca = std::cos(angle), sa = std::sin(angle);

    auto to_px = [&](Vec2 p) -> Vec2 {
        const double ux = (p.x - 0.5) * sx, uy = (p.y - 0.5) * sy;
        return {tx + ca * ux - sa * uy, ty + sa * ux + ca * uy};
    };

    std::vector<std::pair<Vec2, Vec2>> segments;
    for (const Polyline& line : strokes)
        for (std::size_t i = 0; i + 1 < line.size(); ++i)
            segments.emplace_back(to_px(line[i]), to_px(line[i + 1]));

    Image img{kDigitSide, kDigitSide, Eigen::VectorXd::Zero(kDigitSide * kDigitSide)};
    for (int y = 0; y < kDigitSide; ++y)
        for (int x = 0; x < kDigitSide; ++x) {
            const Vec2 p{x + 0.5, y + 0.5};
            double dist = 1e9;
            for (const auto& [a, b] : segments) dist = std::min(dist, detail::segment_distance(p, a, b));
            const double intensity = std::clamp((half_width - dist) / aa_band + 1.0, 0.0, 1.0);
            img.pixels[y * kDigitSide + x] = intensity;
        }
    return img;
}

// `count` digit images with uniformly random digit identity; image i depends
// only on (seed, i).
inline std::pair<std::vector<Image>, std::vector<std::uint8_t>> make_images(int count,
                                                                            std::uint64_t seed) {
    if (count < 0) throw std::invalid_argument("make_images: negative count");
    std::vector<Image> images;
    std::vector<std::uint8_t> labels;
    images.reserve(static_cast<std::size_t>(count));
    labels.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        RngStream rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const int digit = std::min(9, static_cast<int>(rng.uniform() * 10.0));
        images.push_back(render_digit(digit, rng));
        labels.push_back(static_cast<std::uint8_t>(digit));
    }
    return {std::move(images), std::move(labels)};
}

namespace detail {

inline void write_u32_be(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>((v >> 24) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>(v & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace detail

inline void write_idx_images(const std::string& path, const std::vector<Image>& images) {
    if (images.empty()) throw std::invalid_argument("write_idx_images: empty input");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("idx: cannot open " + path + " for writing");

    detail::write_u32_be(out, kIdxImagesMagic);
    detail::write_u32_be(out, static_cast<std::uint32_t>(images.size()));
    detail::write_u32_be(out, static_cast<std::uint32_t>(images.front().height));
    detail::write_u32_be(out, static_cast<std::uint32_t>(images.front().width));
    std::vector<unsigned char> bytes;
    for (const Image& img : images) {
        if (img.width != images.front().width || img.height != images.front().height)
            throw std::invalid_argument("write_idx_images: images must share one size");
        bytes.resize(static_cast<std::size_t>(img.size()));
        for (Eigen::Index i = 0; i < img.pixels.size(); ++i)
            bytes[static_cast<std::size_t>(i)] = denormalize(img.pixels[i]);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
    if (!out) throw std::runtime_error("idx: write failed for " + path);
}

inline void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("idx: cannot open " + path + " for writing");
    detail::write_u32_be(out, kIdxLabelsMagic);
    detail::write_u32_be(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
    if (!out) throw std::runtime_error("idx: write failed for " + path);
}

// Lays down a directory with the four standard file names so it can be used
// anywhere a real dataset directory is expected.
inline void write_dataset_dir(const std::string& dir, int n_train, int n_test,
                              std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    auto [train_images, train_labels] = make_images(n_train, derive_seed(seed, 0xA));
    auto [test_images, test_labels] = make_images(n_test, derive_seed(seed, 0xB));
    write_idx_images(dir + "/train-images-idx3-ubyte", train_images);
    write_idx_labels(dir + "/train-labels-idx1-ubyte", train_labels);
    write_idx_images(dir + "/t10k-images-idx3-ubyte", test_images);
    write_idx_labels(dir + "/t10k-labels-idx1-ubyte", test_labels);
}

}  // namespace synth
}  // namespace dbnd
