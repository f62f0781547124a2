#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbnd/data.hpp"
#include "dbnd/dbn.hpp"
#include "dbnd/denoise.hpp"

namespace dbnd {

// Mean over pixels of the squared intensity difference.
inline double mse(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("mse: dimension mismatch");
    return (a.pixels - b.pixels).squaredNorm() / static_cast<double>(a.size());
}

// ---------------------------------------------------------------------------
// PGM output (binary "P5", maxval 255) for eyeballing results.
// ---------------------------------------------------------------------------

inline void save_pgm(const Image& img, const std::string& path) {
    if (img.width <= 0 || img.height <= 0 || img.pixels.size() != img.size())
        throw std::invalid_argument("save_pgm: malformed image");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("pgm: cannot open " + path + " for writing");

    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> bytes(static_cast<std::size_t>(img.size()));
    for (Eigen::Index i = 0; i < img.pixels.size(); ++i)
        bytes[static_cast<std::size_t>(i)] = denormalize(img.pixels[i]);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("pgm: write failed for " + path);
}

namespace detail {

inline unsigned pgm_token(std::istream& in, const char* what) {
    // skip whitespace and '#' comment lines
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (c != EOF && c != '\n') c = in.get();
        c = in.get();
    }
    unsigned value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + static_cast<unsigned>(c - '0');
        any = true;
        c = in.get();
    }
    if (!any) throw std::runtime_error(std::string("pgm: missing ") + what);
    return value;
}

}  // namespace detail

inline Image load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("pgm: cannot open " + path);

    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5') throw std::runtime_error("pgm: not a binary PGM: " + path);

    const unsigned width = detail::pgm_token(in, "width");
    const unsigned height = detail::pgm_token(in, "height");
    const unsigned maxval = detail::pgm_token(in, "maxval");
    if (maxval != 255) throw std::runtime_error("pgm: unsupported maxval in " + path);

    std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height);
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
        throw std::runtime_error("pgm: truncated payload in " + path);

    Image img{static_cast<int>(width), static_cast<int>(height),
              Eigen::VectorXd(static_cast<Eigen::Index>(bytes.size()))};
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img.pixels[static_cast<Eigen::Index>(i)] = normalize_byte(bytes[i]);
    return img;
}

// Tiles images into one PGM: one column per condition, one row per sample,
// 2-pixel separators at intensity 128.
inline void image_grid(const std::vector<std::vector<Image>>& rows, const std::string& path) {
    if (rows.empty() || rows.front().empty()) throw std::invalid_argument("image_grid: empty grid");
    const std::size_t n_cols = rows.front().size();
    const int w = rows.front().front().width;
    const int h = rows.front().front().height;
    for (const auto& row : rows) {
        if (row.size() != n_cols) throw std::invalid_argument("image_grid: ragged rows");
        for (const Image& img : row)
            if (img.width != w || img.height != h)
                throw std::invalid_argument("image_grid: mixed image sizes");
    }

    const int sep = 2;
    const int grid_w = static_cast<int>(n_cols) * w + (static_cast<int>(n_cols) - 1) * sep;
    const int grid_h = static_cast<int>(rows.size()) * h + (static_cast<int>(rows.size()) - 1) * sep;
    Image grid{grid_w, grid_h, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid_w) * grid_h,
                                                         normalize_byte(128))};
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < n_cols; ++c) {
            const int x0 = static_cast<int>(c) * (w + sep);
            const int y0 = static_cast<int>(r) * (h + sep);
            const Image& img = rows[r][c];
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    grid.pixels[(y0 + y) * static_cast<Eigen::Index>(grid_w) + x0 + x] =
                        img.pixels[y * static_cast<Eigen::Index>(w) + x];
        }
    save_pgm(grid, path);
}

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::string mnist_dir;
    std::string out_dir;
    std::vector<int> widths{784, 1000, 500, 250, 100};
    int epochs = 10;
    double learning_rate = 0.1;
    int batch_size = 100;
    double noise_variance = 0.20;
    double threshold = 0.9;
    int train_count = 10000;  // clean training images; each contributes a (clean, noisy) pair
    int test_count = 10000;   // 0 means the whole test file
    std::uint64_t seed = 1;
};

struct ExperimentReport {
    double mse_noisy = 0.0;
    double mse_plain_reconstruction = 0.0;
    double mse_denoised = 0.0;
    int n_noise_nodes = 0;
    double threshold = 0.0;
    int test_images_evaluated = 0;
    int top_width = 0;
    ExperimentConfig config;
};

namespace detail {

inline std::string format_sci(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9e", x);
    return buf;
}

inline std::string join_widths(const std::vector<int>& widths) {
    std::string s;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(widths[i]);
    }
    return s;
}

template <typename F>
auto run_stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

}  // namespace detail

inline void write_report(const ExperimentReport& r, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("report: cannot open " + path + " for writing");
    const ExperimentConfig& c = r.config;
    out << "mnist_dir=" << c.mnist_dir << "\n"
        << "out_dir=" << c.out_dir << "\n"
        << "widths=" << detail::join_widths(c.widths) << "\n"
        << "epochs=" << c.epochs << "\n"
        << "learning_rate=" << detail::format_sci(c.learning_rate) << "\n"
        << "batch_size=" << c.batch_size << "\n"
        << "noise_variance=" << detail::format_sci(c.noise_variance) << "\n"
        << "threshold=" << detail::format_sci(r.threshold) << "\n"
        << "train_count=" << c.train_count << "\n"
        << "train_elements=" << 2 * c.train_count << "\n"
        << "test_count=" << c.test_count << "\n"
        << "seed=" << c.seed << "\n"
        << "test_images_evaluated=" << r.test_images_evaluated << "\n"
        << "top_width=" << r.top_width << "\n"
        << "n_noise_nodes=" << r.n_noise_nodes << "\n"
        << "mse_noisy=" << detail::format_sci(r.mse_noisy) << "\n"
        << "mse_plain_reconstruction=" << detail::format_sci(r.mse_plain_reconstruction) << "\n"
        << "mse_denoised=" << detail::format_sci(r.mse_denoised) << "\n";
    if (!out) throw std::runtime_error("report: write failed for " + path);
}

inline std::vector<Image> load_mnist_train(const std::string& mnist_dir) {
    return load_idx(mnist_dir + "/train-images-idx3-ubyte");
}

inline std::vector<Image> load_mnist_test(const std::string& mnist_dir) {
    return load_idx(mnist_dir + "/t10k-images-idx3-ubyte");
}

inline std::vector<Image> take_first(std::vector<Image> images, int count, const char* what) {
    if (count < 0) throw std::invalid_argument(std::string(what) + ": negative count");
    if (count == 0) return images;
    if (static_cast<std::size_t>(count) > images.size())
        throw std::invalid_argument(std::string(what) + ": requested " + std::to_string(count) +
                                    " images, file has " + std::to_string(images.size()));
    images.resize(static_cast<std::size_t>(count));
    return images;
}

// Training set for the stack: each pair contributes its clean and its noisy
// image, interleaved so every batch sees both.
inline std::vector<Image> interleave_pairs(const PairedDataset& ds) {
    std::vector<Image> out;
    out.reserve(2 * ds.pairs.size());
    for (const ImagePair& p : ds.pairs) {
        out.push_back(p.clean);
        out.push_back(p.noisy);
    }
    return out;
}

// Training pairs exactly as the experiment uses them; `train` and `profile`
// runs with the same config see the same corruption.
inline PairedDataset experiment_train_pairs(const ExperimentConfig& cfg) {
    auto clean = take_first(load_mnist_train(cfg.mnist_dir), cfg.train_count, "train");
    return make_pairs(clean, cfg.noise_variance, derive_seed(cfg.seed, 1));
}

inline Dbn experiment_pretrain(const ExperimentConfig& cfg, const PairedDataset& train_pairs) {
    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.seed = derive_seed(cfg.seed, 2);
    return greedy_pretrain(cfg.widths, interleave_pairs(train_pairs), tc);
}

inline PairedDataset experiment_test_pairs(const ExperimentConfig& cfg) {
    auto clean = take_first(load_mnist_test(cfg.mnist_dir), cfg.test_count, "test");
    return make_pairs(clean, cfg.noise_variance, derive_seed(cfg.seed, 3));
}

// Full pipeline: load, corrupt, pretrain, profile, score the noisy test set,
// and drop model/profile/report/grid into the output directory. Everything
// downstream of the seed is deterministic, so identical configs produce
// byte-identical output files.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const auto train_pairs =
        detail::run_stage("load-train", [&] { return experiment_train_pairs(cfg); });

    const Dbn dbn =
        detail::run_stage("pretrain", [&] { return experiment_pretrain(cfg, train_pairs); });

    const NoiseProfile profile = detail::run_stage("profile", [&] {
        return build_profile(dbn, train_pairs, cfg.threshold);
    });

    ExperimentReport report;
    report.config = cfg;
    report.threshold = cfg.threshold;
    report.n_noise_nodes = static_cast<int>(profile.noise_nodes.size());
    report.top_width = dbn.top_width();

    const auto test_pairs =
        detail::run_stage("load-test", [&] { return experiment_test_pairs(cfg); });

    std::vector<std::vector<Image>> grid_rows;
    detail::run_stage("evaluate", [&] {
        double sum_noisy = 0.0, sum_plain = 0.0, sum_denoised = 0.0;
        const std::size_t n = test_pairs.pairs.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Image& clean = test_pairs.pairs[i].clean;
            const Image& noisy = test_pairs.pairs[i].noisy;
            const Image plain = reconstruct(dbn, encode(dbn, noisy).top(), noisy.width, noisy.height);
            const Image cleaned = denoise(dbn, profile, noisy);
            sum_noisy += mse(clean, noisy);
            sum_plain += mse(clean, plain);
            sum_denoised += mse(clean, cleaned);
            if (i < 6) grid_rows.push_back({clean, noisy, plain, cleaned});
        }
        report.mse_noisy = sum_noisy / static_cast<double>(n);
        report.mse_plain_reconstruction = sum_plain / static_cast<double>(n);
        report.mse_denoised = sum_denoised / static_cast<double>(n);
        report.test_images_evaluated = static_cast<int>(n);
        return 0;
    });

    detail::run_stage("write-output", [&] {
        std::filesystem::create_directories(cfg.out_dir);
        save_model(dbn, cfg.out_dir + "/model.dbnm");
        save_profile(profile, cfg.out_dir + "/profile.txt");
        write_report(report, cfg.out_dir + "/report.txt");
        image_grid(grid_rows, cfg.out_dir + "/grid.pgm");
        return 0;
    });

    return report;
}

}  // namespace dbnd
