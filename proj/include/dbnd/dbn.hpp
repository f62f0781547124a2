#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbnd/data.hpp"
#include "dbnd/rbm.hpp"

namespace dbnd {

// Stack of RBMs trained greedily, one layer at a time. The bottom layer sees
// pixel intensities (RealUnit visibles); every deeper layer is binary.
struct Dbn {
    std::vector<Rbm> layers;

    int input_width() const { return layers.empty() ? 0 : layers.front().n_visible; }
    int top_width() const { return layers.empty() ? 0 : layers.back().n_hidden; }

    std::vector<int> layer_widths() const {
        std::vector<int> w;
        if (layers.empty()) return w;
        w.push_back(layers.front().n_visible);
        for (const Rbm& r : layers) w.push_back(r.n_hidden);
        return w;
    }
};

inline void validate_dbn(const Dbn& d) {
    if (d.layers.empty()) throw std::invalid_argument("dbn: no layers");
    for (std::size_t k = 0; k + 1 < d.layers.size(); ++k)
        if (d.layers[k].n_hidden != d.layers[k + 1].n_visible)
            throw std::invalid_argument("dbn: layer width mismatch between layers " +
                                        std::to_string(k) + " and " + std::to_string(k + 1));
}

// Per-layer unit activations; layers[0] is the input itself and the last
// entry is the top-level feature vector.
struct Activations {
    std::vector<Eigen::VectorXd> layers;

    const Eigen::VectorXd& top() const { return layers.back(); }
};

// Starts each visible bias at the logit of its unit's mean input activation,
// so reconstructions begin at the data marginals instead of at 0.5. With the
// short per-layer training budgets used here, learning that offset from a
// zero start would eat most of the updates.
inline void init_visible_bias_from_marginals(Rbm& m, const Eigen::MatrixXd& data) {
    if (data.cols() != m.n_visible)
        throw std::invalid_argument("init_visible_bias_from_marginals: dimension mismatch");
    const Eigen::VectorXd mean = data.colwise().mean();
    for (int i = 0; i < m.n_visible; ++i) {
        const double p = std::clamp(mean[i], 1e-3, 1.0 - 1e-3);
        m.visible_bias[i] = std::log(p / (1.0 - p));
    }
}

// Trains RBM k on the deterministic activation probabilities of layer k-1
// over the whole training set (layer 0 sees the raw images). Deterministic
// activations rather than samples keep the stacked features reproducible.
inline Dbn greedy_pretrain(const std::vector<int>& widths, const std::vector<Image>& images,
                           const std::vector<TrainConfig>& layer_cfgs) {
    if (widths.size() < 2) throw std::invalid_argument("greedy_pretrain: need at least one hidden layer");
    if (images.empty()) throw std::invalid_argument("greedy_pretrain: empty training set");
    if (images.front().size() != widths.front())
        throw std::invalid_argument("greedy_pretrain: widths[0] != image pixel count");
    if (layer_cfgs.size() != widths.size() - 1)
        throw std::invalid_argument("greedy_pretrain: one TrainConfig per layer required");

    Dbn d;
    Eigen::MatrixXd x = images_matrix(images);
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        const VisibleKind kind = k == 0 ? VisibleKind::RealUnit : VisibleKind::Binary;
        Rbm m = init_rbm(widths[k], widths[k + 1], kind, derive_seed(layer_cfgs[k].seed, 0));
        init_visible_bias_from_marginals(m, x);
        TrainConfig cfg = layer_cfgs[k];
        cfg.seed = derive_seed(layer_cfgs[k].seed, 1);
        train_rbm(m, x, cfg);
        x = hidden_activations(m, x);
        d.layers.push_back(std::move(m));
    }
    return d;
}

// Same config for every layer, with per-layer seeds derived from cfg.seed.
inline Dbn greedy_pretrain(const std::vector<int>& widths, const std::vector<Image>& images,
                           const TrainConfig& cfg) {
    std::vector<TrainConfig> layer_cfgs(widths.empty() ? 0 : widths.size() - 1, cfg);
    for (std::size_t k = 0; k < layer_cfgs.size(); ++k)
        layer_cfgs[k].seed = derive_seed(cfg.seed, 100 + k);
    return greedy_pretrain(widths, images, layer_cfgs);
}

// Deterministic upward pass: every layer emits activation probabilities,
// never samples, so two calls agree bit for bit.
inline Activations encode(const Dbn& d, const Image& img) {
    validate_dbn(d);
    if (img.size() != d.input_width())
        throw std::invalid_argument("encode: image size does not match input width");
    Activations acts;
    acts.layers.reserve(d.layers.size() + 1);
    acts.layers.push_back(img.pixels);
    for (const Rbm& m : d.layers) acts.layers.push_back(hidden_activation(m, acts.layers.back()));
    return acts;
}

// Top-layer features for a batch of flattened images, one per row.
inline Eigen::MatrixXd encode_top(const Dbn& d, const Eigen::MatrixXd& X) {
    validate_dbn(d);
    if (X.cols() != d.input_width())
        throw std::invalid_argument("encode_top: width does not match input width");
    Eigen::MatrixXd x = X;
    for (const Rbm& m : d.layers) x = hidden_activations(m, x);
    return x;
}

// Downward pass from a top-layer vector through the transposed generative
// weights of each RBM; the model file carries no raster shape, so the caller
// names the output dimensions.
inline Image reconstruct(const Dbn& d, const Eigen::VectorXd& top, int width, int height) {
    validate_dbn(d);
    if (top.size() != d.top_width())
        throw std::invalid_argument("reconstruct: top vector size mismatch");
    if (width * height != d.input_width())
        throw std::invalid_argument("reconstruct: width*height does not match input width");
    Eigen::VectorXd x = top;
    for (auto it = d.layers.rbegin(); it != d.layers.rend(); ++it) x = visible_activation(*it, x);
    return Image{width, height, std::move(x)};
}

// ---------------------------------------------------------------------------
// Model file: little-endian binary, magic "DBNM", version, layer count, then
// per RBM the two dimensions followed by visible bias, hidden bias, and the
// weight matrix as 64-bit floats in visible-major (row-major) order.
// The save/load round trip is bit-exact.
// ---------------------------------------------------------------------------

inline constexpr char kModelMagic[4] = {'D', 'B', 'N', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_f64_le(std::ostream& out, double x) {
    const std::uint64_t v = std::bit_cast<std::uint64_t>(x);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint32_t read_u32_le(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error(std::string("model: truncated file reading ") + what);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

inline double read_f64_le(std::istream& in, const char* what) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw std::runtime_error(std::string("model: truncated file reading ") + what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

}  // namespace detail

inline void save_model(const Dbn& d, const std::string& path) {
    validate_dbn(d);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("model: cannot open " + path + " for writing");

    out.write(kModelMagic, 4);
    detail::write_u32_le(out, kModelVersion);
    detail::write_u32_le(out, static_cast<std::uint32_t>(d.layers.size()));
    for (const Rbm& m : d.layers) {
        detail::write_u32_le(out, static_cast<std::uint32_t>(m.n_visible));
        detail::write_u32_le(out, static_cast<std::uint32_t>(m.n_hidden));
        for (int i = 0; i < m.n_visible; ++i) detail::write_f64_le(out, m.visible_bias[i]);
        for (int j = 0; j < m.n_hidden; ++j) detail::write_f64_le(out, m.hidden_bias[j]);
        for (int i = 0; i < m.n_visible; ++i)
            for (int j = 0; j < m.n_hidden; ++j) detail::write_f64_le(out, m.weights(i, j));
    }
    if (!out) throw std::runtime_error("model: write failed for " + path);
}

inline Dbn load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("model: cannot open " + path);

    char magic[4];
    if (!in.read(magic, 4)) throw std::runtime_error("model: truncated file reading magic");
    if (std::string(magic, 4) != std::string(kModelMagic, 4))
        throw std::runtime_error("model: bad magic \"" + std::string(magic, 4) + "\" in " + path);

    const std::uint32_t version = detail::read_u32_le(in, "version");
    if (version != kModelVersion)
        throw std::runtime_error("model: unsupported version " + std::to_string(version));

    const std::uint32_t n_layers = detail::read_u32_le(in, "layer count");
    if (n_layers == 0 || n_layers > 1024)
        throw std::runtime_error("model: implausible layer count " + std::to_string(n_layers));

    Dbn d;
    for (std::uint32_t k = 0; k < n_layers; ++k) {
        Rbm m;
        m.n_visible = static_cast<int>(detail::read_u32_le(in, "n_visible"));
        m.n_hidden = static_cast<int>(detail::read_u32_le(in, "n_hidden"));
        if (m.n_visible <= 0 || m.n_hidden <= 0)
            throw std::runtime_error("model: non-positive layer dimension");
        m.visible_kind = k == 0 ? VisibleKind::RealUnit : VisibleKind::Binary;
        m.visible_bias.resize(m.n_visible);
        m.hidden_bias.resize(m.n_hidden);
        m.weights.resize(m.n_visible, m.n_hidden);
        for (int i = 0; i < m.n_visible; ++i) m.visible_bias[i] = detail::read_f64_le(in, "visible bias");
        for (int j = 0; j < m.n_hidden; ++j) m.hidden_bias[j] = detail::read_f64_le(in, "hidden bias");
        for (int i = 0; i < m.n_visible; ++i)
            for (int j = 0; j < m.n_hidden; ++j) m.weights(i, j) = detail::read_f64_le(in, "weights");
        d.layers.push_back(std::move(m));
    }
    validate_dbn(d);
    return d;
}

}  // namespace dbnd
