#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

#include "dbnd/rng.hpp"

namespace dbnd {

// Restricted Boltzmann Machine over binary hidden units. Visible units are
// either binary or logistic-mean units on [0,1] (used for the pixel layer,
// where activation probabilities stand in directly for values).
enum class VisibleKind { Binary, RealUnit };

struct Rbm {
    int n_visible = 0;
    int n_hidden = 0;
    Eigen::MatrixXd weights;       // n_visible x n_hidden
    Eigen::VectorXd visible_bias;  // n_visible
    Eigen::VectorXd hidden_bias;   // n_hidden
    VisibleKind visible_kind = VisibleKind::Binary;
};

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 1;
    int batch_size = 100;
    std::uint64_t seed = 0;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Weights ~ Gaussian(0, sigma^2), biases zero.
inline Rbm init_rbm(int n_visible, int n_hidden, VisibleKind kind, std::uint64_t seed,
                    double weight_sigma = 0.01) {
    if (n_visible <= 0 || n_hidden <= 0)
        throw std::invalid_argument("init_rbm: unit counts must be positive");
    Rbm m;
    m.n_visible = n_visible;
    m.n_hidden = n_hidden;
    m.visible_kind = kind;
    m.weights.resize(n_visible, n_hidden);
    RngStream rng(seed);
    for (int i = 0; i < n_visible; ++i)
        for (int j = 0; j < n_hidden; ++j) m.weights(i, j) = weight_sigma * rng.gaussian();
    m.visible_bias = Eigen::VectorXd::Zero(n_visible);
    m.hidden_bias = Eigen::VectorXd::Zero(n_hidden);
    return m;
}

// E(v,h) = -a.v - b.h - v'Wh
inline double energy(const Rbm& m, const Eigen::VectorXd& v, const Eigen::VectorXd& h) {
    if (v.size() != m.n_visible || h.size() != m.n_hidden)
        throw std::invalid_argument("energy: dimension mismatch");
    return -m.visible_bias.dot(v) - m.hidden_bias.dot(h) - v.dot(m.weights * h);
}

// p(h_j = 1 | v) = sigmoid(b_j + sum_i v_i w_ij)
inline Eigen::VectorXd hidden_activation(const Rbm& m, const Eigen::VectorXd& v) {
    if (v.size() != m.n_visible)
        throw std::invalid_argument("hidden_activation: dimension mismatch");
    return (m.hidden_bias + m.weights.transpose() * v).unaryExpr([](double x) { return sigmoid(x); });
}

// p(v_i = 1 | h) = sigmoid(a_i + sum_j h_j w_ij); for RealUnit visibles the
// same value is emitted directly as the unit's activation.
inline Eigen::VectorXd visible_activation(const Rbm& m, const Eigen::VectorXd& h) {
    if (h.size() != m.n_hidden)
        throw std::invalid_argument("visible_activation: dimension mismatch");
    return (m.visible_bias + m.weights * h).unaryExpr([](double x) { return sigmoid(x); });
}

// Batch variants, one sample per row.
inline Eigen::MatrixXd hidden_activations(const Rbm& m, const Eigen::MatrixXd& V) {
    if (V.cols() != m.n_visible)
        throw std::invalid_argument("hidden_activations: dimension mismatch");
    return ((V * m.weights).rowwise() + m.hidden_bias.transpose())
        .unaryExpr([](double x) { return sigmoid(x); });
}

inline Eigen::MatrixXd visible_activations(const Rbm& m, const Eigen::MatrixXd& H) {
    if (H.cols() != m.n_hidden)
        throw std::invalid_argument("visible_activations: dimension mismatch");
    return ((H * m.weights.transpose()).rowwise() + m.visible_bias.transpose())
        .unaryExpr([](double x) { return sigmoid(x); });
}

// Entry (r, c) is 1 with probability p(r, c). Draw order is fixed (row by
// row, then column) so results are seed-deterministic.
template <typename Derived>
typename Derived::PlainObject sample_bernoulli(const Eigen::MatrixBase<Derived>& p,
                                               RngStream& rng) {
    typename Derived::PlainObject out(p.rows(), p.cols());
    for (Eigen::Index r = 0; r < p.rows(); ++r)
        for (Eigen::Index c = 0; c < p.cols(); ++c) out(r, c) = rng.bernoulli(p(r, c)) ? 1.0 : 0.0;
    return out;
}

// One contrastive-divergence step (CD-1) on a batch of visible rows:
//
//   dW = eps * (<v h>_data - <v h>_recon)        averaged over the batch
//   da = eps * (<v>_data - <v>_recon)
//   db = eps * (<h>_data - <h>_recon)
//
// The chain samples the data-side hidden state, reconstructs visibles as
// activation probabilities (both visible kinds), and closes with hidden
// probabilities; the data-side statistic also uses probabilities, which
// lowers the estimator variance without changing its fixed point.
inline void cd1_step(Rbm& m, const Eigen::MatrixXd& batch, double learning_rate,
                     RngStream& rng) {
    if (batch.rows() == 0) throw std::invalid_argument("cd1_step: empty batch");
    if (batch.cols() != m.n_visible) throw std::invalid_argument("cd1_step: dimension mismatch");

    const Eigen::MatrixXd hp0 = hidden_activations(m, batch);
    const Eigen::MatrixXd h0 = sample_bernoulli(hp0, rng);
    const Eigen::MatrixXd v1 = visible_activations(m, h0);
    const Eigen::MatrixXd hp1 = hidden_activations(m, v1);

    const double scale = learning_rate / static_cast<double>(batch.rows());
    m.weights += scale * (batch.transpose() * hp0 - v1.transpose() * hp1);
    m.visible_bias += scale * (batch.colwise().sum() - v1.colwise().sum()).transpose();
    m.hidden_bias += scale * (hp0.colwise().sum() - hp1.colwise().sum()).transpose();
}

// Runs CD-1 over consecutive batches for the configured number of epochs.
// Batch order is fixed, so a seed fully determines the trained parameters.
inline void train_rbm(Rbm& m, const Eigen::MatrixXd& data, const TrainConfig& cfg) {
    if (data.rows() == 0) throw std::invalid_argument("train_rbm: empty data");
    if (data.cols() != m.n_visible) throw std::invalid_argument("train_rbm: dimension mismatch");
    if (cfg.batch_size < 1) throw std::invalid_argument("train_rbm: batch_size must be >= 1");
    if (cfg.epochs < 0) throw std::invalid_argument("train_rbm: negative epochs");
    if (cfg.learning_rate < 0.0) throw std::invalid_argument("train_rbm: negative learning rate");

    RngStream rng(cfg.seed);
    const Eigen::Index n = data.rows();
    const Eigen::Index bs = cfg.batch_size;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
        for (Eigen::Index start = 0; start < n; start += bs) {
            const Eigen::MatrixXd batch = data.middleRows(start, std::min(bs, n - start));
            cd1_step(m, batch, cfg.learning_rate, rng);
        }
}

}  // namespace dbnd
