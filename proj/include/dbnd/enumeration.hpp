#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dbnd/rbm.hpp"

// Exhaustive-enumeration oracles for small binary machines. These walk all
// 2^(n_visible+n_hidden) joint configurations (or one side of them), so they
// are exact up to floating-point roundoff and entirely independent of the
// closed-form conditionals they are used to check.

namespace dbnd {

inline constexpr int kMaxEnumerationUnits = 20;

namespace detail {

inline void check_enumeration_capacity(const Rbm& m) {
    if (m.n_visible + m.n_hidden > kMaxEnumerationUnits)
        throw std::length_error("enumeration: machine exceeds " +
                                std::to_string(kMaxEnumerationUnits) + " total units");
}

inline Eigen::VectorXd vector_from_mask(std::uint32_t mask, int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = (mask >> i) & 1u ? 1.0 : 0.0;
    return v;
}

inline double softplus(double x) { return x > 35.0 ? x : std::log1p(std::exp(x)); }

}  // namespace detail

// Z = sum over all (v,h) of e^{-E(v,h)}, by joint enumeration. Long-double
// accumulation keeps the summation error well under the 1e-10 tolerances
// the oracle is held to.
inline double partition_function(const Rbm& m) {
    if (m.visible_kind != VisibleKind::Binary)
        throw std::invalid_argument("partition_function: binary visible units required");
    detail::check_enumeration_capacity(m);

    const std::uint32_t nv_states = 1u << m.n_visible;
    const std::uint32_t nh_states = 1u << m.n_hidden;
    long double z = 0.0l;
    for (std::uint32_t vm = 0; vm < nv_states; ++vm) {
        const Eigen::VectorXd v = detail::vector_from_mask(vm, m.n_visible);
        const double av = m.visible_bias.dot(v);
        const Eigen::VectorXd s = m.weights.transpose() * v;
        for (std::uint32_t hm = 0; hm < nh_states; ++hm) {
            double e = av;
            for (int j = 0; j < m.n_hidden; ++j)
                if ((hm >> j) & 1u) e += m.hidden_bias[j] + s[j];
            z += std::exp(e);
        }
    }
    return static_cast<double>(z);
}

// log sum_h e^{-E(v,h)} with the hidden sum taken analytically:
//   a.v + sum_j softplus(b_j + (W'v)_j)
// This is the second, algebraically independent route to the marginal.
inline double log_unnormalized_marginal(const Rbm& m, const Eigen::VectorXd& v) {
    if (v.size() != m.n_visible)
        throw std::invalid_argument("log_unnormalized_marginal: dimension mismatch");
    const Eigen::VectorXd s = m.hidden_bias + m.weights.transpose() * v;
    double acc = m.visible_bias.dot(v);
    for (Eigen::Index j = 0; j < s.size(); ++j) acc += detail::softplus(s[j]);
    return acc;
}

// log Z via log-sum-exp over visible states of the analytic hidden marginal.
inline double log_partition_function(const Rbm& m) {
    if (m.visible_kind != VisibleKind::Binary)
        throw std::invalid_argument("log_partition_function: binary visible units required");
    detail::check_enumeration_capacity(m);

    const std::uint32_t nv_states = 1u << m.n_visible;
    std::vector<double> logs(nv_states);
    double top = -std::numeric_limits<double>::infinity();
    for (std::uint32_t vm = 0; vm < nv_states; ++vm) {
        logs[vm] = log_unnormalized_marginal(m, detail::vector_from_mask(vm, m.n_visible));
        top = std::max(top, logs[vm]);
    }
    long double acc = 0.0l;
    for (double l : logs) acc += std::exp(l - top);
    return top + static_cast<double>(std::log(acc));
}

// p(v) = e^{log_unnormalized_marginal(v)} / Z
inline double visible_probability(const Rbm& m, const Eigen::VectorXd& v) {
    return std::exp(log_unnormalized_marginal(m, v) - log_partition_function(m));
}

// p(h_j = 1 | v) by enumerating every hidden state; never touches the
// logistic closed form.
inline Eigen::VectorXd enum_hidden_conditional(const Rbm& m, const Eigen::VectorXd& v) {
    if (v.size() != m.n_visible)
        throw std::invalid_argument("enum_hidden_conditional: dimension mismatch");
    if (m.n_hidden > kMaxEnumerationUnits)
        throw std::length_error("enum_hidden_conditional: too many hidden units");

    const Eigen::VectorXd s = m.weights.transpose() * v;
    const std::uint32_t nh_states = 1u << m.n_hidden;
    std::vector<long double> num(m.n_hidden, 0.0l);
    long double denom = 0.0l;
    for (std::uint32_t hm = 0; hm < nh_states; ++hm) {
        double e = 0.0;
        for (int j = 0; j < m.n_hidden; ++j)
            if ((hm >> j) & 1u) e += m.hidden_bias[j] + s[j];
        const long double w = std::exp(e);
        denom += w;
        for (int j = 0; j < m.n_hidden; ++j)
            if ((hm >> j) & 1u) num[j] += w;
    }
    Eigen::VectorXd p(m.n_hidden);
    for (int j = 0; j < m.n_hidden; ++j) p[j] = static_cast<double>(num[j] / denom);
    return p;
}

// p(v_i = 1 | h) by enumerating every visible state (binary machines).
inline Eigen::VectorXd enum_visible_conditional(const Rbm& m, const Eigen::VectorXd& h) {
    if (h.size() != m.n_hidden)
        throw std::invalid_argument("enum_visible_conditional: dimension mismatch");
    if (m.visible_kind != VisibleKind::Binary)
        throw std::invalid_argument("enum_visible_conditional: binary visible units required");
    if (m.n_visible > kMaxEnumerationUnits)
        throw std::length_error("enum_visible_conditional: too many visible units");

    const Eigen::VectorXd t = m.weights * h;
    const std::uint32_t nv_states = 1u << m.n_visible;
    std::vector<long double> num(m.n_visible, 0.0l);
    long double denom = 0.0l;
    for (std::uint32_t vm = 0; vm < nv_states; ++vm) {
        double e = 0.0;
        for (int i = 0; i < m.n_visible; ++i)
            if ((vm >> i) & 1u) e += m.visible_bias[i] + t[i];
        const long double w = std::exp(e);
        denom += w;
        for (int i = 0; i < m.n_visible; ++i)
            if ((vm >> i) & 1u) num[i] += w;
    }
    Eigen::VectorXd p(m.n_visible);
    for (int i = 0; i < m.n_visible; ++i) p[i] = static_cast<double>(num[i] / denom);
    return p;
}

struct RbmGradient {
    Eigen::MatrixXd weights;
    Eigen::VectorXd visible_bias;
    Eigen::VectorXd hidden_bias;
};

// Exact gradient of the average log-likelihood of `data`:
//   d log p / d w_ij = <v_i h_j>_data - <v_i h_j>_model
// and the analogous bias terms. The data expectation marginalizes hidden
// units analytically; the model expectation enumerates the full joint.
inline RbmGradient exact_loglik_grad(const Rbm& m, const std::vector<Eigen::VectorXd>& data) {
    if (m.visible_kind != VisibleKind::Binary)
        throw std::invalid_argument("exact_loglik_grad: binary visible units required");
    detail::check_enumeration_capacity(m);
    if (data.empty()) throw std::invalid_argument("exact_loglik_grad: empty data");

    RbmGradient g;
    g.weights = Eigen::MatrixXd::Zero(m.n_visible, m.n_hidden);
    g.visible_bias = Eigen::VectorXd::Zero(m.n_visible);
    g.hidden_bias = Eigen::VectorXd::Zero(m.n_hidden);

    for (const Eigen::VectorXd& v : data) {
        if (v.size() != m.n_visible)
            throw std::invalid_argument("exact_loglik_grad: dimension mismatch");
        const Eigen::VectorXd hp = hidden_activation(m, v);
        g.weights += v * hp.transpose();
        g.visible_bias += v;
        g.hidden_bias += hp;
    }
    const double n = static_cast<double>(data.size());
    g.weights /= n;
    g.visible_bias /= n;
    g.hidden_bias /= n;

    Eigen::MatrixXd evh = Eigen::MatrixXd::Zero(m.n_visible, m.n_hidden);
    Eigen::VectorXd ev = Eigen::VectorXd::Zero(m.n_visible);
    Eigen::VectorXd eh = Eigen::VectorXd::Zero(m.n_hidden);
    long double z = 0.0l;
    const std::uint32_t nv_states = 1u << m.n_visible;
    const std::uint32_t nh_states = 1u << m.n_hidden;
    for (std::uint32_t vm = 0; vm < nv_states; ++vm) {
        const Eigen::VectorXd v = detail::vector_from_mask(vm, m.n_visible);
        const double av = m.visible_bias.dot(v);
        const Eigen::VectorXd s = m.weights.transpose() * v;
        for (std::uint32_t hm = 0; hm < nh_states; ++hm) {
            double e = av;
            for (int j = 0; j < m.n_hidden; ++j)
                if ((hm >> j) & 1u) e += m.hidden_bias[j] + s[j];
            const double w = std::exp(e);
            z += w;
            const Eigen::VectorXd h = detail::vector_from_mask(hm, m.n_hidden);
            evh += w * (v * h.transpose());
            ev += w * v;
            eh += w * h;
        }
    }
    const double zd = static_cast<double>(z);
    g.weights -= evh / zd;
    g.visible_bias -= ev / zd;
    g.hidden_bias -= eh / zd;
    return g;
}

// Exact average log-likelihood of `data` under the machine.
inline double average_loglik(const Rbm& m, const std::vector<Eigen::VectorXd>& data) {
    if (data.empty()) throw std::invalid_argument("average_loglik: empty data");
    const double log_z = log_partition_function(m);
    long double acc = 0.0l;
    for (const Eigen::VectorXd& v : data) acc += log_unnormalized_marginal(m, v) - log_z;
    return static_cast<double>(acc / data.size());
}

}  // namespace dbnd
