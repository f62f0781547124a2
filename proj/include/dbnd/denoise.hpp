#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbnd/data.hpp"
#include "dbnd/dbn.hpp"

// Noise-node detection and suppression. A trained stack maps a clean image
// and its noisy counterpart to nearly identical top-layer activations on
// nodes that encode image content; nodes that mostly track the noise swing
// between the two. Averaging that swing over many pairs separates the two
// groups, and replacing each noise node's activation with its mean value
// over clean images ("neutral value") before the downward pass suppresses
// the noise in the reconstruction.

namespace dbnd {

struct NoiseProfile {
    double threshold = 0.0;
    std::vector<int> noise_nodes;            // ascending top-layer indices
    Eigen::VectorXd neutral_values;          // aligned with noise_nodes
    Eigen::VectorXd average_relative_activity;  // one entry per top node
};

// Per-node |top(clean) - top(noisy)|. Symmetric in its arguments and zero
// exactly when the two encodings agree.
inline Eigen::VectorXd relative_activity(const Dbn& d, const Image& clean, const Image& noisy) {
    const Eigen::VectorXd tc = encode(d, clean).top();
    const Eigen::VectorXd tn = encode(d, noisy).top();
    return (tc - tn).cwiseAbs();
}

inline Eigen::VectorXd average_relative_activity(const Dbn& d, const PairedDataset& ds) {
    if (ds.pairs.empty()) throw std::invalid_argument("average_relative_activity: empty dataset");
    validate_dbn(d);

    std::vector<Image> clean, noisy;
    clean.reserve(ds.pairs.size());
    noisy.reserve(ds.pairs.size());
    for (const ImagePair& p : ds.pairs) {
        clean.push_back(p.clean);
        noisy.push_back(p.noisy);
    }
    const Eigen::MatrixXd tc = encode_top(d, images_matrix(clean));
    const Eigen::MatrixXd tn = encode_top(d, images_matrix(noisy));
    return (tc - tn).cwiseAbs().colwise().mean().transpose();
}

// Indices with activity strictly above the threshold.
inline std::vector<int> detect_noise_nodes(const Eigen::VectorXd& ara, double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw std::invalid_argument("detect_noise_nodes: threshold outside [0,1]");
    std::vector<int> nodes;
    for (Eigen::Index i = 0; i < ara.size(); ++i)
        if (ara[i] > threshold) nodes.push_back(static_cast<int>(i));
    return nodes;
}

// Mean top activation over clean images, for each flagged node.
inline Eigen::VectorXd neutral_values(const Dbn& d, const std::vector<Image>& clean_images,
                                      const std::vector<int>& nodes) {
    if (clean_images.empty()) throw std::invalid_argument("neutral_values: empty clean set");
    for (int idx : nodes)
        if (idx < 0 || idx >= d.top_width())
            throw std::invalid_argument("neutral_values: node index out of range");

    const Eigen::VectorXd mean_top =
        encode_top(d, images_matrix(clean_images)).colwise().mean().transpose();
    Eigen::VectorXd out(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t k = 0; k < nodes.size(); ++k) out[static_cast<Eigen::Index>(k)] = mean_top[nodes[k]];
    return out;
}

inline NoiseProfile build_profile(const Dbn& d, const PairedDataset& ds, double threshold) {
    NoiseProfile p;
    p.threshold = threshold;
    p.average_relative_activity = average_relative_activity(d, ds);
    p.noise_nodes = detect_noise_nodes(p.average_relative_activity, threshold);

    std::vector<Image> clean;
    clean.reserve(ds.pairs.size());
    for (const ImagePair& pr : ds.pairs) clean.push_back(pr.clean);
    p.neutral_values = neutral_values(d, clean, p.noise_nodes);
    return p;
}

// Top-layer vector after substituting neutral values into the flagged nodes.
// Exposed so the substitution can be inspected before the downward pass.
inline Eigen::VectorXd denoised_top(const Dbn& d, const NoiseProfile& p, const Image& noisy) {
    Eigen::VectorXd top = encode(d, noisy).top();
    for (std::size_t k = 0; k < p.noise_nodes.size(); ++k)
        top[p.noise_nodes[k]] = p.neutral_values[static_cast<Eigen::Index>(k)];
    return top;
}

// Encode, neutralize the flagged nodes, reconstruct. With an empty profile
// this is exactly encode followed by reconstruct.
inline Image denoise(const Dbn& d, const NoiseProfile& p, const Image& noisy) {
    return reconstruct(d, denoised_top(d, p, noisy), noisy.width, noisy.height);
}

// ---------------------------------------------------------------------------
// Profile file: plain text, one row per top node with index, average
// relative activity, flagged bit and neutral value (0 for unflagged nodes),
// 10 significant digits, fixed columns so runs diff cleanly.
// ---------------------------------------------------------------------------

inline void save_profile(const NoiseProfile& p, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("profile: cannot open " + path + " for writing");

    char line[128];
    std::snprintf(line, sizeof(line), "# noise-node profile\n# threshold %.9e\n", p.threshold);
    out << line;
    out << "# index  avg_rel_activity  flagged  neutral_value\n";

    std::size_t k = 0;
    for (Eigen::Index i = 0; i < p.average_relative_activity.size(); ++i) {
        const bool flagged = k < p.noise_nodes.size() && p.noise_nodes[k] == static_cast<int>(i);
        const double neutral = flagged ? p.neutral_values[static_cast<Eigen::Index>(k)] : 0.0;
        std::snprintf(line, sizeof(line), "%7d  %.9e  %d  %.9e\n", static_cast<int>(i),
                      p.average_relative_activity[i], flagged ? 1 : 0, neutral);
        out << line;
        if (flagged) ++k;
    }
    if (!out) throw std::runtime_error("profile: write failed for " + path);
}

inline NoiseProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("profile: cannot open " + path);

    NoiseProfile p;
    bool have_threshold = false;
    std::vector<double> ara;
    std::vector<double> neutrals;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            double t;
            if (std::sscanf(line.c_str(), "# threshold %lf", &t) == 1) {
                p.threshold = t;
                have_threshold = true;
            }
            continue;
        }
        int idx = 0, flagged = 0;
        double a = 0.0, neutral = 0.0;
        if (std::sscanf(line.c_str(), "%d %lf %d %lf", &idx, &a, &flagged, &neutral) != 4)
            throw std::runtime_error("profile: malformed row in " + path + ": " + line);
        if (idx != static_cast<int>(ara.size()))
            throw std::runtime_error("profile: non-contiguous node index in " + path);
        ara.push_back(a);
        if (flagged) {
            p.noise_nodes.push_back(idx);
            neutrals.push_back(neutral);
        }
    }
    if (!have_threshold) throw std::runtime_error("profile: missing threshold header in " + path);
    if (ara.empty()) throw std::runtime_error("profile: no node rows in " + path);

    p.average_relative_activity =
        Eigen::Map<const Eigen::VectorXd>(ara.data(), static_cast<Eigen::Index>(ara.size()));
    p.neutral_values =
        Eigen::Map<const Eigen::VectorXd>(neutrals.data(), static_cast<Eigen::Index>(neutrals.size()));
    return p;
}

}  // namespace dbnd
