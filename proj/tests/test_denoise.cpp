#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <regex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbnd/data.hpp"
#include "dbnd/dbn.hpp"
#include "dbnd/denoise.hpp"

using dbnd::Dbn;
using dbnd::Image;
using dbnd::NoiseProfile;
using dbnd::PairedDataset;
using dbnd::Rbm;
using dbnd::RngStream;
using dbnd::VisibleKind;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::string tmp_path(const std::string& name) {
    std::filesystem::create_directories("test_tmp");
    return "test_tmp/" + name;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

// Single-pixel, single-node stack with top = sigmoid(10 x - 5): pixel values
// in [0,1] can place the top activation anywhere in (0.0067, 0.9933).
Dbn gauge_dbn() {
    Rbm m;
    m.n_visible = 1;
    m.n_hidden = 1;
    m.visible_kind = VisibleKind::RealUnit;
    m.weights = MatrixXd::Constant(1, 1, 10.0);
    m.visible_bias = VectorXd::Zero(1);
    m.hidden_bias = VectorXd::Constant(1, -5.0);
    Dbn d;
    d.layers.push_back(m);
    return d;
}

Image pixel_for_top(double target) {
    return Image{1, 1, VectorXd::Constant(1, (logit(target) + 5.0) / 10.0)};
}

Dbn random_dbn(const std::vector<int>& widths, std::uint64_t seed) {
    Dbn d;
    RngStream rng(seed);
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        Rbm m;
        m.n_visible = widths[k];
        m.n_hidden = widths[k + 1];
        m.visible_kind = k == 0 ? VisibleKind::RealUnit : VisibleKind::Binary;
        m.weights = MatrixXd::Zero(m.n_visible, m.n_hidden);
        for (int i = 0; i < m.n_visible; ++i)
            for (int j = 0; j < m.n_hidden; ++j) m.weights(i, j) = rng.gaussian();
        m.visible_bias = VectorXd::Zero(m.n_visible);
        m.hidden_bias = VectorXd::Zero(m.n_hidden);
        d.layers.push_back(std::move(m));
    }
    return d;
}

Image random_image(int side, RngStream& rng) {
    Image img{side, side, VectorXd(side * side)};
    for (int i = 0; i < side * side; ++i) img.pixels[i] = rng.uniform();
    return img;
}

}  // namespace

TEST_CASE("relative activity is the absolute top-layer difference", "[denoise]") {
    const Dbn d = gauge_dbn();

    SECTION("identical inputs give zero") {
        const Image img = pixel_for_top(0.6);
        CHECK(dbnd::relative_activity(d, img, img).isZero(0.0));
    }

    SECTION("0.9 vs 0.1 gives 0.8") {
        const VectorXd ra = dbnd::relative_activity(d, pixel_for_top(0.9), pixel_for_top(0.1));
        REQUIRE(ra.size() == 1);
        CHECK_THAT(ra[0], Catch::Matchers::WithinAbs(0.8, 1e-12));
    }

    SECTION("symmetric in its arguments") {
        const Image a = pixel_for_top(0.3), b = pixel_for_top(0.85);
        CHECK(dbnd::relative_activity(d, a, b) == dbnd::relative_activity(d, b, a));
        CHECK(dbnd::relative_activity(d, a, b).maxCoeff() <= 1.0);
    }
}

TEST_CASE("average relative activity is the per-node mean", "[denoise]") {
    const Dbn d = gauge_dbn();

    SECTION("activities 0.4 and 0.6 average to 0.5") {
        PairedDataset ds;
        ds.pairs.push_back({pixel_for_top(0.9), pixel_for_top(0.5)});  // |0.9-0.5| = 0.4
        ds.pairs.push_back({pixel_for_top(0.8), pixel_for_top(0.2)});  // |0.8-0.2| = 0.6
        const VectorXd ara = dbnd::average_relative_activity(d, ds);
        REQUIRE(ara.size() == 1);
        CHECK_THAT(ara[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
    }

    SECTION("noisy == clean gives the zero vector") {
        PairedDataset ds;
        ds.pairs.push_back({pixel_for_top(0.7), pixel_for_top(0.7)});
        ds.pairs.push_back({pixel_for_top(0.2), pixel_for_top(0.2)});
        CHECK(dbnd::average_relative_activity(d, ds).isZero(0.0));
    }

    SECTION("empty dataset rejected") {
        CHECK_THROWS_AS(dbnd::average_relative_activity(d, PairedDataset{}),
                        std::invalid_argument);
    }
}

TEST_CASE("noise-node detection uses a strict threshold", "[denoise]") {
    VectorXd ara(3);
    ara << 0.95, 0.20, 0.91;
    CHECK(dbnd::detect_noise_nodes(ara, 0.9) == std::vector<int>{0, 2});
    CHECK(dbnd::detect_noise_nodes(ara, 1.0).empty());

    VectorXd edge(2);
    edge << 0.9, 0.9000000001;
    CHECK(dbnd::detect_noise_nodes(edge, 0.9) == std::vector<int>{1});

    CHECK_THROWS_AS(dbnd::detect_noise_nodes(ara, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(dbnd::detect_noise_nodes(ara, 1.1), std::invalid_argument);
}

TEST_CASE("detection is monotone in the threshold", "[denoise]") {
    RngStream rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        VectorXd ara(32);
        for (int i = 0; i < 32; ++i) ara[i] = rng.uniform();
        double t1 = rng.uniform(), t2 = rng.uniform();
        if (t1 > t2) std::swap(t1, t2);
        const auto low = dbnd::detect_noise_nodes(ara, t1);
        const auto high = dbnd::detect_noise_nodes(ara, t2);
        CHECK(std::includes(low.begin(), low.end(), high.begin(), high.end()));
    }
}

TEST_CASE("neutral values average top activations over clean images", "[denoise]") {
    SECTION("constant-activation node reports that constant") {
        Rbm m;
        m.n_visible = 1;
        m.n_hidden = 1;
        m.visible_kind = VisibleKind::RealUnit;
        m.weights = MatrixXd::Zero(1, 1);
        m.visible_bias = VectorXd::Zero(1);
        m.hidden_bias = VectorXd::Constant(1, logit(0.73));
        Dbn d;
        d.layers.push_back(m);

        std::vector<Image> clean{Image{1, 1, VectorXd::Constant(1, 0.2)},
                                 Image{1, 1, VectorXd::Constant(1, 0.9)}};
        const VectorXd nv = dbnd::neutral_values(d, clean, {0});
        REQUIRE(nv.size() == 1);
        CHECK_THAT(nv[0], Catch::Matchers::WithinAbs(0.73, 1e-12));
    }

    SECTION("empty node set gives an empty vector") {
        const Dbn d = gauge_dbn();
        CHECK(dbnd::neutral_values(d, {pixel_for_top(0.5)}, {}).size() == 0);
    }

    SECTION("empty clean set rejected") {
        const Dbn d = gauge_dbn();
        CHECK_THROWS_AS(dbnd::neutral_values(d, {}, {0}), std::invalid_argument);
    }
}

TEST_CASE("build_profile composes detection and neutral values", "[denoise]") {
    const Dbn d = gauge_dbn();
    PairedDataset ds;
    ds.pairs.push_back({pixel_for_top(0.9), pixel_for_top(0.1)});

    SECTION("threshold 1.0 flags nothing") {
        const NoiseProfile p = dbnd::build_profile(d, ds, 1.0);
        CHECK(p.noise_nodes.empty());
        CHECK(p.neutral_values.size() == 0);
        CHECK(p.average_relative_activity.size() == 1);
    }

    SECTION("identical pairs flag nothing at any positive threshold") {
        PairedDataset same;
        same.pairs.push_back({pixel_for_top(0.4), pixel_for_top(0.4)});
        CHECK(dbnd::build_profile(d, same, 0.5).noise_nodes.empty());
        CHECK(dbnd::build_profile(d, same, 0.01).noise_nodes.empty());
    }

    SECTION("a swinging node is flagged and gets the clean mean") {
        const NoiseProfile p = dbnd::build_profile(d, ds, 0.5);
        CHECK(p.noise_nodes == std::vector<int>{0});
        REQUIRE(p.neutral_values.size() == 1);
        CHECK_THAT(p.neutral_values[0], Catch::Matchers::WithinAbs(0.9, 1e-12));
    }
}

TEST_CASE("denoise with an empty profile is encode-reconstruct", "[denoise]") {
    const Dbn d = random_dbn({16, 8, 4}, 2024);
    RngStream rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Image img = random_image(4, rng);
        const Image via_profile = dbnd::denoise(d, NoiseProfile{}, img);
        const Image direct = dbnd::reconstruct(d, dbnd::encode(d, img).top(), 4, 4);
        CHECK(via_profile.pixels == direct.pixels);
    }
}

TEST_CASE("denoise with a full profile ignores the input image", "[denoise]") {
    const Dbn d = random_dbn({16, 8, 4}, 99);
    NoiseProfile p;
    p.threshold = 0.0;
    p.noise_nodes = {0, 1, 2, 3};
    p.neutral_values = VectorXd(4);
    p.neutral_values << 0.3, 0.6, 0.9, 0.1;

    RngStream rng(6);
    const Image a = random_image(4, rng);
    const Image b = random_image(4, rng);
    REQUIRE(a.pixels != b.pixels);
    CHECK(dbnd::denoise(d, p, a).pixels == dbnd::denoise(d, p, b).pixels);
}

TEST_CASE("substitution touches only the flagged coordinate", "[denoise]") {
    const Dbn d = random_dbn({16, 8, 4}, 7);
    RngStream rng(8);
    const Image img = random_image(4, rng);
    const VectorXd plain = dbnd::encode(d, img).top();

    NoiseProfile p;
    p.noise_nodes = {1};
    p.neutral_values = VectorXd::Constant(1, 0.4);
    const VectorXd t1 = dbnd::denoised_top(d, p, img);
    p.neutral_values[0] = 0.8;
    const VectorXd t2 = dbnd::denoised_top(d, p, img);

    for (int i = 0; i < 4; ++i) {
        if (i == 1) continue;
        CHECK(t1[i] == plain[i]);
        CHECK(t2[i] == plain[i]);
    }
    CHECK(t1[1] == 0.4);
    CHECK(t2[1] == 0.8);
}

TEST_CASE("profile files round-trip and stay diffable", "[denoise]") {
    NoiseProfile p;
    p.threshold = 0.9;
    p.noise_nodes = {1, 3};
    p.neutral_values = VectorXd(2);
    p.neutral_values << 0.123456789012345, 0.987654321098765;
    p.average_relative_activity = VectorXd(4);
    p.average_relative_activity << 0.05, 0.95, 0.5, 0.91;

    const auto path = tmp_path("profile.txt");
    dbnd::save_profile(p, path);
    const NoiseProfile q = dbnd::load_profile(path);

    CHECK(q.threshold == 0.9);
    CHECK(q.noise_nodes == p.noise_nodes);
    REQUIRE(q.neutral_values.size() == 2);
    REQUIRE(q.average_relative_activity.size() == 4);
    CHECK((q.neutral_values - p.neutral_values).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((q.average_relative_activity - p.average_relative_activity).cwiseAbs().maxCoeff() <
          1e-9);

    // node rows carry 10 significant digits in fixed columns
    std::ifstream in(path);
    std::string line;
    const std::regex row(R"(^\s*\d+  \d\.\d{9}e[-+]\d{2,3}  [01]  \d\.\d{9}e[-+]\d{2,3}$)");
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        CHECK(std::regex_match(line, row));
        ++rows;
    }
    CHECK(rows == 4);
}
