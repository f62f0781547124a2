#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "dbnd/data.hpp"

using dbnd::Image;

namespace {

std::string tmp_path(const std::string& name) {
    std::filesystem::create_directories("test_tmp");
    return "test_tmp/" + name;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

void push_u32_be(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back((x >> 24) & 0xff);
    v.push_back((x >> 16) & 0xff);
    v.push_back((x >> 8) & 0xff);
    v.push_back(x & 0xff);
}

std::vector<std::uint8_t> idx_image_file(std::uint32_t count, std::uint32_t rows,
                                         std::uint32_t cols,
                                         const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> bytes;
    push_u32_be(bytes, 0x00000803);
    push_u32_be(bytes, count);
    push_u32_be(bytes, rows);
    push_u32_be(bytes, cols);
    bytes.insert(bytes.end(), payload.begin(), payload.end());
    return bytes;
}

Image constant_image(int w, int h, double value) {
    return Image{w, h, Eigen::VectorXd::Constant(w * h, value)};
}

}  // namespace

TEST_CASE("idx loader normalizes bytes by 255", "[data]") {
    const auto path = tmp_path("images.idx");

    SECTION("all-zero payload gives an all-zero image") {
        write_bytes(path, idx_image_file(1, 28, 28, std::vector<std::uint8_t>(28 * 28, 0x00)));
        const auto images = dbnd::load_idx(path);
        REQUIRE(images.size() == 1);
        CHECK(images[0].width == 28);
        CHECK(images[0].height == 28);
        CHECK(images[0].pixels.isZero(0.0));
    }

    SECTION("byte extremes and midpoint") {
        write_bytes(path, idx_image_file(1, 1, 3, {0xFF, 0x80, 0x00}));
        const auto images = dbnd::load_idx(path);
        REQUIRE(images.size() == 1);
        CHECK(images[0].pixels[0] == 1.0);
        CHECK(images[0].pixels[1] == 128.0 / 255.0);
        CHECK(images[0].pixels[2] == 0.0);
    }
}

TEST_CASE("idx loader rejects malformed files", "[data]") {
    const auto path = tmp_path("bad.idx");

    SECTION("wrong magic") {
        std::vector<std::uint8_t> bytes;
        push_u32_be(bytes, 0x00000801);  // label magic in an image slot
        push_u32_be(bytes, 1);
        push_u32_be(bytes, 1);
        push_u32_be(bytes, 1);
        bytes.push_back(0);
        write_bytes(path, bytes);
        CHECK_THROWS_WITH(dbnd::load_idx(path), Catch::Matchers::ContainsSubstring("magic"));
    }

    SECTION("truncated payload") {
        write_bytes(path, idx_image_file(2, 2, 2, {1, 2, 3, 4, 5}));  // 3 bytes short
        CHECK_THROWS_WITH(dbnd::load_idx(path), Catch::Matchers::ContainsSubstring("truncated"));
    }

    SECTION("missing file") {
        CHECK_THROWS(dbnd::load_idx(tmp_path("nope.idx")));
    }
}

TEST_CASE("idx label files parse", "[data]") {
    const auto path = tmp_path("labels.idx");
    std::vector<std::uint8_t> bytes;
    push_u32_be(bytes, 0x00000801);
    push_u32_be(bytes, 3);
    bytes.insert(bytes.end(), {7, 0, 9});
    write_bytes(path, bytes);
    const auto labels = dbnd::load_idx_labels(path);
    CHECK(labels == std::vector<std::uint8_t>{7, 0, 9});

    write_bytes(path, idx_image_file(0, 1, 1, {}));
    CHECK_THROWS_WITH(dbnd::load_idx_labels(path), Catch::Matchers::ContainsSubstring("magic"));
}

TEST_CASE("byte normalization round trip is exact", "[data]") {
    for (int k = 0; k <= 255; ++k)
        CHECK(dbnd::denormalize(dbnd::normalize_byte(static_cast<std::uint8_t>(k))) == k);
}

TEST_CASE("add_awgn with zero variance is the identity", "[data]") {
    const Image img = constant_image(4, 3, 0.25);
    const Image out = dbnd::add_awgn(img, 0.0, 77);
    CHECK(out.pixels == img.pixels);
    CHECK_THROWS_AS(dbnd::add_awgn(img, -0.1, 0), std::invalid_argument);
}

TEST_CASE("add_awgn stays inside [0,1] even at high variance", "[data]") {
    const Image img = constant_image(50, 50, 0.5);
    const Image out = dbnd::add_awgn(img, 1.0, 3);
    CHECK(dbnd::image_is_valid(out));
}

TEST_CASE("add_awgn sample moments match the requested noise", "[data]") {
    // 10^6 midpoint pixels, variance 0.04: clamping at this variance trims
    // the second moment to ~0.0391, still inside the +/-0.005 window.
    const Image img = constant_image(1000, 1000, 0.5);
    const Image out = dbnd::add_awgn(img, 0.04, 20240811);
    const Eigen::VectorXd diff = out.pixels - img.pixels;
    const double mean = diff.mean();
    const double var = diff.squaredNorm() / diff.size() - mean * mean;
    CHECK(std::abs(mean) < 0.001);
    CHECK(std::abs(var - 0.04) < 0.005);
}

TEST_CASE("make_pairs keeps the clean side and repeats under a seed", "[data]") {
    std::vector<Image> clean{constant_image(2, 2, 0.1), constant_image(2, 2, 0.5),
                             constant_image(2, 2, 0.9)};
    const auto ds = dbnd::make_pairs(clean, 0.2, 11);
    REQUIRE(ds.pairs.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(ds.pairs[i].clean.pixels == clean[i].pixels);
        CHECK(dbnd::image_is_valid(ds.pairs[i].noisy));
    }

    const auto ds2 = dbnd::make_pairs(clean, 0.2, 11);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(ds.pairs[i].noisy.pixels == ds2.pairs[i].noisy.pixels);

    const auto quiet = dbnd::make_pairs(clean, 0.0, 11);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(quiet.pairs[i].noisy.pixels == clean[i].pixels);

    CHECK_THROWS_AS(dbnd::make_pairs({}, 0.2, 0), std::invalid_argument);
}

TEST_CASE("batches split without reordering", "[data]") {
    SECTION("even split") {
        std::vector<int> items(200);
        const auto b = dbnd::batches(items, 100);
        REQUIRE(b.size() == 2);
        CHECK(b[0].size() == 100);
        CHECK(b[1].size() == 100);
    }

    SECTION("short tail") {
        std::vector<int> items{1, 2, 3, 4, 5};
        const auto b = dbnd::batches(items, 2);
        REQUIRE(b.size() == 3);
        CHECK(b[0].size() == 2);
        CHECK(b[1].size() == 2);
        CHECK(b[2].size() == 1);
    }

    SECTION("paper-scale batch count") {
        std::vector<int> items(20000);
        CHECK(dbnd::batches(items, 100).size() == 200);
    }

    SECTION("concatenation identity") {
        std::vector<int> items(537);
        for (std::size_t i = 0; i < items.size(); ++i) items[i] = static_cast<int>(i);
        for (std::size_t bs : {1, 7, 100, 537, 1000}) {
            std::vector<int> cat;
            for (const auto span : dbnd::batches(items, bs))
                cat.insert(cat.end(), span.begin(), span.end());
            CHECK(cat == items);
        }
    }

    SECTION("zero batch size rejected") {
        std::vector<int> items(3);
        CHECK_THROWS_AS(dbnd::batches(items, 0), std::invalid_argument);
    }
}
