// Writes a synthetic digit dataset in IDX format, for running the pipeline
// when the real files are not available.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dbnd/eval.hpp"
#include "dbnd/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Synthetic digit dataset generator (IDX format)"};

    std::string out_dir = "synth-mnist";
    std::string sample_pgm;
    int train_count = 4000;
    int test_count = 1000;
    std::uint64_t seed = 7;
    app.add_option("--out-dir", out_dir, "Output directory");
    app.add_option("--train-count", train_count, "Training images to generate");
    app.add_option("--test-count", test_count, "Test images to generate");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--sample-pgm", sample_pgm,
                   "Also write the first test image (with noise variance 0.2) as a PGM");

    CLI11_PARSE(app, argc, argv);

    try {
        dbnd::synth::write_dataset_dir(out_dir, train_count, test_count, seed);
        if (!sample_pgm.empty()) {
            const auto test = dbnd::load_idx(out_dir + "/t10k-images-idx3-ubyte");
            dbnd::save_pgm(dbnd::add_awgn(test.front(), 0.2, dbnd::derive_seed(seed, 99)),
                           sample_pgm);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "wrote " << train_count << " train / " << test_count << " test images to "
              << out_dir << "\n";
    return 0;
}
