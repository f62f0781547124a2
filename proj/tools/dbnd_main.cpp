// Command-line front end: pretrain a stack, build a noise-node profile,
// denoise single images, or run the full evaluation pipeline.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbnd/dbnd.hpp"

namespace {

void add_common_options(CLI::App& cmd, dbnd::ExperimentConfig& cfg) {
    cmd.set_config("--config");
    cmd.add_option("--mnist-dir", cfg.mnist_dir, "Directory with the IDX image files");
    cmd.add_option("--out-dir", cfg.out_dir, "Run directory (model.dbnm, profile.txt, ...)");
    cmd.add_option("--widths", cfg.widths, "Layer widths, input first (e.g. 784,1000,500,250,100)")
        ->delimiter(',');
    cmd.add_option("--epochs", cfg.epochs, "Training epochs per layer");
    cmd.add_option("--lr", cfg.learning_rate, "CD-1 learning rate");
    cmd.add_option("--batch-size", cfg.batch_size, "Minibatch size");
    cmd.add_option("--noise-variance", cfg.noise_variance, "AWGN variance (sigma^2)");
    cmd.add_option("--threshold", cfg.threshold, "Noise-node detection threshold");
    cmd.add_option("--train-count", cfg.train_count,
                   "Clean training images to use (each becomes a clean/noisy pair; 0 = all)");
    cmd.add_option("--test-count", cfg.test_count, "Test images to evaluate (0 = all)");
    cmd.add_option("--seed", cfg.seed, "Master RNG seed");
}

int cmd_train(const dbnd::ExperimentConfig& cfg) {
    const dbnd::PairedDataset pairs = dbnd::experiment_train_pairs(cfg);
    const dbnd::Dbn dbn = dbnd::experiment_pretrain(cfg, pairs);
    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/model.dbnm";
    dbnd::save_model(dbn, path);
    std::cout << "trained " << dbn.layers.size() << " layers on " << 2 * pairs.pairs.size()
              << " images, wrote " << path << "\n";
    return 0;
}

int cmd_profile(const dbnd::ExperimentConfig& cfg) {
    const dbnd::Dbn dbn = dbnd::load_model(cfg.out_dir + "/model.dbnm");
    const dbnd::PairedDataset pairs = dbnd::experiment_train_pairs(cfg);
    const dbnd::NoiseProfile profile = dbnd::build_profile(dbn, pairs, cfg.threshold);
    const std::string path = cfg.out_dir + "/profile.txt";
    dbnd::save_profile(profile, path);
    std::cout << "flagged " << profile.noise_nodes.size() << " of " << dbn.top_width()
              << " top nodes at threshold " << cfg.threshold << ", wrote " << path << "\n";
    return 0;
}

int cmd_denoise(const dbnd::ExperimentConfig& cfg, const std::string& input,
                const std::string& output) {
    const dbnd::Dbn dbn = dbnd::load_model(cfg.out_dir + "/model.dbnm");
    const dbnd::NoiseProfile profile = dbnd::load_profile(cfg.out_dir + "/profile.txt");
    const dbnd::Image noisy = dbnd::load_pgm(input);
    dbnd::save_pgm(dbnd::denoise(dbn, profile, noisy), output);
    std::cout << "wrote " << output << "\n";
    return 0;
}

int cmd_eval(const dbnd::ExperimentConfig& cfg) {
    const dbnd::ExperimentReport report = dbnd::run_experiment(cfg);
    std::cout << "n_noise_nodes=" << report.n_noise_nodes << " of " << report.top_width << "\n"
              << "mse_noisy=" << report.mse_noisy << "\n"
              << "mse_plain_reconstruction=" << report.mse_plain_reconstruction << "\n"
              << "mse_denoised=" << report.mse_denoised << "\n"
              << "outputs in " << cfg.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep belief network image denoiser"};
    app.require_subcommand(1);

    dbnd::ExperimentConfig cfg;
    std::string input_pgm, output_pgm;

    CLI::App* train = app.add_subcommand("train", "Pretrain a stack and write model.dbnm");
    add_common_options(*train, cfg);

    CLI::App* profile =
        app.add_subcommand("profile", "Build the noise-node profile for a trained model");
    add_common_options(*profile, cfg);

    CLI::App* denoise = app.add_subcommand("denoise", "Denoise one PGM image");
    add_common_options(*denoise, cfg);
    denoise->add_option("input", input_pgm, "Noisy input PGM")->required();
    denoise->add_option("output", output_pgm, "Denoised output PGM")->required();

    CLI::App* eval =
        app.add_subcommand("eval", "Full run: train, profile, score the test set, write reports");
    add_common_options(*eval, cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(cfg);
        if (profile->parsed()) return cmd_profile(cfg);
        if (denoise->parsed()) return cmd_denoise(cfg, input_pgm, output_pgm);
        if (eval->parsed()) return cmd_eval(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
