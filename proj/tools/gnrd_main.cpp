#include "cli_commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"gnrd: generative networks trained against random discriminators"};
    app.require_subcommand(1);

    std::string train_config;
    std::vector<std::string> overrides;
    auto* train = app.add_subcommand("train", "Train a generator from a JSON config");
    train->add_option("config", train_config, "Training config (JSON)")->required();
    train->add_option("--set", overrides, "Override a config field, e.g. --set train.max_iters=10");

    std::string cost_csv;
    std::string method = "hungarian";
    std::optional<double> epsilon;
    auto* assign = app.add_subcommand("assign", "Solve an assignment problem from a CSV cost matrix");
    assign->add_option("cost_csv", cost_csv, "Square cost matrix, one row per line")->required();
    assign->add_option("--method", method, "hungarian, auction, greedy or brute");
    assign->add_option("--epsilon", epsilon, "Final auction bid increment");

    std::string lemma_config;
    std::optional<std::string> lemma_out;
    auto* lemma1 = app.add_subcommand("lemma1", "Monte-Carlo study of the plug-in transport distance");
    lemma1->add_option("config", lemma_config, "Experiment config (JSON)")->required();
    lemma1->add_option("--out", lemma_out, "CSV output path (default stdout)");

    std::string checkpoint;
    gnrd::Index count = 64;
    std::string gen_out;
    std::uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("gen", "Sample from a trained generator checkpoint");
    gen->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
    gen->add_option("--count", count, "Number of samples");
    gen->add_option("--out", gen_out, "Output path (.pgm grid for images, CSV otherwise)")->required();
    gen->add_option("--seed", gen_seed, "Noise seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : gnrd::cli::kExitConfig;
    }

    using namespace gnrd::cli;
    if (*train) return cmd_train(train_config, overrides, std::cout, std::cerr);
    if (*assign) return cmd_assign(cost_csv, method, epsilon, std::cout, std::cerr);
    if (*lemma1) {
        std::optional<std::filesystem::path> out;
        if (lemma_out) out = *lemma_out;
        return cmd_lemma1(lemma_config, out, std::cout, std::cerr);
    }
    return cmd_gen(checkpoint, count, gen_out, gen_seed, std::cout, std::cerr);
}
