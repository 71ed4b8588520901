#include <CLI11.hpp>

#include <iostream>

#include "norbit/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nearby-orbit: semiclassical wavepacket propagation on configuration and phase space"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = "selftest_out";

    auto* run = app.add_subcommand("run", "execute a scenario config (JSON)");
    run->add_option("config", config, "scenario file")->required();

    auto* sweep = app.add_subcommand("sweep", "run an hbar-sweep scenario");
    sweep->add_option("config", config, "scenario file with mode hbar_sweep")->required();

    auto* selftest = app.add_subcommand("selftest", "convention audits and closed-form smoke checks");
    selftest->add_option("--out", out_dir, "report directory (default selftest_out)");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return norbit::run_scenario(config, std::cout);
    if (sweep->parsed()) return norbit::run_sweep(config, std::cout);
    return norbit::run_selftest(out_dir, std::cout);
}
