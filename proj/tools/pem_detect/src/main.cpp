#include <iostream>
#include <utility>

#include <CLI11.hpp>

#include "pemcli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Damage identification on a piezoelectro-mechanical beam"};
    app.require_subcommand(1);

    pem::cli::Invocation inv;
    std::string out, config;
    std::uint64_t seed = 0;
    const std::pair<const char*, const char*> commands[] = {
        {"synthesize", "write synthetic boundary measurements for the configured damage"},
        {"identify", "multi-start Nelder-Mead over (d, x) at fixed beta"},
        {"scan", "log10 functional over the (d, x, beta) grid and sublevel areas"},
        {"tune", "min-max alternation over beta and (d, x) from the configured start"},
        {"verify", "cross-check the spectral solver against finite elements"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "RNG seed (overrides the config seed)");
        if (std::string(name) == "identify") sub->add_flag("--tune", inv.tune, "alternate beta maximization and damage minimization");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : pem::cli::kInvalidInput;
    }
    auto* sub = app.get_subcommands().front();
    inv.command = sub->get_name();
    inv.config = config;
    if (!out.empty()) inv.out = out;
    if (sub->count("--seed") > 0) inv.seed = seed;
    return pem::cli::run(inv, std::cout, std::cerr);
}
