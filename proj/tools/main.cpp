#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
    using namespace fqm::cli;
    CLI::App app{"Fractional quantum mechanics batch runner"};
    std::string subcommand;
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    app.add_option("subcommand", subcommand, "evolve, groundstate, spectrum, kernel or verify")
        ->required()
        ->check(CLI::IsMember({"evolve", "groundstate", "spectrum", "kernel", "verify"}));
    app.add_option("--config", config_path, "JSON configuration file")->required();
    auto* out_option = app.add_option("--out", out, "output directory (overrides output.directory)");
    auto* seed_option = app.add_option("--seed", seed, "random seed (overrides seed)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Success : ConfigFailure;
    }

    try {
        RunConfig config = load_config(config_path);
        if (*out_option) config.output_directory = out;
        if (*seed_option) config.seed = seed;
        return run_command(subcommand, config, config.output_directory, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return ConfigFailure;
    } catch (const fqm::ConvergenceError& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return NonConvergence;
    } catch (const fqm::NumericalError& e) {
        std::cerr << "invariant failure: " << e.what() << '\n';
        return InvariantFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return InvariantFailure;
    }
}
