#ifndef FQM_TOOLS_CONFIG_HPP
#define FQM_TOOLS_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fqm/core.hpp"

namespace fqm::cli {

/// A configuration problem anchored to a line of the input file.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& file, int line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Maps JSON pointers to the line where the key (or array element) starts.
class LineIndex {
public:
    explicit LineIndex(const std::string& text);
    /// Line of the pointer, or of its closest ancestor that was seen.
    int line_of(const std::string& pointer) const;

private:
    std::map<std::string, int> lines_;
};

struct Units {
    std::string system;
    std::string length;
    std::string time;
    std::string energy;
};

struct GridConfig {
    int dim = 1;
    long points = 256;
    double extent = 40.0;
};

struct InitialStateConfig {
    std::string kind = "gaussian";  // gaussian | plane_wave | random
    std::vector<double> center;
    double width = 1.0;
    std::vector<double> momentum;
};

struct EvolveConfig {
    double dt = 0.0;
    long steps = 0;
    long snapshot_every = 0;
};

struct GroundStateConfig {
    double dt = 0.0;
    double tol = 1e-8;
    long max_iters = 100000;
};

struct SpectrumConfig {
    std::string model;  // bohr | oscillator
    double coupling = 1.0;
    double q2 = 1.0;
    double beta = 2.0;
    long n_min = 0;
    long n_max = 10;
    bool oracle = false;
    double oracle_tol = 1e-12;
};

struct KernelConfig {
    std::vector<double> separations;
    std::vector<double> durations;
    std::vector<long> slices;
    double residual_probe = 0.0;
};

struct VerifyConfig {
    long random_states = 100;
    long parity_steps = 1000;
    long unitarity_steps = 10000;
    double dt = 0.01;
};

struct RunConfig {
    std::string source;
    Units units;
    PhysicalParams params;
    GridConfig grid;
    PotentialSpec potential = PotentialSpec::free();
    std::optional<InitialStateConfig> initial_state;
    std::optional<EvolveConfig> evolve;
    std::optional<GroundStateConfig> groundstate;
    std::optional<SpectrumConfig> spectrum;
    std::optional<KernelConfig> kernel;
    std::optional<VerifyConfig> verify;
    std::string output_directory = "fqm_out";
    std::uint64_t seed = 0;
};

/// Parses and validates a configuration document. Unknown keys, wrong types
/// and out-of-range values throw ConfigError naming the offending line.
RunConfig parse_config(const std::string& text, const std::string& source);
RunConfig load_config(const std::string& path);

/// Throws ConfigError when the block a subcommand needs is missing.
void require_block(const RunConfig& config, const std::string& subcommand);

}  // namespace fqm::cli

#endif
