#ifndef FQM_TOOLS_COMMANDS_HPP
#define FQM_TOOLS_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "config.hpp"

namespace fqm::cli {

enum ExitCode : int { Success = 0, InvariantFailure = 1, ConfigFailure = 2, NonConvergence = 3 };

/// Runs one subcommand, writing its tables into out. Every run also writes
/// units.csv echoing the configuration's units block. Diagnostics go to log.
int run_command(const std::string& subcommand, const RunConfig& config, const std::filesystem::path& out,
                std::ostream& log);

}  // namespace fqm::cli

#endif
