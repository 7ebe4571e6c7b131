#pragma once

#include "demandcast/error.hpp"
#include "demandcast/run_config.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace demandcast {

enum ExitCode : int {
    kExitSuccess = 0,
    kExitFailure = 1,
    kExitConfigError = 2,
    kExitInputError = 3,
    kExitAllModelsFailed = 4,
};

/// Machine-readable tag written to error.json, e.g. E_INPUT.
std::string_view error_tag(ErrorCode code) noexcept;
int exit_code_for(ErrorCode code) noexcept;

/// Each command writes its outputs under cfg.output_dir and returns an exit
/// code. Errors propagate as demandcast::Error; run_command converts them.
int cmd_ingest(const RunConfig& cfg, std::ostream& log);
int cmd_evaluate(const RunConfig& cfg, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_report(const RunConfig& cfg, std::ostream& log);
/// Writes the synthetic table described by cfg.synthetic to cfg.data_path.
int cmd_generate(const RunConfig& cfg, std::ostream& log);

/// Dispatches by name; failures print a JSON error document to `err`, write
/// error.json into the output directory when possible, and map to an exit code.
int run_command(std::string_view name, const RunConfig& cfg, std::ostream& log, std::ostream& err);

/// Markdown report assembled from the artifacts in `dir`.
std::string render_report(const std::filesystem::path& dir);

} // namespace demandcast
