#pragma once

#include <ostream>

#include "vstretch/config.hpp"

namespace vstretch {

/// Executes one configured command, writing artifacts under
/// config.output_dir. Returns the process exit status: 0 on success, 1 when a
/// module error occurred (an `error.json` record is written instead of the
/// command's artifacts).
int run(const RunConfig& config, std::ostream& log);

/// Writes {"status": "error", "kind": ..., "message": ...} to dir/error.json.
void write_error_record(const std::filesystem::path& dir, const std::string& kind, const std::string& message);

}  // namespace vstretch
