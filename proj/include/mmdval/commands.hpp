#pragma once

#include "mmdval/config.hpp"

#include <iosfwd>

namespace mmdval {

/// Each command writes its artifacts under config.out and a short summary to
/// `log`. Input problems surface as InputError, broken invariants as
/// InvariantError.
void cmd_value(const RunConfig& config, std::ostream& log);
void cmd_stream(const RunConfig& config, std::ostream& log);
void cmd_oracle(const RunConfig& config, std::ostream& log);
void cmd_experiment(const RunConfig& config, std::ostream& log);

/// Full command-line entry point. Returns the process exit code:
/// 0 success, 1 input error, 2 internal invariant violation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mmdval
