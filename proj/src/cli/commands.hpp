#ifndef SRDETECT_CLI_COMMANDS_HPP
#define SRDETECT_CLI_COMMANDS_HPP

#include "config.hpp"

namespace srd::cli {

// Subcommand entry points. Throw ConfigError for usage problems (exit 2)
// and NumericalError/CalibrationError for numerical failures (exit 1).
int cmd_calibrate(const RunConfig& cfg);
int cmd_oc(const RunConfig& cfg);
int cmd_table(const RunConfig& cfg);
int cmd_constants(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);

} // namespace srd::cli

#endif
