#pragma once

#include <iostream>
#include <optional>
#include <string>

#include "gals/config.hpp"

namespace gals {

// Options shared by every subcommand. The CLI front end fills these from
// flags; tests call the command functions directly.
struct DriverOptions {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> until;  // "10ms" (time) or "50000ev" (events)
    bool strict = false;
    std::string compare = "spread";  // spectrum: variant to run against fixed
    std::ostream* out = &std::cout;
    std::ostream* err = &std::cerr;
};

// Each returns the process exit code. Every failure path prints a single
// line starting with "error:" to the error stream.
int cmd_validate(const DriverOptions& opts);
int cmd_run(const DriverOptions& opts);
int cmd_spectrum(const DriverOptions& opts);
int cmd_thermal(const DriverOptions& opts);
int cmd_resources(const DriverOptions& opts);

// out/<config-stem>/<command>, or the explicit --out-dir / GALSIM_OUT_DIR.
std::string resolve_out_dir(const DriverOptions& opts, const std::string& command);

}  // namespace gals
