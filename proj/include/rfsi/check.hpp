#pragma once

#include <string>
#include <vector>

#include "rfsi/config.hpp"

namespace rfsi {

struct CheckResult {
    std::string suite;
    bool passed = false;
    std::string detail;
};

/// Headless invariant/property suites behind the `check` subcommand. Each
/// entry exercises one module's documented invariants on the configured
/// geometry; any failure makes the CLI exit nonzero.
std::vector<CheckResult> run_check_suites(const RunConfig& cfg);

}  // namespace rfsi
