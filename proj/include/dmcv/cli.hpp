#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dmcv::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeError = 3 };

// Entry point shared by the dmcv executable and the tests. args excludes the
// program name: {"converge", "--config", "c.json", "--out", "dir"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// FNV-1a 64-bit, used to fingerprint the effective configuration.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace dmcv::cli
