#pragma once

// Batch experiment runner behind the dkctl command line tool.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace dk::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kConfigError = 2 };

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
};

/// Runs the experiment described by the config file. Writes results.json (and
/// command-specific CSV tables) into out_dir, prints a summary to `out` and
/// diagnostics to `err`.
int run(const Options& options, std::ostream& out, std::ostream& err);

/// 1-based line of the value addressed by a JSON pointer in `text`, falling
/// back to the closest enclosing value; 0 if the text cannot be scanned.
std::size_t locate_line(std::string_view text, std::string_view pointer);

}  // namespace dk::cli
