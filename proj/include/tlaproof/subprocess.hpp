#pragma once

#include <string>
#include <vector>

namespace tlaproof {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;  // stdout and stderr interleaved
  long duration_ms = 0;
};

// Runs a command with a wall-clock timeout, capturing its combined output.
// The child is killed (whole process group) when the deadline passes.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& working_dir,
                          int timeout_seconds);

// Resolves an executable: absolute/relative paths are checked directly,
// bare names are searched on PATH. Returns "" when not found.
std::string find_executable(const std::string& name);

}  // namespace tlaproof
