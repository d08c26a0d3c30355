#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "temp_dir.hpp"

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs a shell command, capturing stdout, stderr and the exit status.
inline CommandResult run_command(const std::string& command) {
  const TempDir scratch;
  const auto out = scratch / "stdout";
  const auto err = scratch / "stderr";
  const std::string full = command + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(full.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

// Relative path -> file bytes for every regular file under `root`. Run
// manifests are normalized by dropping their wall-clock duration.
inline std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), root).string();
    auto bytes = read_file(entry.path());
    if (entry.path().filename() == "run_manifest.json") {
      auto doc = nlohmann::ordered_json::parse(bytes);
      doc.erase("duration_ms");
      bytes = doc.dump(2);
    }
    files[rel] = std::move(bytes);
  }
  return files;
}
