#include "run_manifest.hpp"

#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "spectra/dataset_io.hpp"
#include "spectra/error.hpp"

namespace fs = std::filesystem;

namespace spectra::cli {

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_input(const fs::path& path) {
  inputs_[path.string()] = fnv1a_hex(read_text(path));
}

nlohmann::ordered_json RunManifest::to_json() const {
  const auto elapsed = std::chrono::steady_clock::now() - start_;
  nlohmann::ordered_json j;
  j["command"] = command_;
  j["tool_version"] = kToolVersion;
  j["config"] = config_;
  j["inputs"] = inputs_;
  j["outputs"] = outputs_;
  j["duration_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
  return j;
}

void RunManifest::write(const fs::path& path) const { write_text_atomic(path, to_json().dump(2) + "\n"); }

fs::path manifest_path_for(const fs::path& output) {
  return output.parent_path() / (output.stem().string() + ".run.json");
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error(ErrorKind::io, fmt::format("cannot create directory '{}': {}",
                                             path.parent_path().string(), ec.message()));
    }
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error(ErrorKind::io, fmt::format("cannot write '{}'", path.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::io, fmt::format("cannot write '{}'", path.string()));
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace spectra::cli
