#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace spectra::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance record written next to every CLI output.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  nlohmann::ordered_json& config() { return config_; }
  void add_input(const std::filesystem::path& path);
  void add_output(const std::string& path) { outputs_.push_back(path); }

  nlohmann::ordered_json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::object();
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

/// `<dir>/<stem>.run.json` for a file output.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

std::string read_text(const std::filesystem::path& path);

}  // namespace spectra::cli
