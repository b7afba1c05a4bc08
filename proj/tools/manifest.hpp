#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace trinet::cli {

// Option files are JSON objects keyed by long option name; a run manifest is also accepted, in
// which case its "config" member is used. Values given on the command line take precedence.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::vector<std::string> command_path) : path_(std::move(command_path)) {}
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

 private:
  std::vector<std::string> path_;
};

// Subcommand names selected by argv, outermost first.
std::vector<std::string> command_path(const CLI::App& app, int argc, const char* const* argv);

std::string read_file(const std::string& path);

class RunManifest {
 public:
  // Snapshots every option of the selected subcommand.
  RunManifest(std::string command, const CLI::App& command_app);

  // Returns the file contents; inputs must all be read before the first output is written.
  std::string read_input(const std::string& path);
  // Hash of command, configuration without output paths, seeds, module versions and input hashes.
  const std::string& hash();

  void write_json(const std::string& path, nlohmann::ordered_json body);
  void write_csv(const std::string& path, const std::string& body);
  // Writes the manifest to `path`, else next to the first output, else to standard error.
  void finish(const std::string& path);

 private:
  nlohmann::ordered_json reproducible_part() const;
  void write(const std::string& path, const std::string& content);

  std::string command_;
  nlohmann::ordered_json config_;
  nlohmann::ordered_json seeds_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
  std::optional<std::string> hash_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace trinet::cli
