#include "manifest.hpp"

#include <Eigen/Core>
#include <fstream>
#include <iostream>
#include <sstream>

#include "trinet/error.hpp"
#include "trinet/hash.hpp"

#ifndef TRINET_VERSION
#define TRINET_VERSION "unknown"
#endif

namespace trinet::cli {

namespace {

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

nlohmann::ordered_json versions() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  std::ostringstream json;
  json << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.' << NLOHMANN_JSON_VERSION_PATCH;
  return {{"trinet", TRINET_VERSION}, {"eigen", eigen.str()}, {"cli11", CLI11_VERSION}, {"nlohmann_json", json.str()}};
}

}  // namespace

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool, std::string) const {
  nlohmann::ordered_json j;
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty() || opt->get_configurable() == false) continue;
    if (opt->count() > 0)
      j[opt->get_lnames().front()] = opt->results();
    else if (default_also && !opt->get_default_str().empty())
      j[opt->get_lnames().front()] = opt->get_default_str();
  }
  return j.dump(1);
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(input);
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("command")) j = j["config"];
  if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
  std::vector<CLI::ConfigItem> items;
  for (const auto& [key, value] : j.items()) {
    CLI::ConfigItem item;
    item.parents = path_;
    item.name = key;
    if (value.is_array())
      for (const auto& v : value) item.inputs.push_back(scalar_text(v));
    else if (!value.is_null())
      item.inputs.push_back(scalar_text(value));
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<std::string> command_path(const CLI::App& app, int argc, const char* const* argv) {
  std::vector<std::string> path;
  const CLI::App* current = &app;
  for (int i = 1; i < argc; ++i) {
    const std::string token = argv[i];
    if (token.empty() || token.front() == '-') continue;
    const CLI::App* next = nullptr;
    for (const CLI::App* sub : current->get_subcommands([](const CLI::App*) { return true; }))
      if (sub->get_name() == token) next = sub;
    if (!next) continue;
    path.push_back(token);
    current = next;
  }
  return path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunManifest::RunManifest(std::string command, const CLI::App& command_app) : command_(std::move(command)) {
  config_ = nlohmann::ordered_json::object();
  seeds_ = nlohmann::ordered_json::object();
  for (const CLI::Option* opt : command_app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help" || name == "manifest") continue;
    nlohmann::ordered_json value;
    if (opt->count() > 0) {
      const auto results = opt->results();
      value = results.size() == 1 ? nlohmann::ordered_json(results.front()) : nlohmann::ordered_json(results);
    } else if (!opt->get_default_str().empty()) {
      value = opt->get_default_str();
    }
    config_[name] = value;
    if (name == "seed") seeds_[name] = value;
  }
}

std::string RunManifest::read_input(const std::string& path) {
  if (hash_) throw StateError("inputs must be read before outputs are written");
  auto content = read_file(path);
  inputs_.emplace_back(path, sha256_hex(content));
  return content;
}

nlohmann::ordered_json RunManifest::reproducible_part() const {
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  for (const auto& [path, digest] : inputs_) inputs[path] = digest;
  return {{"command", command_}, {"config", config_}, {"seeds", seeds_}, {"modules", versions()}, {"inputs", inputs}};
}

// Output destinations do not affect results, so they are left out of the hash.
const std::string& RunManifest::hash() {
  if (!hash_) {
    auto part = reproducible_part();
    auto& config = part["config"];
    for (auto it = config.begin(); it != config.end();) {
      const std::string& key = it.key();
      if (key == "out" || key.ends_with("-out")) it = config.erase(it);
      else ++it;
    }
    hash_ = sha256_hex(part.dump());
  }
  return *hash_;
}

void RunManifest::write(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write '" + path + "'");
  out << content;
  if (!out) throw DomainError("failed writing '" + path + "'");
  outputs_.emplace_back(path, sha256_hex(content));
}

void RunManifest::write_json(const std::string& path, nlohmann::ordered_json body) {
  body["manifest_hash"] = hash();
  write(path, body.dump(1) + "\n");
}

void RunManifest::write_csv(const std::string& path, const std::string& body) {
  write(path, "# manifest_hash=" + hash() + "\n" + body);
}

void RunManifest::finish(const std::string& path) {
  auto j = reproducible_part();
  j["manifest_hash"] = hash();
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  for (const auto& [p, digest] : outputs_) outputs[p] = digest;
  j["outputs"] = outputs;
  j["timings"] = {{"wall_seconds",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()}};
  const std::string target = !path.empty() ? path : outputs_.empty() ? "" : outputs_.front().first + ".manifest.json";
  if (target.empty()) {
    std::cerr << j.dump(1) << '\n';
    return;
  }
  std::ofstream out(target);
  if (!out) throw DomainError("cannot write '" + target + "'");
  out << j.dump(1) << '\n';
}

}  // namespace trinet::cli
