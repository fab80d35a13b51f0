#pragma once

// Run manifests: every CLI command records its resolved configuration, input
// and output artifacts (with CRC32 hashes), and wall-clock time as JSON, so a
// run can be replayed and its outputs verified bitwise.

#include <chrono>
#include <ctime>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhcsr/crc32.hpp"
#include "nhcsr/io.hpp"

namespace nhcsr {

using KvMap = std::map<std::string, std::string>;

inline uint32_t file_crc32(const std::string& path) {
  std::string bytes = read_file(path);
  return crc32(bytes.data(), bytes.size());
}

class ManifestBuilder {
 public:
  explicit ManifestBuilder(std::string command) : command_(std::move(command)) {
    start_ = std::chrono::steady_clock::now();
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    started_at_ = buf;
  }

  void config(const KvMap& kv) { config_ = kv; }
  void input(const std::string& path) { inputs_.push_back(path); }
  void output(const std::string& path) { outputs_.push_back(path); }

  void write(const std::string& path) const {
    nlohmann::json j;
    j["command"] = command_;
    j["started_at"] = started_at_;
    j["config"] = config_;
    nlohmann::json ins = nlohmann::json::array();
    for (const std::string& p : inputs_)
      ins.push_back({{"path", p}, {"crc32", file_crc32(p)}});
    j["inputs"] = ins;
    nlohmann::json outs = nlohmann::json::array();
    for (const std::string& p : outputs_)
      outs.push_back({{"path", p}, {"crc32", file_crc32(p)}});
    j["outputs"] = outs;
    j["wall_clock_sec"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_file(path, j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::string started_at_;
  KvMap config_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

struct ManifestRecord {
  std::string command;
  KvMap config;
  std::vector<std::pair<std::string, uint32_t>> outputs;
};

inline ManifestRecord read_manifest(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": invalid manifest JSON: " + e.what());
  }
  ManifestRecord rec;
  try {
    rec.command = j.at("command").get<std::string>();
    rec.config = j.at("config").get<KvMap>();
    for (const auto& o : j.at("outputs"))
      rec.outputs.emplace_back(o.at("path").get<std::string>(), o.at("crc32").get<uint32_t>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": manifest missing required fields: " + e.what());
  }
  return rec;
}

}  // namespace nhcsr
