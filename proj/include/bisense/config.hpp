#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bisense::config {

// Layered flat key=value configuration: defaults < BISENSE_SEED env (seed
// only) < config file < command-line flags. Unknown keys in a config file are
// rejected. Every run writes a manifest with the resolved values.
class Config {
 public:
  // declare a key with its default; undeclared keys are unknown
  void declare(const std::string& key, const std::string& default_value);
  bool is_declared(const std::string& key) const;

  // throws std::invalid_argument on unknown keys or unparsable lines
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);  // flag layer

  std::string get(const std::string& key) const;
  int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;

  // resolved key -> value map, stable order
  const std::map<std::string, std::string>& resolved() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct ManifestInput {
  std::string role;  // e.g. "corpus", "embedding"
  std::string path;
  std::string digest;
};

// run manifest: resolved config + seeds + input digests, written next to the
// primary output as <out>.manifest.json
void write_manifest(const std::string& out_path, const std::string& command,
                    const Config& config,
                    const std::vector<ManifestInput>& inputs);

}  // namespace bisense::config
