#include "bisense/config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace bisense::config {

void Config::declare(const std::string& key, const std::string& default_value) {
  values_[key] = default_value;
}

bool Config::is_declared(const std::string& key) const {
  return values_.count(key) > 0;
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key=value");
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!is_declared(key))
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": unknown key \"" + key + "\"");
    values_[key] = value;
  }
}

void Config::set(const std::string& key, const std::string& value) {
  if (!is_declared(key))
    throw std::invalid_argument("unknown config key: " + key);
  values_[key] = value;
}

std::string Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw std::invalid_argument("unknown config key: " + key);
  return it->second;
}

int64_t Config::get_int(const std::string& key) const {
  const std::string v = get(key);
  size_t used = 0;
  int64_t out = std::stoll(v, &used);
  if (used != v.size())
    throw std::invalid_argument("config key " + key + " is not an integer: " + v);
  return out;
}

double Config::get_double(const std::string& key) const {
  const std::string v = get(key);
  size_t used = 0;
  double out = std::stod(v, &used);
  if (used != v.size())
    throw std::invalid_argument("config key " + key + " is not a number: " + v);
  return out;
}

void write_manifest(const std::string& out_path, const std::string& command,
                    const Config& config,
                    const std::vector<ManifestInput>& inputs) {
  nlohmann::json j;
  j["command"] = command;
  j["format_version"] = 1;
  nlohmann::json cfg;
  for (const auto& [k, v] : config.resolved()) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::json ins = nlohmann::json::array();
  for (const ManifestInput& in : inputs)
    ins.push_back({{"role", in.role}, {"path", in.path}, {"digest", in.digest}});
  j["inputs"] = ins;
  std::ofstream out(out_path + ".manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest for: " + out_path);
  out << j.dump(2) << "\n";
}

}  // namespace bisense::config
