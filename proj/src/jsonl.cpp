#include "bisense/jsonl.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace bisense::jsonl {

using nlohmann::json;

std::string label_to_string(corpus::Label l) {
  return l == corpus::Label::Positive ? "pos" : "neg";
}

corpus::Label label_from_string(const std::string& s) {
  if (s == "pos") return corpus::Label::Positive;
  if (s == "neg") return corpus::Label::Negative;
  throw std::runtime_error("unknown label: " + s);
}

std::string source_to_string(corpus::LabelSource s) {
  switch (s) {
    case corpus::LabelSource::Auto: return "auto";
    case corpus::LabelSource::Human: return "human";
    default: return "none";
  }
}

corpus::LabelSource source_from_string(const std::string& s) {
  if (s == "auto") return corpus::LabelSource::Auto;
  if (s == "human") return corpus::LabelSource::Human;
  if (s == "none") return corpus::LabelSource::None;
  throw std::runtime_error("unknown label_source: " + s);
}

std::vector<Record> read_corpus(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<Record> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
    if (strict) {
      for (const auto& [key, _] : j.items()) {
        if (key != "id" && key != "text" && key != "label" &&
            key != "label_source" && key != "weak_score")
          throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                   ": unknown field \"" + key + "\"");
      }
    }
    Record r;
    r.id = j.at("id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    if (r.id.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": empty id");
    if (j.contains("label") && !j["label"].is_null())
      r.label = label_from_string(j["label"].get<std::string>());
    if (j.contains("label_source") && !j["label_source"].is_null())
      r.label_source = source_from_string(j["label_source"].get<std::string>());
    if (j.contains("weak_score") && !j["weak_score"].is_null())
      r.weak_score = j["weak_score"].get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

void write_corpus(const std::string& path, std::span<const Record> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const Record& r : records) {
    json j;
    j["id"] = r.id;
    j["text"] = r.text;
    if (r.label) j["label"] = label_to_string(*r.label);
    if (r.label_source != corpus::LabelSource::None)
      j["label_source"] = source_to_string(r.label_source);
    if (r.weak_score) j["weak_score"] = *r.weak_score;
    out << j.dump() << "\n";
  }
}

}  // namespace bisense::jsonl
