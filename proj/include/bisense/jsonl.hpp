#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bisense/corpus.hpp"

namespace bisense::jsonl {

struct Record {
  std::string id;
  std::string text;
  std::optional<corpus::Label> label;
  corpus::LabelSource label_source = corpus::LabelSource::None;
  std::optional<double> weak_score;
};

// Reads a JSONL corpus file, one object per line with fields
// {"id", "text", "label", "label_source", "weak_score"}. With strict=true,
// unknown fields raise std::runtime_error; otherwise they are ignored.
std::vector<Record> read_corpus(const std::string& path, bool strict = false);

void write_corpus(const std::string& path, std::span<const Record> records);

std::string label_to_string(corpus::Label l);
corpus::Label label_from_string(const std::string& s);
std::string source_to_string(corpus::LabelSource s);
corpus::LabelSource source_from_string(const std::string& s);

}  // namespace bisense::jsonl
