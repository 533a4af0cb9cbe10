#include "bisense/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace bisense::checkpoint {

namespace {

constexpr char kMagic[8] = {'B', 'S', 'C', 'K', 'P', 'T', '\0', '\0'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint truncated");
}

void write_string(std::ofstream& out, const std::string& s) {
  write_pod(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
  uint32_t len;
  read_pod(in, len);
  if (len > (1u << 24)) throw std::runtime_error("checkpoint corrupt (string)");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw std::runtime_error("checkpoint truncated");
  return s;
}

}  // namespace

void save(const std::string& path, models::Model& model, const Checkpoint& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_string(out, models::to_string(meta.config.variant));
  write_pod(out, static_cast<int32_t>(meta.config.emb_dim));
  write_pod(out, static_cast<int32_t>(meta.config.hidden));
  write_pod(out, static_cast<int32_t>(meta.config.att_hidden));
  write_pod(out, static_cast<uint64_t>(meta.config.seed));
  write_string(out, meta.bisense_digest);
  write_string(out, meta.word_digest);
  write_pod(out, static_cast<int32_t>(meta.history.epochs_run));
  write_pod(out, static_cast<int32_t>(meta.history.best_epoch));
  write_pod(out, meta.history.best_val_loss);

  std::vector<nn::Tensor*> tensors = model.tensors();
  write_pod(out, static_cast<uint32_t>(tensors.size()));
  for (nn::Tensor* t : tensors) {
    write_string(out, t->name);
    write_pod(out, static_cast<int64_t>(t->value.rows()));
    write_pod(out, static_cast<int64_t>(t->value.cols()));
    out.write(reinterpret_cast<const char*>(t->value.data()),
              static_cast<std::streamsize>(sizeof(double) * t->value.size()));
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Loaded load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file (bad magic): " + path);
  uint32_t version;
  read_pod(in, version);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version) + ": " + path);

  Checkpoint meta;
  meta.config.variant = models::variant_from_string(read_string(in));
  int32_t emb_dim, hidden, att_hidden;
  uint64_t seed;
  read_pod(in, emb_dim);
  read_pod(in, hidden);
  read_pod(in, att_hidden);
  read_pod(in, seed);
  meta.config.emb_dim = emb_dim;
  meta.config.hidden = hidden;
  meta.config.att_hidden = att_hidden;
  meta.config.seed = seed;
  meta.bisense_digest = read_string(in);
  meta.word_digest = read_string(in);
  int32_t epochs_run, best_epoch;
  read_pod(in, epochs_run);
  read_pod(in, best_epoch);
  read_pod(in, meta.history.best_val_loss);
  meta.history.epochs_run = epochs_run;
  meta.history.best_epoch = best_epoch;

  auto model = std::make_unique<models::Model>(meta.config);
  std::vector<nn::Tensor*> tensors = model->tensors();
  uint32_t count;
  read_pod(in, count);
  if (count != tensors.size())
    throw std::runtime_error("checkpoint tensor count mismatch: " + path);
  for (nn::Tensor* t : tensors) {
    std::string name = read_string(in);
    if (name != t->name)
      throw std::runtime_error("checkpoint tensor order mismatch at " + name);
    int64_t rows, cols;
    read_pod(in, rows);
    read_pod(in, cols);
    if (rows != t->value.rows() || cols != t->value.cols())
      throw std::runtime_error("checkpoint tensor shape mismatch at " + name);
    in.read(reinterpret_cast<char*>(t->value.data()),
            static_cast<std::streamsize>(sizeof(double) * t->value.size()));
    if (!in) throw std::runtime_error("checkpoint truncated: " + path);
  }
  return {std::move(model), meta};
}

}  // namespace bisense::checkpoint
