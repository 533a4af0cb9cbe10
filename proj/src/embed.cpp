#include "bisense/embed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace bisense::embed {

std::vector<Document> sense_documents(std::span<const corpus::Tweet> tweets) {
  std::vector<Document> docs;
  docs.reserve(tweets.size());
  for (const corpus::Tweet& tw : tweets) {
    std::vector<corpus::Token> toks = corpus::assign_sense_tokens(tw);
    Document doc;
    doc.reserve(toks.size());
    for (const corpus::Token& t : toks) {
      if (t.kind == corpus::TokenKind::EmojiSense) {
        bool pos = *t.sense == corpus::Sense::Positive;
        doc.push_back({t.surface + (pos ? kSensePosSuffix : kSenseNegSuffix),
                       pos ? TokenClass::SensePos : TokenClass::SenseNeg});
      } else {
        doc.push_back({t.surface, TokenClass::Word});
      }
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> plain_documents(std::span<const corpus::Tweet> tweets) {
  std::vector<Document> docs;
  docs.reserve(tweets.size());
  for (const corpus::Tweet& tw : tweets) {
    Document doc;
    doc.reserve(tw.tokens.size());
    for (const corpus::Token& t : tw.tokens) {
      doc.push_back({t.surface, t.kind == corpus::TokenKind::Word
                                    ? TokenClass::Word
                                    : TokenClass::Emoji});
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

Vocab Vocab::build(std::span<const Document> docs, int min_count) {
  if (docs.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  std::map<std::string, VocabEntry> counts;
  for (const Document& doc : docs) {
    for (const DocToken& t : doc) {
      auto [it, inserted] = counts.try_emplace(t.text, VocabEntry{t.text, t.cls, 0});
      ++it->second.count;
    }
  }
  Vocab v;
  v.min_count_ = min_count;
  for (auto& [_, e] : counts)
    if (e.count >= static_cast<uint64_t>(min_count)) v.entries_.push_back(e);
  std::sort(v.entries_.begin(), v.entries_.end(),
            [](const VocabEntry& a, const VocabEntry& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.text < b.text;
            });
  for (int32_t i = 0; i < static_cast<int32_t>(v.entries_.size()); ++i) {
    v.index_[v.entries_[i].text] = i;
    v.total_count_ += v.entries_[i].count;
  }
  return v;
}

Vocab Vocab::from_entries(std::vector<VocabEntry> entries, int min_count) {
  Vocab v;
  v.min_count_ = min_count;
  v.entries_ = std::move(entries);
  for (int32_t i = 0; i < static_cast<int32_t>(v.entries_.size()); ++i) {
    v.index_[v.entries_[i].text] = i;
    v.total_count_ += v.entries_[i].count;
  }
  return v;
}

int32_t Vocab::find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

std::vector<uint32_t> char_ngram_buckets(std::string_view surface, TokenClass cls,
                                         int nmin, int nmax, int bucket_count) {
  std::vector<uint32_t> out;
  if (cls != TokenClass::Word || bucket_count <= 0) return out;
  std::vector<char32_t> cps;
  cps.push_back(U'<');
  for (char32_t cp : utf8_decode(surface)) cps.push_back(cp);
  cps.push_back(U'>');
  const int len = static_cast<int>(cps.size());
  std::string buf;
  for (int n = nmin; n <= nmax; ++n) {
    for (int i = 0; i + n <= len; ++i) {
      buf.clear();
      for (int k = 0; k < n; ++k) utf8_append(cps[i + k], buf);
      out.push_back(fnv1a32(buf) % static_cast<uint32_t>(bucket_count));
    }
  }
  return out;
}

EmbeddingTable::EmbeddingTable(Vocab vocab, int dim, int bucket_count, int nmin,
                               int nmax, uint64_t seed)
    : vocab_(std::move(vocab)),
      dim_(dim),
      bucket_count_(bucket_count),
      nmin_(nmin),
      nmax_(nmax) {
  input_.assign(static_cast<size_t>(input_rows()) * dim_, 0.0f);
  output_.assign(static_cast<size_t>(vocab_.size()) * dim_, 0.0f);
  Rng rng(seed);
  const double bound = 1.0 / dim_;
  for (float& x : input_)
    x = static_cast<float>(rng.uniform(-bound, bound));
  build_subwords();
}

void EmbeddingTable::build_subwords() {
  subwords_.resize(vocab_.size());
  for (int32_t id = 0; id < vocab_.size(); ++id) {
    const VocabEntry& e = vocab_.entry(id);
    std::vector<int32_t>& rows = subwords_[id];
    rows.push_back(id);
    for (uint32_t b :
         char_ngram_buckets(e.text, e.cls, nmin_, nmax_, bucket_count_))
      rows.push_back(vocab_.size() + static_cast<int32_t>(b));
  }
}

std::vector<double> EmbeddingTable::compose(int32_t id) const {
  const std::vector<int32_t>& rows = subwords_[id];
  std::vector<double> v(dim_, 0.0);
  for (int32_t r : rows) {
    const float* row = input_row(r);
    for (int d = 0; d < dim_; ++d) v[d] += row[d];
  }
  for (double& x : v) x /= static_cast<double>(rows.size());
  return v;
}

std::vector<double> EmbeddingTable::lookup_word(const std::string& surface) const {
  int32_t id = vocab_.find(surface);
  if (id >= 0) return compose(id);
  // OOV word: composed purely from its n-gram rows
  std::vector<uint32_t> buckets =
      char_ngram_buckets(surface, TokenClass::Word, nmin_, nmax_, bucket_count_);
  if (buckets.empty())
    throw MissingSenseError("no vector composable for token: " + surface);
  std::vector<double> v(dim_, 0.0);
  for (uint32_t b : buckets) {
    const float* row = input_row(vocab_.size() + static_cast<int64_t>(b));
    for (int d = 0; d < dim_; ++d) v[d] += row[d];
  }
  for (double& x : v) x /= static_cast<double>(buckets.size());
  return v;
}

std::vector<double> EmbeddingTable::lookup(const std::string& token) const {
  return lookup_word(token);
}

std::pair<std::vector<double>, std::vector<double>> EmbeddingTable::lookup_bisense(
    const std::string& emoji) const {
  int32_t pos = vocab_.find(emoji + kSensePosSuffix);
  int32_t neg = vocab_.find(emoji + kSenseNegSuffix);
  if (pos < 0 || neg < 0)
    throw MissingSenseError("missing sense vectors for emoji: " + emoji);
  return {compose(pos), compose(neg)};
}

std::vector<double> EmbeddingTable::lookup_emoji(const std::string& emoji) const {
  int32_t id = vocab_.find(emoji);
  if (id < 0 || vocab_.entry(id).cls != TokenClass::Emoji)
    throw MissingSenseError("emoji not in vocabulary: " + emoji);
  return compose(id);
}

double score_pair(const EmbeddingTable& table, int32_t target, int32_t context) {
  std::vector<double> v = table.compose(target);
  const float* out = table.output_row(context);
  double s = 0;
  for (int d = 0; d < table.dim(); ++d) s += v[d] * out[d];
  return s;
}

namespace {
double softplus(double x) {
  // log(1 + exp(x)), stable
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

double sgd_step(EmbeddingTable& table, int32_t target, int32_t context,
                std::span<const int32_t> negatives, double lr) {
  const int dim = table.dim_;
  const std::vector<int32_t>& rows = table.subwords_[target];
  std::vector<double> v(dim, 0.0);
  for (int32_t r : rows) {
    const float* row = table.input_row(r);
    for (int d = 0; d < dim; ++d) v[d] += row[d];
  }
  const double k = static_cast<double>(rows.size());
  for (double& x : v) x /= k;

  std::vector<double> grad_v(dim, 0.0);
  double loss = 0.0;
  auto process = [&](int32_t ctx, double label) {
    float* out = table.output_row(ctx);
    double s = 0;
    for (int d = 0; d < dim; ++d) s += v[d] * out[d];
    loss += label > 0.5 ? softplus(-s) : softplus(s);
    double g = sigmoid(s) - label;
    for (int d = 0; d < dim; ++d) {
      grad_v[d] += g * out[d];
      out[d] -= static_cast<float>(lr * g * v[d]);
    }
  };
  process(context, 1.0);
  for (int32_t n : negatives) process(n, 0.0);

  if (!std::isfinite(loss))
    throw std::runtime_error(
        "sgd_step: non-finite loss (target=" + std::to_string(target) +
        ", context=" + std::to_string(context) + ")");

  for (int32_t r : rows) {
    float* row = table.input_row(r);
    for (int d = 0; d < dim; ++d)
      row[d] -= static_cast<float>(lr * grad_v[d] / k);
  }
  return loss;
}

UnigramTable UnigramTable::build(const Vocab& vocab, double exponent,
                                 size_t table_size) {
  UnigramTable t;
  t.vocab_size_ = vocab.size();
  double total = 0;
  for (int32_t i = 0; i < vocab.size(); ++i)
    total += std::pow(static_cast<double>(vocab.entry(i).count), exponent);
  t.table_.resize(table_size);
  int32_t id = 0;
  double cum = std::pow(static_cast<double>(vocab.entry(0).count), exponent) / total;
  for (size_t i = 0; i < table_size; ++i) {
    t.table_[i] = id;
    if (static_cast<double>(i + 1) / table_size > cum && id + 1 < vocab.size()) {
      ++id;
      cum += std::pow(static_cast<double>(vocab.entry(id).count), exponent) / total;
    }
  }
  return t;
}

int32_t UnigramTable::sample(Rng& rng, int32_t exclude) const {
  if (vocab_size_ <= 1 && exclude == 0)
    throw std::runtime_error("negative_sample: no valid negative exists");
  for (int attempt = 0; attempt < 64; ++attempt) {
    int32_t s = table_[rng.next_index(table_.size())];
    if (s != exclude) return s;
  }
  // degenerate mass concentration; fall back to a scan
  for (int32_t s : table_)
    if (s != exclude) return s;
  throw std::runtime_error("negative_sample: no valid negative exists");
}

namespace {

struct TrainPlan {
  std::vector<std::vector<int32_t>> lines;  // in-vocab token ids per doc
  uint64_t total_tokens = 0;
};

TrainPlan make_plan(std::span<const Document> docs, const Vocab& vocab) {
  TrainPlan plan;
  plan.lines.reserve(docs.size());
  for (const Document& doc : docs) {
    std::vector<int32_t> line;
    line.reserve(doc.size());
    for (const DocToken& t : doc) {
      int32_t id = vocab.find(t.text);
      if (id >= 0) line.push_back(id);
    }
    plan.total_tokens += line.size();
    plan.lines.push_back(std::move(line));
  }
  return plan;
}

// one worker pass over [lo, hi) docs; updates are lock-free on the shared table
double train_range(EmbeddingTable& table, const TrainPlan& plan,
                   const UnigramTable& unigram, const TrainConfig& cfg,
                   size_t lo, size_t hi, Rng& rng, uint64_t total_planned,
                   std::atomic<uint64_t>& processed, uint64_t& pair_count) {
  const Vocab& vocab = table.vocab();
  std::vector<int32_t> negs(cfg.negatives);
  double loss_sum = 0;
  pair_count = 0;
  for (size_t di = lo; di < hi; ++di) {
    const std::vector<int32_t>& full = plan.lines[di];
    std::vector<int32_t> line;
    line.reserve(full.size());
    for (int32_t id : full) {
      if (cfg.subsample > 0) {
        double f = static_cast<double>(vocab.entry(id).count) /
                   static_cast<double>(vocab.total_count());
        if (f > cfg.subsample) {
          double p_discard = 1.0 - std::sqrt(cfg.subsample / f);
          if (rng.next_double() < p_discard) continue;
        }
      }
      line.push_back(id);
    }
    const int n = static_cast<int>(line.size());
    for (int t = 0; t < n; ++t) {
      uint64_t done = processed.fetch_add(1, std::memory_order_relaxed);
      double progress = static_cast<double>(done) / total_planned;
      double lr_now = cfg.lr * std::max(1e-4, 1.0 - progress);
      int b = 1 + static_cast<int>(rng.next_index(cfg.window));
      for (int off = -b; off <= b; ++off) {
        if (off == 0) continue;
        int c = t + off;
        if (c < 0 || c >= n) continue;
        for (int j = 0; j < cfg.negatives; ++j)
          negs[j] = unigram.sample(rng, line[c]);
        loss_sum += sgd_step(table, line[t], line[c], negs, lr_now);
        ++pair_count;
      }
    }
  }
  return loss_sum;
}

}  // namespace

TrainResult train(std::span<const Document> docs, const TrainConfig& config) {
  Vocab vocab = Vocab::build(docs, config.min_count);
  EmbeddingTable table(std::move(vocab), config.dim, config.bucket_count,
                       config.nmin, config.nmax, config.seed);
  TrainResult result{std::move(table), {}};
  if (config.epochs <= 0) return result;

  const UnigramTable unigram = UnigramTable::build(result.table.vocab());
  TrainPlan plan = make_plan(docs, result.table.vocab());
  uint64_t total_planned =
      std::max<uint64_t>(1, plan.total_tokens * static_cast<uint64_t>(config.epochs));
  std::atomic<uint64_t> processed{0};

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0;
    uint64_t pairs = 0;
    if (config.threads <= 1) {
      Rng rng(config.seed + 0x9E37 * static_cast<uint64_t>(epoch + 1));
      loss_sum = train_range(result.table, plan, unigram, config, 0,
                             plan.lines.size(), rng, total_planned, processed,
                             pairs);
    } else {
      std::vector<std::thread> workers;
      std::vector<double> sums(config.threads, 0.0);
      std::vector<uint64_t> counts(config.threads, 0);
      size_t chunk = (plan.lines.size() + config.threads - 1) / config.threads;
      for (int w = 0; w < config.threads; ++w) {
        size_t lo = std::min(plan.lines.size(), w * chunk);
        size_t hi = std::min(plan.lines.size(), lo + chunk);
        workers.emplace_back([&, w, lo, hi] {
          Rng rng(config.seed + 0x9E37 * static_cast<uint64_t>(epoch + 1) +
                  0x51D * static_cast<uint64_t>(w + 1));
          sums[w] = train_range(result.table, plan, unigram, config, lo, hi, rng,
                                total_planned, processed, counts[w]);
        });
      }
      for (auto& th : workers) th.join();
      for (int w = 0; w < config.threads; ++w) {
        loss_sum += sums[w];
        pairs += counts[w];
      }
    }
    result.epoch_loss.push_back(pairs ? loss_sum / pairs : 0.0);
  }
  return result;
}

namespace {

constexpr char kMagic[8] = {'B', 'S', 'E', 'M', 'B', 'E', 'D', '\0'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("embedding file truncated");
}

}  // namespace

void EmbeddingTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embedding file: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<int32_t>(dim_));
  write_pod(out, static_cast<int64_t>(vocab_.size()));
  write_pod(out, static_cast<int32_t>(bucket_count_));
  write_pod(out, static_cast<int32_t>(nmin_));
  write_pod(out, static_cast<int32_t>(nmax_));
  for (int32_t i = 0; i < vocab_.size(); ++i) {
    const VocabEntry& e = vocab_.entry(i);
    write_pod(out, static_cast<uint32_t>(e.text.size()));
    out.write(e.text.data(), static_cast<std::streamsize>(e.text.size()));
    write_pod(out, static_cast<uint8_t>(e.cls));
    write_pod(out, static_cast<uint64_t>(e.count));
  }
  out.write(reinterpret_cast<const char*>(input_.data()),
            static_cast<std::streamsize>(input_.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(output_.data()),
            static_cast<std::streamsize>(output_.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not an embedding file (bad magic): " + path);
  uint32_t version;
  read_pod(in, version);
  if (version != kVersion)
    throw std::runtime_error("unsupported embedding file version " +
                             std::to_string(version) + ": " + path);
  int32_t dim, bucket_count, nmin, nmax;
  int64_t vocab_size;
  read_pod(in, dim);
  read_pod(in, vocab_size);
  read_pod(in, bucket_count);
  read_pod(in, nmin);
  read_pod(in, nmax);

  EmbeddingTable t;
  t.dim_ = dim;
  t.bucket_count_ = bucket_count;
  t.nmin_ = nmin;
  t.nmax_ = nmax;
  std::vector<VocabEntry> entries;
  entries.reserve(static_cast<size_t>(vocab_size));
  for (int64_t i = 0; i < vocab_size; ++i) {
    uint32_t len;
    read_pod(in, len);
    std::string text(len, '\0');
    in.read(text.data(), len);
    if (!in) throw std::runtime_error("embedding file truncated: " + path);
    uint8_t cls;
    read_pod(in, cls);
    uint64_t count;
    read_pod(in, count);
    entries.push_back({std::move(text), static_cast<TokenClass>(cls), count});
  }
  t.vocab_ = Vocab::from_entries(std::move(entries), 1);
  t.input_.resize(static_cast<size_t>(t.input_rows()) * dim);
  t.output_.resize(static_cast<size_t>(vocab_size) * dim);
  in.read(reinterpret_cast<char*>(t.input_.data()),
          static_cast<std::streamsize>(t.input_.size() * sizeof(float)));
  in.read(reinterpret_cast<char*>(t.output_.data()),
          static_cast<std::streamsize>(t.output_.size() * sizeof(float)));
  if (!in) throw std::runtime_error("embedding file truncated: " + path);
  t.build_subwords();
  return t;
}

void EmbeddingTable::export_text(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write text export: " + path);
  out << vocab_.size() << " " << dim_ << "\n";
  for (int32_t i = 0; i < vocab_.size(); ++i) {
    out << vocab_.entry(i).text;
    std::vector<double> v = compose(i);
    char buf[32];
    for (double x : v) {
      std::snprintf(buf, sizeof(buf), " %.6g", x);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace bisense::embed
