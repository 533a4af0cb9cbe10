#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "bisense/checkpoint.hpp"
#include "bisense/config.hpp"
#include "bisense/corpus.hpp"
#include "bisense/embed.hpp"
#include "bisense/jsonl.hpp"
#include "bisense/models.hpp"
#include "bisense/synth.hpp"
#include "bisense/train.hpp"
#include "bisense/util.hpp"
#include "bisense/viz.hpp"
#include "bisense/weaklabel.hpp"

#ifndef BISENSE_DATA_DIR
#define BISENSE_DATA_DIR "data"
#endif

namespace {

using namespace bisense;

std::string data_path(const std::string& name) {
  return std::string(BISENSE_DATA_DIR) + "/" + name;
}

void require_file(const std::string& path, const std::string& what) {
  if (!std::filesystem::exists(path))
    throw std::runtime_error(what + " not found: " + path +
                             " (pass the correct path or generate it first)");
}

// defaults < BISENSE_SEED env < config file < explicit flags
struct Layering {
  config::Config cfg;
  std::vector<std::pair<std::string, std::string>> flag_values;

  void declare(const std::string& key, const std::string& def) {
    cfg.declare(key, def);
  }
  void declare_seeded(const std::string& key, const std::string& def) {
    cfg.declare(key, def);
    if (const char* env = std::getenv("BISENSE_SEED")) cfg.set(key, env);
  }
  void resolve(const std::string& config_file) {
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& [k, v] : flag_values) cfg.set(k, v);
  }
};

// CLI11 option that participates in the config layering
void layered_option(CLI::App* app, Layering& lay, const std::string& flag,
                    const std::string& key, const std::string& def,
                    const std::string& help, bool seeded = false) {
  if (seeded)
    lay.declare_seeded(key, def);
  else
    lay.declare(key, def);
  auto value = std::make_shared<std::string>();
  app->add_option_function<std::string>(
         flag,
         [&lay, key, value](const std::string& v) {
           lay.flag_values.emplace_back(key, v);
         },
         help)
      ->default_str(def);
}

corpus::EmojiTable load_emoji_table(const config::Config& cfg) {
  const std::string path = cfg.get("emoji_table");
  require_file(path, "emoji range table");
  return corpus::EmojiTable::load(path);
}

struct LoadedCorpus {
  std::vector<corpus::Tweet> tweets;
  std::vector<jsonl::Record> records;  // aligned with tweets
};

// read + preprocess, keeping only accepted tweets; labels carried over
LoadedCorpus load_and_preprocess(const std::string& path,
                                 const corpus::EmojiTable& table, int min_words,
                                 bool strict) {
  require_file(path, "corpus file");
  LoadedCorpus out;
  for (jsonl::Record& r : jsonl::read_corpus(path, strict)) {
    corpus::PreprocessResult pre =
        corpus::preprocess({r.id, r.text}, table, min_words);
    if (!pre.accepted()) continue;
    corpus::Tweet tw = std::move(*pre.tweet);
    tw.label = r.label;
    tw.label_source = r.label_source;
    tw.weak_score = r.weak_score;
    out.tweets.push_back(std::move(tw));
    out.records.push_back(std::move(r));
  }
  return out;
}

config::ManifestInput manifest_input(const std::string& role,
                                     const std::string& path) {
  return {role, path, file_digest(path)};
}

int run_synth(const config::Config& cfg) {
  synth::SynthConfig sc;
  sc.n = static_cast<int>(cfg.get_int("tweets"));
  sc.seed = static_cast<uint64_t>(cfg.get_int("seed"));
  sc.sarcasm_rate = cfg.get_double("sarcasm_rate");
  sc.ambiguous_rate = cfg.get_double("ambiguous_rate");
  std::vector<jsonl::Record> records = synth::synth_corpus(sc);
  const std::string out = cfg.get("out");
  jsonl::write_corpus(out, records);
  config::write_manifest(out, "synth", cfg, {});
  std::cerr << "synth: wrote " << records.size() << " tweets to " << out << "\n";
  return 0;
}

int run_label(const config::Config& cfg) {
  const corpus::EmojiTable table = load_emoji_table(cfg);
  const std::string lexicon_path = cfg.get("lexicon");
  const std::string modifiers_path = cfg.get("modifiers");
  require_file(lexicon_path, "lexicon file");
  require_file(modifiers_path, "modifiers file");
  weaklabel::Lexicon lex = weaklabel::Lexicon::load(lexicon_path, modifiers_path);
  weaklabel::WeakLabelPolicy policy;
  policy.discard_band = cfg.get_double("discard_band");
  policy.auto_threshold = cfg.get_double("auto_threshold");
  policy.validate();

  LoadedCorpus corpus_in =
      load_and_preprocess(cfg.get("in"), table, static_cast<int>(cfg.get_int("min_words")),
                          cfg.get_int("strict") != 0);

  std::vector<jsonl::Record> out_records;
  size_t n_auto = 0, n_manual = 0, n_discard = 0;
  for (size_t i = 0; i < corpus_in.tweets.size(); ++i) {
    const corpus::Tweet& tw = corpus_in.tweets[i];
    double s = weaklabel::score(tw.tokens, lex);
    weaklabel::WeakLabel wl = weaklabel::weak_label(s, policy);
    jsonl::Record r = corpus_in.records[i];
    r.weak_score = s;
    switch (wl) {
      case weaklabel::WeakLabel::AutoPositive:
      case weaklabel::WeakLabel::AutoNegative:
        r.label = wl == weaklabel::WeakLabel::AutoPositive
                      ? corpus::Label::Positive
                      : corpus::Label::Negative;
        r.label_source = corpus::LabelSource::Auto;
        out_records.push_back(std::move(r));
        ++n_auto;
        break;
      case weaklabel::WeakLabel::ManualPool:
        // the manual pool is kept only when a human label already exists
        if (r.label && r.label_source == corpus::LabelSource::Human) {
          out_records.push_back(std::move(r));
          ++n_manual;
        } else {
          ++n_discard;
        }
        break;
      case weaklabel::WeakLabel::Discard:
        ++n_discard;
        break;
    }
  }
  const std::string out = cfg.get("out");
  jsonl::write_corpus(out, out_records);
  config::write_manifest(out, "label", cfg,
                         {manifest_input("corpus", cfg.get("in")),
                          manifest_input("lexicon", lexicon_path),
                          manifest_input("modifiers", modifiers_path)});
  std::cerr << "label: auto=" << n_auto << " manual=" << n_manual
            << " discarded=" << n_discard << " -> " << out << "\n";
  return 0;
}

int run_embed(const config::Config& cfg) {
  const corpus::EmojiTable table = load_emoji_table(cfg);
  LoadedCorpus corpus_in = load_and_preprocess(
      cfg.get("in"), table, static_cast<int>(cfg.get_int("min_words")),
      cfg.get_int("strict") != 0);
  if (corpus_in.tweets.empty())
    throw std::runtime_error("embed: no usable tweets in " + cfg.get("in"));
  for (const corpus::Tweet& tw : corpus_in.tweets)
    if (!tw.label)
      throw std::runtime_error("embed: unlabeled tweet " + tw.id +
                               " (run `bisense label` first)");

  corpus::EmojiStats stats = corpus::emoji_stats(corpus_in.tweets);
  std::vector<std::string> allowed = corpus::filter_emojis(
      stats, cfg.get_int("emoji_threshold"));
  std::vector<corpus::Tweet> kept =
      corpus::apply_emoji_filter(corpus_in.tweets, allowed);
  if (kept.empty())
    throw std::runtime_error(
        "embed: emoji threshold dropped every tweet; lower --emoji-threshold");

  const std::string mode = cfg.get("mode");
  std::vector<embed::Document> docs;
  if (mode == "bisense")
    docs = embed::sense_documents(kept);
  else if (mode == "word")
    docs = embed::plain_documents(kept);
  else
    throw std::invalid_argument("embed: mode must be bisense or word");

  embed::TrainConfig tc;
  tc.dim = static_cast<int>(cfg.get_int("dim"));
  tc.window = static_cast<int>(cfg.get_int("window"));
  tc.negatives = static_cast<int>(cfg.get_int("negatives"));
  tc.epochs = static_cast<int>(cfg.get_int("epochs"));
  tc.lr = cfg.get_double("lr");
  tc.subsample = cfg.get_double("subsample");
  tc.min_count = static_cast<int>(cfg.get_int("min_count"));
  tc.nmin = static_cast<int>(cfg.get_int("nmin"));
  tc.nmax = static_cast<int>(cfg.get_int("nmax"));
  tc.bucket_count = static_cast<int>(cfg.get_int("buckets"));
  tc.seed = static_cast<uint64_t>(cfg.get_int("seed"));
  tc.threads = static_cast<int>(cfg.get_int("threads"));

  embed::TrainResult result = embed::train(docs, tc);
  const std::string out = cfg.get("out");
  result.table.save(out);
  if (!cfg.get("export_text").empty())
    result.table.export_text(cfg.get("export_text"));
  config::write_manifest(out, "embed", cfg,
                         {manifest_input("corpus", cfg.get("in"))});
  std::cerr << "embed: vocab=" << result.table.vocab().size() << " dim=" << tc.dim
            << " epochs=" << tc.epochs << " ->" << " " << out << "\n";
  for (size_t e = 0; e < result.epoch_loss.size(); ++e)
    std::cerr << "  epoch " << e + 1 << " mean loss " << result.epoch_loss[e]
              << "\n";
  return 0;
}

struct Tables {
  std::optional<embed::EmbeddingTable> bisense;
  std::optional<embed::EmbeddingTable> word;
  models::EmbeddingProvider provider() const {
    return {bisense ? &*bisense : nullptr, word ? &*word : nullptr};
  }
};

Tables load_tables(const config::Config& cfg) {
  Tables t;
  if (!cfg.get("emb_bisense").empty()) {
    require_file(cfg.get("emb_bisense"), "bi-sense embedding file");
    t.bisense = embed::EmbeddingTable::load(cfg.get("emb_bisense"));
  }
  if (!cfg.get("emb_word").empty()) {
    require_file(cfg.get("emb_word"), "word embedding file");
    t.word = embed::EmbeddingTable::load(cfg.get("emb_word"));
  }
  return t;
}

int run_train(const config::Config& cfg) {
  const corpus::EmojiTable table = load_emoji_table(cfg);
  models::ModelVariant variant = models::variant_from_string(cfg.get("variant"));
  Tables tables = load_tables(cfg);
  if (models::needs_bisense_table(variant) && !tables.bisense)
    throw std::runtime_error("train: " + cfg.get("variant") +
                             " needs --emb-bisense");
  if (models::needs_word_table(variant) && !tables.word)
    throw std::runtime_error("train: " + cfg.get("variant") + " needs --emb-word");
  if (!tables.bisense && !tables.word)
    throw std::runtime_error("train: pass --emb-bisense and/or --emb-word");

  LoadedCorpus train_corpus = load_and_preprocess(
      cfg.get("train"), table, static_cast<int>(cfg.get_int("min_words")),
      cfg.get_int("strict") != 0);

  std::vector<train::Sample> train_samples, val_samples;
  size_t skipped = 0;
  if (!cfg.get("val").empty()) {
    LoadedCorpus val_corpus = load_and_preprocess(
        cfg.get("val"), table, static_cast<int>(cfg.get_int("min_words")),
        cfg.get_int("strict") != 0);
    train_samples = train::make_samples(train_corpus.tweets, tables.provider(),
                                        variant, &skipped);
    val_samples = train::make_samples(val_corpus.tweets, tables.provider(),
                                      variant, &skipped);
  } else {
    corpus::SplitSpec spec;
    spec.seed = static_cast<uint64_t>(cfg.get_int("seed"));
    spec.fractions = {{"train", 0.9}, {"val", 0.1}};
    auto parts = corpus::split(train_corpus.tweets, spec);
    std::vector<corpus::Tweet> tr, va;
    for (size_t i : parts["train"]) tr.push_back(train_corpus.tweets[i]);
    for (size_t i : parts["val"]) va.push_back(train_corpus.tweets[i]);
    train_samples = train::make_samples(tr, tables.provider(), variant, &skipped);
    val_samples = train::make_samples(va, tables.provider(), variant, &skipped);
  }
  if (skipped > 0)
    std::cerr << "train: skipped " << skipped
              << " tweets with out-of-vocabulary emojis\n";

  int emb_dim = tables.bisense ? tables.bisense->dim()
                               : tables.word->dim();
  if (tables.bisense && tables.word && tables.bisense->dim() != tables.word->dim())
    throw std::runtime_error("train: embedding tables disagree on dim");

  std::unique_ptr<models::Model> model;
  checkpoint::Checkpoint meta;
  if (!cfg.get("finetune_from").empty()) {
    checkpoint::Loaded loaded = checkpoint::load(cfg.get("finetune_from"));
    model = std::move(loaded.model);
    meta = loaded.meta;
    if (model->config().variant != variant)
      throw std::runtime_error("train: checkpoint variant mismatch");
  } else {
    models::ModelConfig mc;
    mc.variant = variant;
    mc.emb_dim = emb_dim;
    mc.hidden = static_cast<int>(cfg.get_int("hidden"));
    mc.att_hidden = static_cast<int>(cfg.get_int("att_hidden"));
    mc.seed = static_cast<uint64_t>(cfg.get_int("seed"));
    model = std::make_unique<models::Model>(mc);
    meta.config = mc;
  }

  train::TrainSchedule sched;
  sched.phase = cfg.get("finetune_from").empty()
                    ? train::TrainSchedule::Phase::Pretrain
                    : train::TrainSchedule::Phase::FineTune;
  sched.epochs = static_cast<int>(cfg.get_int("epochs"));
  sched.batch_size = static_cast<int>(cfg.get_int("batch_size"));
  sched.lr = cfg.get_double("lr");
  sched.patience = static_cast<int>(cfg.get_int("patience"));
  sched.seed = static_cast<uint64_t>(cfg.get_int("seed"));

  train::History hist = run_phase(*model, train_samples, val_samples, sched);

  meta.history.epochs_run = static_cast<int>(hist.train_loss.size());
  meta.history.best_epoch = hist.best_epoch;
  meta.history.best_val_loss = hist.best_val_loss;
  if (tables.bisense) meta.bisense_digest = file_digest(cfg.get("emb_bisense"));
  if (tables.word) meta.word_digest = file_digest(cfg.get("emb_word"));

  const std::string out = cfg.get("out");
  checkpoint::save(out, *model, meta);
  std::vector<config::ManifestInput> inputs = {
      manifest_input("train", cfg.get("train"))};
  if (!cfg.get("val").empty()) inputs.push_back(manifest_input("val", cfg.get("val")));
  if (tables.bisense)
    inputs.push_back(manifest_input("emb_bisense", cfg.get("emb_bisense")));
  if (tables.word) inputs.push_back(manifest_input("emb_word", cfg.get("emb_word")));
  config::write_manifest(out, "train", cfg, inputs);

  std::cerr << "train: " << cfg.get("variant") << " epochs="
            << hist.train_loss.size() << " best_epoch=" << hist.best_epoch + 1
            << " best_val_loss=" << hist.best_val_loss << " -> " << out << "\n";
  return 0;
}

void warn_on_digest_mismatch(const checkpoint::Checkpoint& meta,
                             const config::Config& cfg) {
  if (!meta.bisense_digest.empty() && !cfg.get("emb_bisense").empty()) {
    if (file_digest(cfg.get("emb_bisense")) != meta.bisense_digest)
      std::cerr << "warning: --emb-bisense digest differs from the one the "
                   "checkpoint was trained with\n";
  }
  if (!meta.word_digest.empty() && !cfg.get("emb_word").empty()) {
    if (file_digest(cfg.get("emb_word")) != meta.word_digest)
      std::cerr << "warning: --emb-word digest differs from the one the "
                   "checkpoint was trained with\n";
  }
}

int run_eval(const config::Config& cfg) {
  const corpus::EmojiTable table = load_emoji_table(cfg);
  require_file(cfg.get("model"), "model checkpoint");
  checkpoint::Loaded loaded = checkpoint::load(cfg.get("model"));
  Tables tables = load_tables(cfg);
  warn_on_digest_mismatch(loaded.meta, cfg);

  LoadedCorpus test_corpus = load_and_preprocess(
      cfg.get("test"), table, static_cast<int>(cfg.get_int("min_words")),
      cfg.get_int("strict") != 0);
  size_t skipped = 0;
  std::vector<train::Sample> samples =
      train::make_samples(test_corpus.tweets, tables.provider(),
                          loaded.model->config().variant, &skipped);
  if (skipped > 0)
    std::cerr << "eval: skipped " << skipped
              << " tweets with out-of-vocabulary emojis\n";
  if (samples.empty())
    throw std::runtime_error("eval: no labeled tweets in " + cfg.get("test"));

  std::vector<double> scores = train::predict_scores(*loaded.model, samples);
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const train::Sample& s : samples) labels.push_back(s.label);

  train::MetricsReport report = train::metrics(scores, labels);
  std::string json = train::metrics_json(
      report, models::to_string(loaded.model->config().variant),
      cfg.get("dataset_name"));
  std::cout << json << "\n";
  if (!cfg.get("out").empty()) {
    std::ofstream out(cfg.get("out"));
    if (!out) throw std::runtime_error("cannot write report: " + cfg.get("out"));
    out << json << "\n";
    std::vector<config::ManifestInput> inputs = {
        manifest_input("model", cfg.get("model")),
        manifest_input("test", cfg.get("test"))};
    if (!cfg.get("emb_bisense").empty())
      inputs.push_back(manifest_input("emb_bisense", cfg.get("emb_bisense")));
    if (!cfg.get("emb_word").empty())
      inputs.push_back(manifest_input("emb_word", cfg.get("emb_word")));
    config::write_manifest(cfg.get("out"), "eval", cfg, inputs);
  }
  return 0;
}

int run_attend(const config::Config& cfg) {
  const corpus::EmojiTable table = load_emoji_table(cfg);
  require_file(cfg.get("model"), "model checkpoint");
  checkpoint::Loaded loaded = checkpoint::load(cfg.get("model"));
  Tables tables = load_tables(cfg);
  warn_on_digest_mismatch(loaded.meta, cfg);

  corpus::PreprocessResult pre =
      corpus::preprocess({"cli-tweet", cfg.get("tweet")}, table, 1);
  if (!pre.accepted())
    throw std::runtime_error(
        "attend: tweet rejected (" +
        std::string(corpus::to_string(*pre.reason)) +
        "); it needs at least one word and one emoji");

  viz::AttentionTrace trace =
      viz::attention_trace(*loaded.model, tables.provider(), *pre.tweet);
  std::string json = viz::trace_json(trace);
  std::cout << json << "\n";
  if (!cfg.get("out").empty()) {
    std::ofstream out(cfg.get("out"));
    if (!out) throw std::runtime_error("cannot write trace: " + cfg.get("out"));
    out << json << "\n";
    config::write_manifest(cfg.get("out"), "attend", cfg,
                           {manifest_input("model", cfg.get("model"))});
  }
  return 0;
}

int run_project(const config::Config& cfg) {
  require_file(cfg.get("emb"), "embedding file");
  embed::EmbeddingTable table = embed::EmbeddingTable::load(cfg.get("emb"));
  const std::string kind = cfg.get("kind");

  std::vector<std::vector<double>> points;
  std::vector<std::string> labels;
  if (kind == "subtraction") {
    for (auto& [emoji, diff] : viz::sense_subtraction(table)) {
      labels.push_back(emoji);
      points.push_back(diff);
    }
  } else {
    for (int32_t id = 0; id < table.vocab().size(); ++id) {
      const embed::VocabEntry& e = table.vocab().entry(id);
      bool take = (kind == "bisense" &&
                   (e.cls == embed::TokenClass::SensePos ||
                    e.cls == embed::TokenClass::SenseNeg)) ||
                  (kind == "positive" && e.cls == embed::TokenClass::SensePos) ||
                  (kind == "negative" && e.cls == embed::TokenClass::SenseNeg);
      if (take) {
        labels.push_back(e.text);
        points.push_back(table.compose(id));
      }
    }
    if (kind != "bisense" && kind != "positive" && kind != "negative")
      throw std::invalid_argument(
          "project: kind must be bisense|positive|negative|subtraction");
  }
  if (points.empty())
    throw std::runtime_error("project: no sense vectors in " + cfg.get("emb") +
                             " (was it trained with --mode bisense?)");

  viz::TsneConfig tc;
  tc.perplexity = cfg.get_double("perplexity");
  tc.iterations = static_cast<int>(cfg.get_int("iterations"));
  tc.seed = static_cast<uint64_t>(cfg.get_int("seed"));
  viz::TsneResult result = viz::tsne(points, labels, tc, kind);

  const std::string out = cfg.get("out");
  viz::write_projection_svg(out, result.projection);
  std::string sidecar = out;
  size_t dot = sidecar.find_last_of('.');
  if (dot != std::string::npos) sidecar = sidecar.substr(0, dot);
  sidecar += ".json";
  viz::write_projection_json(sidecar, result.projection);
  config::write_manifest(out, "project", cfg,
                         {manifest_input("embedding", cfg.get("emb"))});
  std::cerr << "project: " << points.size() << " vectors -> " << out << " and "
            << sidecar << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bi-sense emoji embeddings and attention LSTM sentiment analysis"};
  app.require_subcommand(1);

  std::string config_file;
  app.add_option("--config", config_file, "flat key=value config file");

  struct Sub {
    CLI::App* app;
    Layering lay;
    int (*run)(const config::Config&);
  };
  std::vector<std::shared_ptr<Sub>> subs;

  auto add_common = [&](CLI::App* sub, Layering& lay) {
    layered_option(sub, lay, "--emoji-table", "emoji_table",
                   data_path("emoji_ranges.tsv"), "emoji codepoint ranges TSV");
    layered_option(sub, lay, "--min-words", "min_words", "1",
                   "minimum word count per tweet");
    layered_option(sub, lay, "--strict", "strict", "0",
                   "reject unknown fields in corpus files");
  };

  {
    auto s = std::make_shared<Sub>();
    s->app = app.add_subcommand("synth", "generate a synthetic labeled corpus");
    layered_option(s->app, s->lay, "--tweets", "tweets", "1000", "tweet count");
    layered_option(s->app, s->lay, "--seed", "seed", "1", "rng seed", true);
    layered_option(s->app, s->lay, "--sarcasm-rate", "sarcasm_rate", "0.3",
                   "emoji/text disagreement rate");
    layered_option(s->app, s->lay, "--ambiguous-rate", "ambiguous_rate", "0.25",
                   "conflicted-text rate");
    layered_option(s->app, s->lay, "--out", "out", "corpus.jsonl", "output JSONL");
    s->run = run_synth;
    subs.push_back(s);
  }
  {
    auto s = std::make_shared<Sub>();
    s->app = app.add_subcommand("label", "weak-label a corpus with the rule scorer");
    add_common(s->app, s->lay);
    layered_option(s->app, s->lay, "--in", "in", "corpus.jsonl", "input JSONL");
    layered_option(s->app, s->lay, "--lexicon", "lexicon",
                   data_path("lexicon.tsv"), "valence lexicon TSV");
    layered_option(s->app, s->lay, "--modifiers", "modifiers",
                   data_path("modifiers.tsv"), "boosters/negators TSV");
    layered_option(s->app, s->lay, "--discard-band", "discard_band", "0.60",
                   "|score| below this is discarded");
    layered_option(s->app, s->lay, "--auto-threshold", "auto_threshold", "0.70",
                   "|score| at or above this is auto-labeled");
    layered_option(s->app, s->lay, "--out", "out", "labeled.jsonl", "output JSONL");
    s->run = run_label;
    subs.push_back(s);
  }
  {
    auto s = std::make_shared<Sub>();
    s->app = app.add_subcommand("embed", "train skip-gram embeddings");
    add_common(s->app, s->lay);
    layered_option(s->app, s->lay, "--in", "in", "labeled.jsonl", "labeled JSONL");
    layered_option(s->app, s->lay, "--mode", "mode", "bisense",
                   "bisense (sense tokens) or word (plain emoji)");
    layered_option(s->app, s->lay, "--dim", "dim", "100", "embedding dimension");
    layered_option(s->app, s->lay, "--window", "window", "5", "context window");
    layered_option(s->app, s->lay, "--negatives", "negatives", "5",
                   "negative samples per pair");
    layered_option(s->app, s->lay, "--epochs", "epochs", "5", "training epochs");
    layered_option(s->app, s->lay, "--lr", "lr", "0.05", "initial learning rate");
    layered_option(s->app, s->lay, "--subsample", "subsample", "1e-4",
                   "frequent-token subsampling threshold");
    layered_option(s->app, s->lay, "--min-count", "min_count", "1",
                   "minimum token count");
    layered_option(s->app, s->lay, "--nmin", "nmin", "3", "min n-gram length");
    layered_option(s->app, s->lay, "--nmax", "nmax", "6", "max n-gram length");
    layered_option(s->app, s->lay, "--buckets", "buckets", "2000000",
                   "subword hash buckets");
    layered_option(s->app, s->lay, "--emoji-threshold", "emoji_threshold", "2000",
                   "min occurrences per sentiment class");
    layered_option(s->app, s->lay, "--seed", "seed", "1", "rng seed", true);
    layered_option(s->app, s->lay, "--threads", "threads", "1",
                   "hogwild workers (1 = deterministic)");
    layered_option(s->app, s->lay, "--export-text", "export_text", "",
                   "also write the text vector format");
    layered_option(s->app, s->lay, "--out", "out", "emb.bin", "output table");
    s->run = run_embed;
    subs.push_back(s);
  }
  {
    auto s = std::make_shared<Sub>();
    s->app = app.add_subcommand("train", "train a classifier variant");
    add_common(s->app, s->lay);
    layered_option(s->app, s->lay, "--train", "train", "train.jsonl",
                   "labeled training JSONL");
    layered_option(s->app, s->lay, "--val", "val", "",
                   "validation JSONL (default: 10% split of --train)");
    layered_option(s->app, s->lay, "--variant", "variant", "MATT_BiE_LSTM",
                   "T_LSTM|E_LSTM|BiE_LSTM|ATT_E_LSTM|WATT_BiE_LSTM|MATT_BiE_LSTM");
    layered_option(s->app, s->lay, "--emb-bisense", "emb_bisense", "",
                   "bi-sense embedding table");
    layered_option(s->app, s->lay, "--emb-word", "emb_word", "",
                   "word-emoji embedding table");
    layered_option(s->app, s->lay, "--hidden", "hidden", "64", "LSTM hidden size");
    layered_option(s->app, s->lay, "--att-hidden", "att_hidden", "0",
                   "attention hidden size (0 = embedding dim)");
    layered_option(s->app, s->lay, "--epochs", "epochs", "10", "max epochs");
    layered_option(s->app, s->lay, "--batch-size", "batch_size", "32", "batch size");
    layered_option(s->app, s->lay, "--lr", "lr", "1e-3", "Adam learning rate");
    layered_option(s->app, s->lay, "--patience", "patience", "3",
                   "early stopping patience");
    layered_option(s->app, s->lay, "--seed", "seed", "1", "rng seed", true);
    layered_option(s->app, s->lay, "--finetune-from", "finetune_from", "",
                   "checkpoint to fine-tune");
    layered_option(s->app, s->lay, "--out", "out", "model.ckpt", "checkpoint path");
    s->run = run_train;
    subs.push_back(s);
  }
  {
    auto s = std::make_shared<Sub>();
    s->app = app.add_subcommand("eval", "evaluate a checkpoint on a test set");
    add_common(s->app, s->lay);
    layered_option(s->app, s->lay, "--model", "model", "model.ckpt", "checkpoint");
    layered_option(s->app, s->lay, "--test", "test", "test.jsonl", "test JSONL");
    layered_option(s->app, s->lay, "--emb-bisense", "emb_bisense", "",
                   "bi-sense embedding table");
    layered_option(s->app, s->lay, "--emb-word", "emb_word", "",
                   "word-emoji embedding table");
    layered_option(s->app, s->lay, "--dataset-name", "dataset_name", "test",
                   "dataset tag in the report");
    layered_option(s->app, s->lay, "--out", "out", "", "report JSON path");
    s->run = run_eval;
    subs.push_back(s);
  }
  {
    auto s = std::make_shared<Sub>();
    s->app = app.add_subcommand("attend", "export attention weights for a tweet");
    add_common(s->app, s->lay);
    layered_option(s->app, s->lay, "--model", "model", "model.ckpt", "checkpoint");
    layered_option(s->app, s->lay, "--tweet", "tweet", "", "tweet text");
    layered_option(s->app, s->lay, "--emb-bisense", "emb_bisense", "",
                   "bi-sense embedding table");
    layered_option(s->app, s->lay, "--emb-word", "emb_word", "",
                   "word-emoji embedding table");
    layered_option(s->app, s->lay, "--out", "out", "", "trace JSON path");
    s->run = run_attend;
    subs.push_back(s);
  }
  {
    auto s = std::make_shared<Sub>();
    s->app = app.add_subcommand("project", "2-D t-SNE of sense embeddings");
    layered_option(s->app, s->lay, "--emb", "emb", "emb.bin", "embedding table");
    layered_option(s->app, s->lay, "--kind", "kind", "bisense",
                   "bisense|positive|negative|subtraction");
    layered_option(s->app, s->lay, "--perplexity", "perplexity", "5", "perplexity");
    layered_option(s->app, s->lay, "--iterations", "iterations", "1000",
                   "gradient iterations");
    layered_option(s->app, s->lay, "--seed", "seed", "1", "rng seed", true);
    layered_option(s->app, s->lay, "--out", "out", "proj.svg",
                   "SVG output (JSON sidecar alongside)");
    s->run = run_project;
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (auto& s : subs) {
    if (!s->app->parsed()) continue;
    try {
      s->lay.resolve(config_file);
      return s->run(s->lay.cfg);
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
