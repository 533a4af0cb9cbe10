#include "bisense/models.hpp"

#include <stdexcept>

namespace bisense::models {

using nn::Graph;

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::T_LSTM: return "T_LSTM";
    case ModelVariant::E_LSTM: return "E_LSTM";
    case ModelVariant::BiE_LSTM: return "BiE_LSTM";
    case ModelVariant::ATT_E_LSTM: return "ATT_E_LSTM";
    case ModelVariant::WATT_BiE_LSTM: return "WATT_BiE_LSTM";
    case ModelVariant::MATT_BiE_LSTM: return "MATT_BiE_LSTM";
  }
  return "?";
}

ModelVariant variant_from_string(const std::string& s) {
  if (s == "T_LSTM") return ModelVariant::T_LSTM;
  if (s == "E_LSTM") return ModelVariant::E_LSTM;
  if (s == "BiE_LSTM") return ModelVariant::BiE_LSTM;
  if (s == "ATT_E_LSTM") return ModelVariant::ATT_E_LSTM;
  if (s == "WATT_BiE_LSTM") return ModelVariant::WATT_BiE_LSTM;
  if (s == "MATT_BiE_LSTM") return ModelVariant::MATT_BiE_LSTM;
  throw std::invalid_argument("unknown model variant: " + s);
}

bool is_attention_variant(ModelVariant v) {
  return v == ModelVariant::ATT_E_LSTM || v == ModelVariant::WATT_BiE_LSTM ||
         v == ModelVariant::MATT_BiE_LSTM;
}

bool needs_bisense_table(ModelVariant v) {
  return v == ModelVariant::BiE_LSTM || v == ModelVariant::WATT_BiE_LSTM ||
         v == ModelVariant::MATT_BiE_LSTM;
}

bool needs_word_table(ModelVariant v) {
  return v == ModelVariant::E_LSTM || v == ModelVariant::ATT_E_LSTM;
}

namespace {
nn::Vec to_vec(const std::vector<double>& v) {
  nn::Vec out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}
}  // namespace

TweetInputs prepare_inputs(const corpus::Tweet& tweet,
                           const EmbeddingProvider& tables, ModelVariant v) {
  const embed::EmbeddingTable* word_table = nullptr;
  if (needs_bisense_table(v)) {
    word_table = tables.bisense;
  } else if (needs_word_table(v)) {
    word_table = tables.word;
  } else {
    word_table = tables.word ? tables.word : tables.bisense;
  }
  if (!word_table)
    throw std::invalid_argument("prepare_inputs: required embedding table missing for " +
                                to_string(v));

  TweetInputs in;
  in.id = tweet.id;
  for (const corpus::Token& t : tweet.tokens) {
    InputItem item;
    item.surface = t.surface;
    if (t.kind == corpus::TokenKind::Word) {
      item.kind = InputItem::Kind::Word;
      item.word_vec = to_vec(word_table->lookup_word(t.surface));
      ++in.n_words;
    } else {
      item.kind = InputItem::Kind::Emoji;
      if (needs_bisense_table(v)) {
        auto [pos, neg] = tables.bisense->lookup_bisense(t.surface);
        item.sense_pos = to_vec(pos);
        item.sense_neg = to_vec(neg);
      } else if (needs_word_table(v)) {
        item.emoji_vec = to_vec(tables.word->lookup_emoji(t.surface));
      }
      ++in.n_emojis;
    }
    in.items.push_back(std::move(item));
  }
  return in;
}

AttentionResult word_guide_attention(nn::Graph& g,
                                     std::span<const Graph::NodeId> senses,
                                     Graph::NodeId guide,
                                     const AttentionScorer& scorer) {
  if (senses.empty())
    throw std::invalid_argument("word_guide_attention: no sense vectors");
  std::vector<Graph::NodeId> logits;
  logits.reserve(senses.size());
  for (Graph::NodeId e : senses) logits.push_back(scorer(g, e, guide));
  Graph::NodeId alpha = g.softmax(g.stack(logits));
  Graph::NodeId combined = -1;
  for (size_t i = 0; i < senses.size(); ++i) {
    Graph::NodeId term = g.scale(senses[i], g.pick(alpha, static_cast<Eigen::Index>(i)));
    combined = i == 0 ? term : g.add(combined, term);
  }
  return {alpha, combined};
}

Graph::NodeId word_attention(nn::Graph& g,
                             std::span<const Graph::NodeId> words,
                             Graph::NodeId v, const AttentionScorer& scorer) {
  if (words.empty()) throw std::invalid_argument("word_attention: empty sequence");
  std::vector<Graph::NodeId> logits;
  logits.reserve(words.size());
  for (Graph::NodeId w : words) logits.push_back(scorer(g, w, v));
  return g.softmax(g.stack(logits));
}

Model::Model(const ModelConfig& cfg) : cfg_(cfg) {
  if (cfg_.att_hidden <= 0) cfg_.att_hidden = cfg_.emb_dim;
  Rng rng(cfg_.seed);
  const int d = cfg_.emb_dim;
  const int h = cfg_.hidden;
  proj_ = nn::Dense("proj", d, d, rng);
  const bool wide = is_attention_variant(cfg_.variant);
  lstm_ = nn::LstmParams("lstm", wide ? 2 * d : d, h, rng);
  out_ = nn::Dense("out", h, 1, rng);
  switch (cfg_.variant) {
    case ModelVariant::WATT_BiE_LSTM:
      att_sense_.emplace("att_sense", 2 * d, cfg_.att_hidden, rng);
      break;
    case ModelVariant::MATT_BiE_LSTM:
      encoder_.emplace("encoder", d, h, rng);
      att_sense_.emplace("att_sense", d + h, cfg_.att_hidden, rng);
      att_word_.emplace("att_word", 2 * d, cfg_.att_hidden, rng);
      break;
    case ModelVariant::ATT_E_LSTM:
      att_word_.emplace("att_word", 2 * d, cfg_.att_hidden, rng);
      break;
    default:
      break;
  }
}

std::vector<nn::Tensor*> Model::tensors() {
  std::vector<nn::Tensor*> out;
  auto extend = [&](std::vector<nn::Tensor*> v) {
    out.insert(out.end(), v.begin(), v.end());
  };
  extend(proj_.tensors());
  extend(lstm_.tensors());
  if (encoder_) extend(encoder_->tensors());
  if (att_sense_) extend(att_sense_->tensors());
  if (att_word_) extend(att_word_->tensors());
  extend(out_.tensors());
  return out;
}

Graph::NodeId Model::project(nn::Graph& g, const nn::Vec& raw) {
  return proj_(g, g.input(raw));
}

AttentionScorer Model::sense_scorer() {
  return [this](nn::Graph& g, Graph::NodeId a, Graph::NodeId b) {
    return att_sense_->score(g, a, b);
  };
}

AttentionScorer Model::word_scorer() {
  return [this](nn::Graph& g, Graph::NodeId a, Graph::NodeId b) {
    return att_word_->score(g, a, b);
  };
}

std::vector<Graph::NodeId> Model::build_sequence(nn::Graph& g,
                                                 const TweetInputs& in,
                                                 Forward* fw) {
  std::vector<Graph::NodeId> seq;
  const ModelVariant v = cfg_.variant;

  // projected word stream and per-occurrence emoji vectors
  std::vector<Graph::NodeId> words;
  std::vector<std::pair<Graph::NodeId, Graph::NodeId>> senses;
  std::vector<Graph::NodeId> plain;
  for (const InputItem& item : in.items) {
    if (item.kind == InputItem::Kind::Word) {
      words.push_back(project(g, item.word_vec));
    } else if (needs_bisense_table(v)) {
      senses.emplace_back(project(g, item.sense_pos), project(g, item.sense_neg));
    } else if (needs_word_table(v)) {
      plain.push_back(project(g, item.emoji_vec));
    }
  }

  switch (v) {
    case ModelVariant::T_LSTM: {
      seq = words;
      break;
    }
    case ModelVariant::E_LSTM: {
      size_t wi = 0, ei = 0;
      for (const InputItem& item : in.items)
        seq.push_back(item.kind == InputItem::Kind::Word ? words[wi++] : plain[ei++]);
      break;
    }
    case ModelVariant::BiE_LSTM: {
      // each emoji contributes its two sense vectors as consecutive tokens
      size_t wi = 0, ei = 0;
      for (const InputItem& item : in.items) {
        if (item.kind == InputItem::Kind::Word) {
          seq.push_back(words[wi++]);
        } else {
          seq.push_back(senses[ei].first);
          seq.push_back(senses[ei].second);
          ++ei;
        }
      }
      break;
    }
    case ModelVariant::WATT_BiE_LSTM: {
      if (senses.empty())
        throw std::invalid_argument("WATT_BiE_LSTM: tweet has no emoji");
      std::vector<std::array<double, 2>> trace(words.size(), {0.0, 0.0});
      for (size_t t = 0; t < words.size(); ++t) {
        std::vector<Graph::NodeId> vts;
        for (auto& [pos, neg] : senses) {
          std::array<Graph::NodeId, 2> pair = {pos, neg};
          AttentionResult r = word_guide_attention(g, pair, words[t], sense_scorer());
          vts.push_back(r.combined);
          trace[t][0] += g.value(r.weights)(0, 0);
          trace[t][1] += g.value(r.weights)(1, 0);
        }
        Graph::NodeId v_t = vts.size() == 1 ? vts[0] : g.mean(vts);
        trace[t][0] /= static_cast<double>(senses.size());
        trace[t][1] /= static_cast<double>(senses.size());
        seq.push_back(g.concat(words[t], v_t));
      }
      if (fw) fw->sense_attention = std::move(trace);
      break;
    }
    case ModelVariant::MATT_BiE_LSTM:
    case ModelVariant::ATT_E_LSTM: {
      Graph::NodeId senti = -1;
      if (v == ModelVariant::MATT_BiE_LSTM) {
        if (senses.empty())
          throw std::invalid_argument("MATT_BiE_LSTM: tweet has no emoji");
        if (words.empty())
          throw std::invalid_argument("MATT_BiE_LSTM: tweet has no words");
        // tweet-level sense selection guided by the text encoding
        nn::LstmState st = nn::lstm_zero_state(g, cfg_.hidden);
        for (Graph::NodeId w : words) st = nn::lstm_cell(g, w, st, *encoder_);
        std::vector<Graph::NodeId> vps;
        std::array<double, 2> strace = {0.0, 0.0};
        for (auto& [pos, neg] : senses) {
          std::array<Graph::NodeId, 2> pair = {pos, neg};
          AttentionResult r = word_guide_attention(g, pair, st.h, sense_scorer());
          vps.push_back(r.combined);
          strace[0] += g.value(r.weights)(0, 0);
          strace[1] += g.value(r.weights)(1, 0);
        }
        senti = vps.size() == 1 ? vps[0] : g.mean(vps);
        strace[0] /= static_cast<double>(senses.size());
        strace[1] /= static_cast<double>(senses.size());
        if (fw) fw->sense_attention = {strace};
      } else {
        if (plain.empty())
          throw std::invalid_argument("ATT_E_LSTM: tweet has no emoji");
        senti = plain.size() == 1 ? plain[0] : g.mean(plain);
      }
      if (words.empty())
        throw std::invalid_argument(to_string(v) + ": tweet has no words");
      Graph::NodeId alpha = word_attention(g, words, senti, word_scorer());
      if (fw) {
        const nn::Mat& a = g.value(alpha);
        fw->word_attention.assign(a.data(), a.data() + a.rows());
      }
      for (size_t t = 0; t < words.size(); ++t) {
        Graph::NodeId scaled =
            g.scale(senti, g.pick(alpha, static_cast<Eigen::Index>(t)));
        seq.push_back(g.concat(words[t], scaled));
      }
      break;
    }
  }
  return seq;
}

Model::Forward Model::forward(nn::Graph& g, const TweetInputs& in) {
  Forward fw;
  std::vector<Graph::NodeId> seq = build_sequence(g, in, &fw);
  if (seq.empty())
    throw std::invalid_argument(to_string(cfg_.variant) +
                                ": empty input sequence for tweet " + in.id);
  nn::LstmState st = nn::lstm_zero_state(g, cfg_.hidden);
  for (Graph::NodeId x : seq) st = nn::lstm_cell(g, x, st, lstm_);
  fw.p = g.sigmoid(out_(g, st.h));
  return fw;
}

double Model::predict(const TweetInputs& in) {
  nn::Graph g;
  Forward fw = forward(g, in);
  return g.scalar(fw.p);
}

}  // namespace bisense::models
