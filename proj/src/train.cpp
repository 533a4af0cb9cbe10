#include "bisense/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace bisense::train {

std::vector<Sample> make_samples(std::span<const corpus::Tweet> tweets,
                                 const models::EmbeddingProvider& tables,
                                 models::ModelVariant v, size_t* skipped) {
  std::vector<Sample> out;
  out.reserve(tweets.size());
  for (const corpus::Tweet& tw : tweets) {
    if (!tw.label) continue;
    Sample s;
    try {
      s.inputs = models::prepare_inputs(tw, tables, v);
    } catch (const embed::MissingSenseError&) {
      if (skipped) ++*skipped;
      continue;
    }
    s.label = *tw.label == corpus::Label::Positive ? 1 : 0;
    out.push_back(std::move(s));
  }
  return out;
}

double evaluate_loss(models::Model& model, std::span<const Sample> set) {
  if (set.empty()) return 0.0;
  std::vector<double> p;
  std::vector<int> y;
  p.reserve(set.size());
  y.reserve(set.size());
  for (const Sample& s : set) {
    p.push_back(model.predict(s.inputs));
    y.push_back(s.label);
  }
  return nn::bce_loss(p, y);
}

std::vector<double> predict_scores(models::Model& model,
                                   std::span<const Sample> set) {
  std::vector<double> out;
  out.reserve(set.size());
  for (const Sample& s : set) out.push_back(model.predict(s.inputs));
  return out;
}

namespace {

struct Snapshot {
  std::vector<nn::Mat> values;
};

Snapshot take_snapshot(std::vector<nn::Tensor*>& params) {
  Snapshot s;
  s.values.reserve(params.size());
  for (nn::Tensor* t : params) s.values.push_back(t->value);
  return s;
}

void restore_snapshot(std::vector<nn::Tensor*>& params, const Snapshot& s) {
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = s.values[i];
}

}  // namespace

History run_phase(models::Model& model, std::span<const Sample> train_set,
                  std::span<const Sample> val_set, const TrainSchedule& schedule) {
  if (train_set.empty()) throw std::invalid_argument("run_phase: empty dataset");

  std::vector<nn::Tensor*> params = model.tensors();
  nn::OptimizerState opt(nn::OptimizerState::Kind::Adam, schedule.lr);
  Rng rng(schedule.seed);

  History hist;
  Snapshot best = take_snapshot(params);
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;

  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    // seeded Fisher-Yates shuffle
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.next_index(i)]);

    double epoch_loss = 0;
    size_t count = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(schedule.batch_size)) {
      size_t end = std::min(order.size(),
                            start + static_cast<size_t>(schedule.batch_size));
      nn::zero_grads(params);
      double batch_loss = 0;
      for (size_t k = start; k < end; ++k) {
        const Sample& s = train_set[order[k]];
        nn::Graph g;
        models::Model::Forward fw = model.forward(g, s.inputs);
        nn::Graph::NodeId loss =
            g.scale_const(g.bce(fw.p, static_cast<double>(s.label)),
                          1.0 / static_cast<double>(end - start));
        g.backward(loss);
        batch_loss += g.scalar(loss);
      }
      nn::clip_gradients(params, schedule.clip_norm);
      opt.step(params);
      epoch_loss += batch_loss * static_cast<double>(end - start);
      count += end - start;
    }
    hist.train_loss.push_back(epoch_loss / static_cast<double>(count));

    double val = val_set.empty() ? hist.train_loss.back()
                                 : evaluate_loss(model, val_set);
    hist.val_loss.push_back(val);
    if (val < best_val) {
      best_val = val;
      best = take_snapshot(params);
      hist.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= schedule.patience) break;
  }

  restore_snapshot(params, best);
  hist.best_val_loss = best_val;
  return hist;
}

corpus::Label classify(double p, double threshold) {
  return p >= threshold ? corpus::Label::Positive : corpus::Label::Negative;
}

namespace {

// threshold-sweep ROC area; tied scores contribute trapezoids, which equals
// the pair-counting formulation with ties at 0.5
std::optional<double> roc_area_sweep(std::span<const double> scores,
                                     std::span<const int> labels) {
  int64_t pos = 0, neg = 0;
  for (int y : labels) (y ? pos : neg)++;
  if (pos == 0 || neg == 0) return std::nullopt;

  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return scores[a] > scores[b];
  });

  double area = 0;
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    int64_t dtp = 0, dfp = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? dtp : dfp)++;
      ++j;
    }
    area += static_cast<double>(dfp) *
            (static_cast<double>(tp) + static_cast<double>(dtp) / 2.0);
    tp += dtp;
    fp += dfp;
    i = j;
  }
  return area / (static_cast<double>(pos) * static_cast<double>(neg));
}

double safe_div(double a, double b) { return b > 0 ? a / b : 0.0; }

}  // namespace

MetricsReport metrics(std::span<const double> scores, std::span<const int> labels,
                      double threshold) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("metrics: length mismatch or empty");

  MetricsReport r;
  r.n = static_cast<int64_t>(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    bool pred = classify(scores[i], threshold) == corpus::Label::Positive;
    bool truth = labels[i] != 0;
    if (pred && truth) ++r.tp;
    else if (pred && !truth) ++r.fp;
    else if (!pred && truth) ++r.fn;
    else ++r.tn;
  }
  r.precision = safe_div(static_cast<double>(r.tp), static_cast<double>(r.tp + r.fp));
  r.recall = safe_div(static_cast<double>(r.tp), static_cast<double>(r.tp + r.fn));
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.n);
  r.f1 = safe_div(2.0 * r.precision * r.recall, r.precision + r.recall);

  double neg_precision = safe_div(static_cast<double>(r.tn), static_cast<double>(r.tn + r.fn));
  double neg_recall = safe_div(static_cast<double>(r.tn), static_cast<double>(r.tn + r.fp));
  double neg_f1 = safe_div(2.0 * neg_precision * neg_recall, neg_precision + neg_recall);
  r.macro_precision = (r.precision + neg_precision) / 2.0;
  r.macro_recall = (r.recall + neg_recall) / 2.0;
  r.macro_f1 = (r.f1 + neg_f1) / 2.0;

  r.roc_area = roc_area_sweep(scores, labels);
  return r;
}

std::string metrics_json(const MetricsReport& r, const std::string& model,
                         const std::string& dataset) {
  nlohmann::json j;
  j["model"] = model;
  j["dataset"] = dataset;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  if (r.roc_area)
    j["roc_area"] = *r.roc_area;
  else
    j["roc_area"] = nullptr;
  j["accuracy"] = r.accuracy;
  j["f1"] = r.f1;
  j["n"] = r.n;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["tn"] = r.tn;
  j["fn"] = r.fn;
  j["macro_precision"] = r.macro_precision;
  j["macro_recall"] = r.macro_recall;
  j["macro_f1"] = r.macro_f1;
  return j.dump();
}

}  // namespace bisense::train
