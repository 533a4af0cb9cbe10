#include "bisense/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "bisense/util.hpp"

namespace bisense::viz {

AttentionTrace attention_trace(models::Model& model,
                               const models::EmbeddingProvider& tables,
                               const corpus::Tweet& tweet) {
  if (!models::is_attention_variant(model.config().variant))
    throw std::invalid_argument("attention_trace: " +
                                models::to_string(model.config().variant) +
                                " is not an attention variant");
  models::TweetInputs in =
      models::prepare_inputs(tweet, tables, model.config().variant);
  nn::Graph g;
  models::Model::Forward fw = model.forward(g, in);

  AttentionTrace trace;
  trace.tweet_id = tweet.id;
  trace.variant = model.config().variant;
  for (const models::InputItem& item : in.items)
    if (item.kind == models::InputItem::Kind::Word)
      trace.words.push_back(item.surface);
  trace.word_weights = fw.word_attention;
  trace.sense_weights = fw.sense_attention;
  return trace;
}

std::string trace_json(const AttentionTrace& trace) {
  nlohmann::json j;
  j["tweet_id"] = trace.tweet_id;
  j["model"] = models::to_string(trace.variant);
  j["words"] = trace.words;
  if (!trace.word_weights.empty()) j["word_weights"] = trace.word_weights;
  if (!trace.sense_weights.empty()) {
    nlohmann::json sw = nlohmann::json::array();
    for (const auto& [pos, neg] : trace.sense_weights)
      sw.push_back({{"pos", pos}, {"neg", neg}});
    j["sense_weights"] = sw;
  }
  return j.dump();
}

std::vector<std::pair<std::string, std::vector<double>>> sense_subtraction(
    const embed::EmbeddingTable& table) {
  std::vector<std::pair<std::string, std::vector<double>>> out;
  const embed::Vocab& vocab = table.vocab();
  for (int32_t id = 0; id < vocab.size(); ++id) {
    const embed::VocabEntry& e = vocab.entry(id);
    if (e.cls != embed::TokenClass::SensePos) continue;
    std::string emoji =
        e.text.substr(0, e.text.size() - std::strlen(embed::kSensePosSuffix));
    auto [pos, neg] = table.lookup_bisense(emoji);
    std::vector<double> diff(pos.size());
    for (size_t d = 0; d < pos.size(); ++d) diff[d] = pos[d] - neg[d];
    out.emplace_back(std::move(emoji), std::move(diff));
  }
  return out;
}

namespace {

std::vector<std::vector<double>> squared_distances(
    std::span<const std::vector<double>> points) {
  const size_t n = points.size();
  std::vector<std::vector<double>> d2(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      double s = 0;
      for (size_t k = 0; k < points[i].size(); ++k) {
        double d = points[i][k] - points[j][k];
        s += d * d;
      }
      d2[i][j] = d2[j][i] = s;
    }
  }
  return d2;
}

}  // namespace

Affinities gaussian_affinities(std::span<const std::vector<double>> points,
                               double perplexity, double tol) {
  const size_t n = points.size();
  if (n < 2) throw std::invalid_argument("gaussian_affinities: need >= 2 points");
  std::vector<std::vector<double>> d2 = squared_distances(points);
  const double target_entropy = std::log(perplexity);

  Affinities aff;
  aff.conditional.assign(n, std::vector<double>(n, 0.0));
  aff.entropy.assign(n, 0.0);

  for (size_t i = 0; i < n; ++i) {
    // binary search the precision beta = 1/(2 sigma^2)
    double beta = 1.0, beta_lo = -1e30, beta_hi = 1e30;
    std::vector<double>& row = aff.conditional[i];
    double entropy = 0;
    for (int iter = 0; iter < 200; ++iter) {
      double sum = 0;
      for (size_t j = 0; j < n; ++j) {
        row[j] = j == i ? 0.0 : std::exp(-beta * d2[i][j]);
        sum += row[j];
      }
      // H = log(sum) + beta * <d2>
      double weighted = 0;
      for (size_t j = 0; j < n; ++j) weighted += row[j] * d2[i][j];
      entropy = std::log(sum) + beta * weighted / sum;
      for (size_t j = 0; j < n; ++j) row[j] /= sum;
      double diff = entropy - target_entropy;
      if (std::abs(diff) < tol) break;
      if (diff > 0) {
        beta_lo = beta;
        beta = beta_hi > 1e29 ? beta * 2 : (beta + beta_hi) / 2;
      } else {
        beta_hi = beta;
        beta = beta_lo < -1e29 ? beta / 2 : (beta + beta_lo) / 2;
      }
    }
    aff.entropy[i] = entropy;
  }

  aff.joint.assign(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      aff.joint[i][j] =
          std::max((aff.conditional[i][j] + aff.conditional[j][i]) / (2.0 * n),
                   1e-12);
  return aff;
}

TsneResult tsne(std::span<const std::vector<double>> points,
                std::span<const std::string> labels, const TsneConfig& config,
                const std::string& kind) {
  const size_t n = points.size();
  if (labels.size() != n) throw std::invalid_argument("tsne: labels mismatch");
  if (static_cast<double>(n) < 3.0 * config.perplexity)
    throw std::invalid_argument("tsne: need n >= 3 * perplexity");

  Affinities aff = gaussian_affinities(points, config.perplexity);

  // early exaggeration
  std::vector<std::vector<double>> p = aff.joint;
  for (auto& row : p)
    for (double& x : row) x *= 12.0;

  Rng rng(config.seed);
  std::vector<std::array<double, 2>> y(n), dy(n, {0, 0}), vel(n, {0, 0});
  std::vector<std::array<double, 2>> gains(n, {1.0, 1.0});
  for (auto& pt : y) {
    pt[0] = rng.normal() * 1e-4;
    pt[1] = rng.normal() * 1e-4;
  }

  std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
  TsneResult result;

  for (int iter = 0; iter < config.iterations; ++iter) {
    if (iter == config.exaggeration_iters)
      for (auto& row : p)
        for (double& x : row) x /= 12.0;

    // student-t affinities in the embedding
    double qsum = 0;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        double dx = y[i][0] - y[j][0];
        double dz = y[i][1] - y[j][1];
        double t = 1.0 / (1.0 + dx * dx + dz * dz);
        q[i][j] = q[j][i] = t;
        qsum += 2.0 * t;
      }
      q[i][i] = 0;
    }

    // gradient in the bhtsne convention (eta = 200 assumes no leading 4)
    for (size_t i = 0; i < n; ++i) {
      dy[i] = {0, 0};
      for (size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        double t = q[i][j];
        double qij = std::max(t / qsum, 1e-12);
        double mult = (p[i][j] - qij) * t;
        dy[i][0] += mult * (y[i][0] - y[j][0]);
        dy[i][1] += mult * (y[i][1] - y[j][1]);
      }
    }

    double momentum = iter < config.exaggeration_iters ? 0.5 : 0.8;
    for (size_t i = 0; i < n; ++i) {
      for (int d = 0; d < 2; ++d) {
        gains[i][d] = (dy[i][d] > 0) != (vel[i][d] > 0) ? gains[i][d] + 0.2
                                                        : gains[i][d] * 0.8;
        gains[i][d] = std::max(gains[i][d], 0.01);
        vel[i][d] = momentum * vel[i][d] -
                    config.learning_rate * gains[i][d] * dy[i][d];
        y[i][d] += vel[i][d];
      }
    }
    // recenter
    double mx = 0, mz = 0;
    for (const auto& pt : y) {
      mx += pt[0];
      mz += pt[1];
    }
    mx /= static_cast<double>(n);
    mz /= static_cast<double>(n);
    for (auto& pt : y) {
      pt[0] -= mx;
      pt[1] -= mz;
    }

    if (iter % 10 == 9 || iter + 1 == config.iterations) {
      double kl = 0;
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          double qij = std::max(q[i][j] / qsum, 1e-12);
          kl += p[i][j] * std::log(p[i][j] / qij);
        }
      result.kl_history.push_back(kl);
    }
  }

  result.projection.labels.assign(labels.begin(), labels.end());
  result.projection.points = std::move(y);
  result.projection.kind = kind;
  return result;
}

void write_projection_svg(const std::string& path, const Projection2D& proj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write svg: " + path);
  double lo_x = 0, hi_x = 1, lo_y = 0, hi_y = 1;
  if (!proj.points.empty()) {
    lo_x = hi_x = proj.points[0][0];
    lo_y = hi_y = proj.points[0][1];
    for (const auto& p : proj.points) {
      lo_x = std::min(lo_x, p[0]);
      hi_x = std::max(hi_x, p[0]);
      lo_y = std::min(lo_y, p[1]);
      hi_y = std::max(hi_y, p[1]);
    }
  }
  const double w = 800, h = 800, margin = 40;
  auto sx = [&](double x) {
    return margin + (w - 2 * margin) * (hi_x > lo_x ? (x - lo_x) / (hi_x - lo_x) : 0.5);
  };
  auto sy = [&](double yv) {
    return margin + (h - 2 * margin) * (hi_y > lo_y ? (hi_y - yv) / (hi_y - lo_y) : 0.5);
  };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (size_t i = 0; i < proj.points.size(); ++i) {
    const std::string& label = proj.labels[i];
    std::string color = "#888888";
    if (label.ends_with("_pos")) color = "#d62728";
    else if (label.ends_with("_neg")) color = "#2ca02c";
    else if (proj.kind == "subtraction") color = "#e6b422";
    double x = sx(proj.points[i][0]);
    double yv = sy(proj.points[i][1]);
    out << "<circle cx=\"" << x << "\" cy=\"" << yv
        << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << x + 6 << "\" y=\"" << yv + 4
        << "\" font-size=\"11\">" << label << "</text>\n";
  }
  out << "</svg>\n";
}

void write_projection_json(const std::string& path, const Projection2D& proj) {
  nlohmann::json j;
  j["kind"] = proj.kind;
  nlohmann::json pts = nlohmann::json::array();
  for (size_t i = 0; i < proj.points.size(); ++i)
    pts.push_back({{"label", proj.labels[i]},
                   {"x", proj.points[i][0]},
                   {"y", proj.points[i][1]}});
  j["points"] = pts;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write projection json: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace bisense::viz
