#include "bisense/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace bisense::nn {

void xavier_init(Tensor& t, Rng& rng) {
  const double fan_in = static_cast<double>(t.value.cols());
  const double fan_out = static_cast<double>(t.value.rows());
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (Eigen::Index j = 0; j < t.value.cols(); ++j)
    for (Eigen::Index i = 0; i < t.value.rows(); ++i)
      t.value(i, j) = rng.uniform(-limit, limit);
}

Graph::NodeId Graph::push(Node n) {
  n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

const Graph::Node& Graph::at(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
    throw std::logic_error("graph: invalid node id");
  return nodes_[id];
}

Graph::NodeId Graph::input(const Mat& value) {
  Node n;
  n.op = Op::Input;
  n.value = value;
  return push(std::move(n));
}

Graph::NodeId Graph::input_scalar(double value) {
  Mat m(1, 1);
  m(0, 0) = value;
  return input(m);
}

Graph::NodeId Graph::param(Tensor& t) {
  for (const auto& [tensor, id] : param_nodes_)
    if (tensor == &t) return id;
  Node n;
  n.op = Op::Param;
  n.value = t.value;
  n.tensor = &t;
  NodeId id = push(std::move(n));
  param_nodes_.emplace_back(&t, id);
  return id;
}

Graph::NodeId Graph::matmul(NodeId a, NodeId b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.value.cols() != nb.value.rows())
    throw std::invalid_argument("matmul: shape mismatch");
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  n.value = na.value * nb.value;
  return push(std::move(n));
}

Graph::NodeId Graph::add(NodeId a, NodeId b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
    throw std::invalid_argument("add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.value = na.value + nb.value;
  return push(std::move(n));
}

Graph::NodeId Graph::cmul(NodeId a, NodeId b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols())
    throw std::invalid_argument("cmul: shape mismatch");
  Node n;
  n.op = Op::CMul;
  n.a = a;
  n.b = b;
  n.value = na.value.cwiseProduct(nb.value);
  return push(std::move(n));
}

Graph::NodeId Graph::sigmoid(NodeId a) {
  Node n;
  n.op = Op::Sigmoid;
  n.a = a;
  n.value = at(a).value.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  return push(std::move(n));
}

Graph::NodeId Graph::tanh(NodeId a) {
  Node n;
  n.op = Op::Tanh;
  n.a = a;
  n.value = at(a).value.array().tanh().matrix();
  return push(std::move(n));
}

Graph::NodeId Graph::relu(NodeId a) {
  Node n;
  n.op = Op::Relu;
  n.a = a;
  n.value = at(a).value.cwiseMax(0.0);
  return push(std::move(n));
}

Vec softmax(const Vec& logits) {
  Vec out = logits;
  double mx = logits.maxCoeff();
  out = (out.array() - mx).exp().matrix();
  out /= out.sum();
  return out;
}

Graph::NodeId Graph::softmax(NodeId a) {
  const Node& na = at(a);
  if (na.value.cols() != 1)
    throw std::invalid_argument("softmax: expects a column vector");
  Node n;
  n.op = Op::Softmax;
  n.a = a;
  n.value = bisense::nn::softmax(na.value.col(0));
  return push(std::move(n));
}

Graph::NodeId Graph::concat(NodeId a, NodeId b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.value.cols() != 1 || nb.value.cols() != 1)
    throw std::invalid_argument("concat: expects column vectors");
  Node n;
  n.op = Op::Concat;
  n.a = a;
  n.b = b;
  n.value = Mat(na.value.rows() + nb.value.rows(), 1);
  n.value << na.value, nb.value;
  n.aux = na.value.rows();
  return push(std::move(n));
}

Graph::NodeId Graph::scale(NodeId vec, NodeId scalar) {
  const Node& nv = at(vec);
  const Node& ns = at(scalar);
  if (ns.value.size() != 1) throw std::invalid_argument("scale: scalar must be 1x1");
  Node n;
  n.op = Op::Scale;
  n.a = vec;
  n.b = scalar;
  n.value = nv.value * ns.value(0, 0);
  return push(std::move(n));
}

Graph::NodeId Graph::scale_const(NodeId a, double c) {
  Node n;
  n.op = Op::ScaleConst;
  n.a = a;
  n.c = c;
  n.value = at(a).value * c;
  return push(std::move(n));
}

Graph::NodeId Graph::stack(std::span<const NodeId> scalars) {
  if (scalars.empty()) throw std::invalid_argument("stack: empty");
  Node n;
  n.op = Op::Stack;
  n.value = Mat(static_cast<Eigen::Index>(scalars.size()), 1);
  for (size_t i = 0; i < scalars.size(); ++i) {
    const Node& s = at(scalars[i]);
    if (s.value.size() != 1) throw std::invalid_argument("stack: non-scalar node");
    n.value(static_cast<Eigen::Index>(i), 0) = s.value(0, 0);
    n.list.push_back(scalars[i]);
  }
  return push(std::move(n));
}

Graph::NodeId Graph::pick(NodeId vec, Eigen::Index i) {
  const Node& nv = at(vec);
  if (nv.value.cols() != 1 || i < 0 || i >= nv.value.rows())
    throw std::invalid_argument("pick: index out of range");
  Node n;
  n.op = Op::Pick;
  n.a = vec;
  n.aux = i;
  n.value = Mat(1, 1);
  n.value(0, 0) = nv.value(i, 0);
  return push(std::move(n));
}

Graph::NodeId Graph::mean(std::span<const NodeId> ids) {
  if (ids.empty()) throw std::invalid_argument("mean: empty");
  Node n;
  n.op = Op::Mean;
  n.value = at(ids[0]).value;
  n.list.assign(ids.begin(), ids.end());
  for (size_t i = 1; i < ids.size(); ++i) n.value += at(ids[i]).value;
  n.value /= static_cast<double>(ids.size());
  return push(std::move(n));
}

Graph::NodeId Graph::bce(NodeId p, double y) {
  const Node& np = at(p);
  if (np.value.size() != 1) throw std::invalid_argument("bce: p must be scalar");
  double pv = np.value(0, 0);
  double pc = std::min(1.0 - kBceEps, std::max(kBceEps, pv));
  Node n;
  n.op = Op::Bce;
  n.a = p;
  n.c = y;
  n.clamped = pc != pv;
  n.value = Mat(1, 1);
  n.value(0, 0) = -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
  return push(std::move(n));
}

const Mat& Graph::value(NodeId id) const { return at(id).value; }

double Graph::scalar(NodeId id) const {
  const Node& n = at(id);
  if (n.value.size() != 1) throw std::logic_error("scalar: node is not 1x1");
  return n.value(0, 0);
}

void Graph::backward(NodeId loss) {
  if (nodes_.empty()) throw std::logic_error("backward: no forward pass recorded");
  if (loss < 0 || loss >= static_cast<NodeId>(nodes_.size()))
    throw std::logic_error("backward: invalid loss node");
  if (nodes_[loss].value.size() != 1)
    throw std::logic_error("backward: loss must be scalar");

  for (Node& n : nodes_) n.grad.setZero();
  nodes_[loss].grad(0, 0) = 1.0;

  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.isZero(0.0)) continue;
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::Input:
        break;
      case Op::Param:
        n.tensor->grad += g;
        break;
      case Op::MatMul:
        nodes_[n.a].grad += g * nodes_[n.b].value.transpose();
        nodes_[n.b].grad += nodes_[n.a].value.transpose() * g;
        break;
      case Op::Add:
        nodes_[n.a].grad += g;
        nodes_[n.b].grad += g;
        break;
      case Op::CMul:
        nodes_[n.a].grad += g.cwiseProduct(nodes_[n.b].value);
        nodes_[n.b].grad += g.cwiseProduct(nodes_[n.a].value);
        break;
      case Op::Sigmoid:
        nodes_[n.a].grad +=
            g.cwiseProduct(n.value.cwiseProduct(Mat::Ones(n.value.rows(), n.value.cols()) - n.value));
        break;
      case Op::Tanh:
        nodes_[n.a].grad += g.cwiseProduct(
            (Mat::Ones(n.value.rows(), n.value.cols()) - n.value.cwiseProduct(n.value)));
        break;
      case Op::Relu:
        nodes_[n.a].grad += g.cwiseProduct(
            n.value.unaryExpr([](double y) { return y > 0.0 ? 1.0 : 0.0; }));
        break;
      case Op::Softmax: {
        const Vec y = n.value.col(0);
        const Vec gy = g.col(0);
        double dot = y.dot(gy);
        nodes_[n.a].grad.col(0) += y.cwiseProduct(gy.array().matrix() - Vec::Constant(y.size(), dot));
        break;
      }
      case Op::Concat:
        nodes_[n.a].grad += g.topRows(n.aux);
        nodes_[n.b].grad += g.bottomRows(g.rows() - n.aux);
        break;
      case Op::Scale:
        nodes_[n.a].grad += g * nodes_[n.b].value(0, 0);
        nodes_[n.b].grad(0, 0) += (g.cwiseProduct(nodes_[n.a].value)).sum();
        break;
      case Op::ScaleConst:
        nodes_[n.a].grad += g * n.c;
        break;
      case Op::Stack:
        for (size_t i = 0; i < n.list.size(); ++i)
          nodes_[n.list[i]].grad(0, 0) += g(static_cast<Eigen::Index>(i), 0);
        break;
      case Op::Pick:
        nodes_[n.a].grad(n.aux, 0) += g(0, 0);
        break;
      case Op::Mean:
        for (NodeId child : n.list)
          nodes_[child].grad += g / static_cast<double>(n.list.size());
        break;
      case Op::Bce: {
        if (!n.clamped) {
          double p = nodes_[n.a].value(0, 0);
          nodes_[n.a].grad(0, 0) += g(0, 0) * (p - n.c) / (p * (1.0 - p));
        }
        break;
      }
    }
  }
}

void Graph::clear() {
  nodes_.clear();
  param_nodes_.clear();
}

double bce_loss(std::span<const double> p, std::span<const int> y) {
  if (p.size() != y.size() || p.empty())
    throw std::invalid_argument("bce_loss: length mismatch");
  double sum = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    double pc = std::min(1.0 - kBceEps, std::max(kBceEps, p[i]));
    sum += y[i] ? -std::log(pc) : -std::log(1.0 - pc);
  }
  return sum / static_cast<double>(p.size());
}

LstmParams::LstmParams(const std::string& prefix, int input_dim, int hidden,
                       Rng& rng)
    : W_i(prefix + ".W_i", hidden, input_dim),
      U_i(prefix + ".U_i", hidden, hidden),
      b_i(prefix + ".b_i", hidden, 1),
      W_f(prefix + ".W_f", hidden, input_dim),
      U_f(prefix + ".U_f", hidden, hidden),
      b_f(prefix + ".b_f", hidden, 1),
      W_o(prefix + ".W_o", hidden, input_dim),
      U_o(prefix + ".U_o", hidden, hidden),
      b_o(prefix + ".b_o", hidden, 1),
      W_c(prefix + ".W_c", hidden, input_dim),
      U_c(prefix + ".U_c", hidden, hidden),
      b_c(prefix + ".b_c", hidden, 1) {
  for (Tensor* w : {&W_i, &U_i, &W_f, &U_f, &W_o, &U_o, &W_c, &U_c})
    xavier_init(*w, rng);
  b_f.value.setConstant(1.0);  // forget-gate bias
}

std::vector<Tensor*> LstmParams::tensors() {
  return {&W_i, &U_i, &b_i, &W_f, &U_f, &b_f,
          &W_o, &U_o, &b_o, &W_c, &U_c, &b_c};
}

LstmState lstm_cell(Graph& g, Graph::NodeId x, LstmState prev, LstmParams& p) {
  auto gate = [&](Tensor& W, Tensor& U, Tensor& b) {
    return g.add(g.add(g.matmul(g.param(W), x), g.matmul(g.param(U), prev.h)),
                 g.param(b));
  };
  Graph::NodeId i = g.sigmoid(gate(p.W_i, p.U_i, p.b_i));
  Graph::NodeId f = g.sigmoid(gate(p.W_f, p.U_f, p.b_f));
  Graph::NodeId o = g.sigmoid(gate(p.W_o, p.U_o, p.b_o));
  Graph::NodeId cand = g.tanh(gate(p.W_c, p.U_c, p.b_c));
  Graph::NodeId c = g.add(g.cmul(f, prev.c), g.cmul(i, cand));
  Graph::NodeId h = g.cmul(o, g.tanh(c));
  return {h, c};
}

LstmState lstm_zero_state(Graph& g, int hidden) {
  Mat z = Mat::Zero(hidden, 1);
  return {g.input(z), g.input(z)};
}

Dense::Dense(const std::string& prefix, int in_dim, int out_dim, Rng& rng)
    : W(prefix + ".W", out_dim, in_dim), b(prefix + ".b", out_dim, 1) {
  xavier_init(W, rng);
}

Graph::NodeId Dense::operator()(Graph& g, Graph::NodeId x) {
  return g.add(g.matmul(g.param(W), x), g.param(b));
}

AttentionMlp::AttentionMlp(const std::string& prefix, int in_dim, int hidden_dim,
                           Rng& rng)
    : hidden(prefix + ".hidden", in_dim, hidden_dim, rng),
      out(prefix + ".out", hidden_dim, 1, rng) {}

Graph::NodeId AttentionMlp::score(Graph& g, Graph::NodeId a, Graph::NodeId b) {
  return out(g, g.relu(hidden(g, g.concat(a, b))));
}

std::vector<Tensor*> AttentionMlp::tensors() {
  return {&hidden.W, &hidden.b, &out.W, &out.b};
}

OptimizerState::Moments& OptimizerState::moments_for(Tensor* t) {
  for (auto& [tensor, m] : moments_)
    if (tensor == t) return m;
  moments_.emplace_back(t, Moments{Mat::Zero(t->value.rows(), t->value.cols()),
                                   Mat::Zero(t->value.rows(), t->value.cols())});
  return moments_.back().second;
}

void OptimizerState::step(std::span<Tensor* const> params) {
  for (Tensor* t : params)
    if (!t->grad.allFinite())
      throw std::runtime_error("optimizer_step: non-finite gradient in " + t->name);
  ++step_count;
  if (kind == Kind::SGD) {
    for (Tensor* t : params) t->value -= lr * t->grad;
    return;
  }
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  for (Tensor* t : params) {
    Moments& m = moments_for(t);
    m.m = beta1 * m.m + (1.0 - beta1) * t->grad;
    m.v = beta2 * m.v + (1.0 - beta2) * t->grad.cwiseProduct(t->grad);
    Mat mhat = m.m / bc1;
    Mat vhat = m.v / bc2;
    t->value -= lr * mhat.cwiseQuotient(vhat.cwiseSqrt() + Mat::Constant(vhat.rows(), vhat.cols(), eps));
  }
}

double clip_gradients(std::span<Tensor* const> params, double max_norm) {
  double sq = 0;
  for (Tensor* t : params) sq += t->grad.squaredNorm();
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    double scale = max_norm / norm;
    for (Tensor* t : params) t->grad *= scale;
  }
  return norm;
}

void zero_grads(std::span<Tensor* const> params) {
  for (Tensor* t : params) t->zero_grad();
}

}  // namespace bisense::nn
