#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bisense/util.hpp"

namespace bisense::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Trainable parameter. 64-bit floats throughout the core; shapes are fixed
// at construction.
struct Tensor {
  std::string name;
  Mat value;
  Mat grad;

  Tensor() = default;
  Tensor(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

void xavier_init(Tensor& t, Rng& rng);

// Dynamic computation tape. A forward pass records nodes; backward() runs
// reverse-mode accumulation over the recorded computation and adds parameter
// gradients into their Tensor::grad (accumulating across calls until
// zero_grad).
class Graph {
 public:
  using NodeId = int32_t;

  NodeId input(const Mat& value);
  NodeId input_scalar(double value);
  NodeId param(Tensor& t);  // one node per tensor per graph

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId cmul(NodeId a, NodeId b);  // elementwise
  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  NodeId relu(NodeId a);
  NodeId softmax(NodeId a);  // column vector, max-subtracted
  NodeId concat(NodeId a, NodeId b);  // column vectors
  NodeId scale(NodeId vec, NodeId scalar);  // scalar node is 1x1
  NodeId scale_const(NodeId a, double c);
  NodeId stack(std::span<const NodeId> scalars);  // -> column vector
  NodeId pick(NodeId vec, Eigen::Index i);        // -> 1x1
  NodeId mean(std::span<const NodeId> nodes);     // same-shape average
  // binary cross-entropy of a 1x1 probability against label y in {0,1};
  // p clamped to [1e-7, 1-1e-7]
  NodeId bce(NodeId p, double y);

  const Mat& value(NodeId id) const;
  double scalar(NodeId id) const;

  // Throws std::logic_error when nothing was recorded or loss is not scalar.
  void backward(NodeId loss);

  void clear();
  size_t size() const { return nodes_.size(); }

 private:
  enum class Op : uint8_t {
    Input, Param, MatMul, Add, CMul, Sigmoid, Tanh, Relu, Softmax,
    Concat, Scale, ScaleConst, Stack, Pick, Mean, Bce
  };
  struct Node {
    Mat value;
    Mat grad;
    Op op;
    NodeId a = -1, b = -1;
    Eigen::Index aux = 0;
    double c = 0;       // constant / label
    bool clamped = false;
    std::vector<NodeId> list;
    Tensor* tensor = nullptr;
  };
  std::vector<Node> nodes_;
  std::vector<std::pair<Tensor*, NodeId>> param_nodes_;
  NodeId push(Node n);
  const Node& at(NodeId id) const;
};

inline constexpr double kBceEps = 1e-7;

// standalone stable softmax (used by the graph op and by oracles/consumers)
Vec softmax(const Vec& logits);

// mean binary cross-entropy over a batch, probabilities clamped to
// [kBceEps, 1-kBceEps]
double bce_loss(std::span<const double> p, std::span<const int> y);

struct LstmParams {
  Tensor W_i, U_i, b_i;
  Tensor W_f, U_f, b_f;
  Tensor W_o, U_o, b_o;
  Tensor W_c, U_c, b_c;

  LstmParams() = default;
  // Xavier weights, zero biases except forget-gate bias +1
  LstmParams(const std::string& prefix, int input_dim, int hidden, Rng& rng);

  int hidden() const { return static_cast<int>(b_i.value.rows()); }
  int input_dim() const { return static_cast<int>(W_i.value.cols()); }
  std::vector<Tensor*> tensors();
};

struct LstmState {
  Graph::NodeId h;
  Graph::NodeId c;
};

// One LSTM step: i,f,o = sigmoid(Wx + Uh + b); g = tanh(...);
// c = f*c_prev + i*g; h = o*tanh(c). The graph records every intermediate,
// which is the backprop cache.
LstmState lstm_cell(Graph& g, Graph::NodeId x, LstmState prev, LstmParams& p);

// initial zero state helper
LstmState lstm_zero_state(Graph& g, int hidden);

struct Dense {
  Tensor W, b;
  Dense() = default;
  Dense(const std::string& prefix, int in_dim, int out_dim, Rng& rng);
  Graph::NodeId operator()(Graph& g, Graph::NodeId x);
  std::vector<Tensor*> tensors() { return {&W, &b}; }
};

// f_att: concat inputs -> dense(hidden) -> ReLU -> dense(1)
struct AttentionMlp {
  Dense hidden;
  Dense out;
  AttentionMlp() = default;
  AttentionMlp(const std::string& prefix, int in_dim, int hidden_dim, Rng& rng);
  Graph::NodeId score(Graph& g, Graph::NodeId a, Graph::NodeId b);
  std::vector<Tensor*> tensors();
};

struct OptimizerState {
  enum class Kind { SGD, Adam };
  Kind kind = Kind::Adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step_count = 0;

  explicit OptimizerState(Kind k = Kind::Adam, double learning_rate = 1e-3)
      : kind(k), lr(learning_rate) {}

  // Applies one update from the accumulated gradients. Throws
  // std::runtime_error naming the parameter on non-finite gradients.
  void step(std::span<Tensor* const> params);

 private:
  struct Moments {
    Mat m, v;
  };
  std::vector<std::pair<Tensor*, Moments>> moments_;
  Moments& moments_for(Tensor* t);
};

// Scales gradients so their global L2 norm is at most max_norm; returns the
// pre-clip norm.
double clip_gradients(std::span<Tensor* const> params, double max_norm = 5.0);

void zero_grads(std::span<Tensor* const> params);

}  // namespace bisense::nn
