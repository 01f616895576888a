#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace safemult::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Tape;

// Handle to a node on a tape. Cheap to copy; invalid once the tape dies.
struct Val {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;
};

// Reverse-mode differentiation tape over small dense arrays. The graph is
// rebuilt for every forward pass; backward() walks the nodes in reverse
// creation order, which is a valid topological order by construction.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable leaf (a parameter block).
  Val leaf(Matrix v);
  // Non-differentiable leaf (data, targets, noise).
  Val constant(Matrix v);
  Val constant(double v);

  // Used by operations; parents must already live on this tape.
  Val emplace(Matrix v, bool needs_grad, std::function<void()> backprop);

  // Accumulates d(root)/d(node) into every node's gradient. The root must
  // be scalar (1x1); gradients of nodes the root does not depend on stay 0.
  void backward(Val root);

  const Matrix& value(int id) const { return nodes_[id].value; }
  const Matrix& grad(Val v) const;
  Matrix& grad_ref(int id) { return nodes_[id].grad; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    std::function<void()> backprop;
  };
  std::vector<Node> nodes_;
};

// --- elementwise arithmetic -------------------------------------------------

Val operator+(Val a, Val b);
Val operator-(Val a, Val b);
Val operator*(Val a, Val b);  // elementwise
Val operator-(Val a);
Val operator*(double s, Val a);
Val operator*(Val a, double s);
Val operator+(Val a, double s);
Val operator+(double s, Val a);
Val operator-(Val a, double s);
Val operator-(double s, Val a);

// --- structural -------------------------------------------------------------

Val matmul(Val a, Val b);
// x: B x in, w: out x in, b: out x 1  ->  B x out
Val linear(Val x, Val w, Val b);
Val concat_cols(Val a, Val b);
Val cols(Val a, int start, int len);
Val sum(Val a);       // 1x1
Val mean(Val a);      // 1x1
Val row_sum(Val a);   // B x 1

// --- nonlinearities ---------------------------------------------------------

Val tanh(Val a);
Val relu(Val a);
// Numerically clamped into the open interval (0,1).
Val sigmoid(Val a);
Val exp(Val a);
Val log(Val a);
Val square(Val a);
Val softplus(Val a);

// Hard clamp; gradient passes where the input lies in [lo, hi].
Val clamp(Val a, double lo, double hi);
Val minimum(Val a, Val b);
Val maximum(Val a, Val b);

// Identity forward, zero backward.
Val stop_gradient(Val a);

namespace detail {
[[noreturn]] void shape_error(const std::string& op, const Matrix& a,
                              const Matrix& b);
double sigmoid_clamped(double z);
}  // namespace detail

}  // namespace safemult::nn
