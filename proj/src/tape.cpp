#include "safemult/tape.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace safemult::nn {

namespace detail {

[[noreturn]] void shape_error(const std::string& op, const Matrix& a,
                              const Matrix& b) {
  std::ostringstream os;
  os << op << ": shape mismatch, got " << a.rows() << "x" << a.cols()
     << " and " << b.rows() << "x" << b.cols();
  throw std::invalid_argument(os.str());
}

double sigmoid_clamped(double z) {
  double p;
  if (z >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    p = e / (1.0 + e);
  }
  constexpr double kLo = 1e-300;
  constexpr double kHi = 1.0 - 1.1102230246251565e-16;  // largest double < 1
  if (p < kLo) p = kLo;
  if (p > kHi) p = kHi;
  return p;
}

}  // namespace detail

namespace {

void check_same_shape(const char* op, const Val& a, const Val& b) {
  if (a.value().rows() != b.value().rows() ||
      a.value().cols() != b.value().cols()) {
    detail::shape_error(op, a.value(), b.value());
  }
}

void check_same_tape(const char* op, const Val& a, const Val& b) {
  if (a.tape != b.tape) {
    throw std::invalid_argument(std::string(op) +
                                ": operands live on different tapes");
  }
}

}  // namespace

const Matrix& Val::value() const { return tape->value(id); }

double Val::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    std::ostringstream os;
    os << "Val::scalar: node is " << v.rows() << "x" << v.cols();
    throw std::invalid_argument(os.str());
  }
  return v(0, 0);
}

Val Tape::leaf(Matrix v) { return emplace(std::move(v), true, nullptr); }

Val Tape::constant(Matrix v) { return emplace(std::move(v), false, nullptr); }

Val Tape::constant(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

Val Tape::emplace(Matrix v, bool needs_grad, std::function<void()> backprop) {
  Node n;
  n.value = std::move(v);
  n.needs_grad = needs_grad;
  if (needs_grad) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  }
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Val{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Val root) {
  if (root.tape != this) {
    throw std::invalid_argument("Tape::backward: root lives on another tape");
  }
  const Matrix& rv = nodes_[root.id].value;
  if (rv.rows() != 1 || rv.cols() != 1) {
    std::ostringstream os;
    os << "Tape::backward: root must be scalar, got " << rv.rows() << "x"
       << rv.cols();
    throw std::invalid_argument(os.str());
  }
  if (!nodes_[root.id].needs_grad) {
    return;  // root does not depend on any differentiable leaf
  }
  nodes_[root.id].grad(0, 0) += 1.0;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.needs_grad && n.backprop) {
      n.backprop();
    }
  }
}

const Matrix& Tape::grad(Val v) const {
  const Node& n = nodes_[v.id];
  if (!n.needs_grad) {
    throw std::invalid_argument("Tape::grad: node is not differentiable");
  }
  return n.grad;
}

// Every op follows the same pattern: compute the value eagerly, and if any
// parent is differentiable, register a closure that scatters this node's
// gradient into the parents. Parent ids are always smaller than the output
// id, so reverse creation order is a valid backward order.

namespace {

bool any_grad(Tape& t, int a) { return t.needs_grad(a); }
bool any_grad(Tape& t, int a, int b) {
  return t.needs_grad(a) || t.needs_grad(b);
}

template <typename Bwd>
Val make_node(Tape& t, Matrix value, bool needs_grad, Bwd bwd) {
  if (!needs_grad) return t.constant(std::move(value));
  return t.emplace(std::move(value), true, std::move(bwd));
}

}  // namespace

Val operator+(Val a, Val b) {
  check_same_tape("add", a, b);
  check_same_shape("add", a, b);
  Tape& t = *a.tape;
  const int ai = a.id, bi = b.id, oi = t.size();
  return make_node(t, a.value() + b.value(), any_grad(t, ai, bi), [&t, ai, bi, oi]() {
    const Matrix& g = t.grad_ref(oi);
    if (t.needs_grad(ai)) t.grad_ref(ai) += g;
    if (t.needs_grad(bi)) t.grad_ref(bi) += g;
  });
}

Val operator-(Val a, Val b) {
  check_same_tape("sub", a, b);
  check_same_shape("sub", a, b);
  Tape& t = *a.tape;
  const int ai = a.id, bi = b.id, oi = t.size();
  return make_node(t, a.value() - b.value(), any_grad(t, ai, bi), [&t, ai, bi, oi]() {
    const Matrix& g = t.grad_ref(oi);
    if (t.needs_grad(ai)) t.grad_ref(ai) += g;
    if (t.needs_grad(bi)) t.grad_ref(bi) -= g;
  });
}

Val operator*(Val a, Val b) {
  check_same_tape("mul", a, b);
  check_same_shape("mul", a, b);
  Tape& t = *a.tape;
  const int ai = a.id, bi = b.id, oi = t.size();
  return make_node(t, a.value().cwiseProduct(b.value()), any_grad(t, ai, bi),
                   [&t, ai, bi, oi]() {
                     const Matrix& g = t.grad_ref(oi);
                     if (t.needs_grad(ai))
                       t.grad_ref(ai) += g.cwiseProduct(t.value(bi));
                     if (t.needs_grad(bi))
                       t.grad_ref(bi) += g.cwiseProduct(t.value(ai));
                   });
}

Val operator-(Val a) { return -1.0 * a; }

Val operator*(double s, Val a) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  return make_node(t, s * a.value(), any_grad(t, ai), [&t, ai, oi, s]() {
    t.grad_ref(ai) += s * t.grad_ref(oi);
  });
}

Val operator*(Val a, double s) { return s * a; }

Val operator+(Val a, double s) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  return make_node(t, (a.value().array() + s).matrix(), any_grad(t, ai),
                   [&t, ai, oi]() { t.grad_ref(ai) += t.grad_ref(oi); });
}

Val operator+(double s, Val a) { return a + s; }
Val operator-(Val a, double s) { return a + (-s); }

Val operator-(double s, Val a) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  return make_node(t, (s - a.value().array()).matrix(), any_grad(t, ai),
                   [&t, ai, oi]() { t.grad_ref(ai) -= t.grad_ref(oi); });
}

Val matmul(Val a, Val b) {
  check_same_tape("matmul", a, b);
  if (a.value().cols() != b.value().rows()) {
    detail::shape_error("matmul", a.value(), b.value());
  }
  Tape& t = *a.tape;
  const int ai = a.id, bi = b.id, oi = t.size();
  return make_node(t, a.value() * b.value(), any_grad(t, ai, bi),
                   [&t, ai, bi, oi]() {
                     const Matrix& g = t.grad_ref(oi);
                     if (t.needs_grad(ai))
                       t.grad_ref(ai).noalias() += g * t.value(bi).transpose();
                     if (t.needs_grad(bi))
                       t.grad_ref(bi).noalias() += t.value(ai).transpose() * g;
                   });
}

Val linear(Val x, Val w, Val b) {
  check_same_tape("linear", x, w);
  check_same_tape("linear", x, b);
  const Matrix& xv = x.value();
  const Matrix& wv = w.value();
  const Matrix& bv = b.value();
  if (xv.cols() != wv.cols()) detail::shape_error("linear", xv, wv);
  if (bv.rows() != wv.rows() || bv.cols() != 1) {
    detail::shape_error("linear bias", wv, bv);
  }
  Tape& t = *x.tape;
  const int xi = x.id, wi = w.id, bj = b.id, oi = t.size();
  Matrix out = xv * wv.transpose();
  out.rowwise() += bv.transpose().row(0);
  const bool ng = t.needs_grad(xi) || t.needs_grad(wi) || t.needs_grad(bj);
  return make_node(t, std::move(out), ng, [&t, xi, wi, bj, oi]() {
    const Matrix& g = t.grad_ref(oi);
    if (t.needs_grad(xi)) t.grad_ref(xi).noalias() += g * t.value(wi);
    if (t.needs_grad(wi)) t.grad_ref(wi).noalias() += g.transpose() * t.value(xi);
    if (t.needs_grad(bj)) t.grad_ref(bj) += g.colwise().sum().transpose();
  });
}

Val concat_cols(Val a, Val b) {
  check_same_tape("concat_cols", a, b);
  if (a.value().rows() != b.value().rows()) {
    detail::shape_error("concat_cols", a.value(), b.value());
  }
  Tape& t = *a.tape;
  const int ai = a.id, bi = b.id, oi = t.size();
  const Eigen::Index ac = a.value().cols(), bc = b.value().cols();
  Matrix out(a.value().rows(), ac + bc);
  out.leftCols(ac) = a.value();
  out.rightCols(bc) = b.value();
  return make_node(t, std::move(out), any_grad(t, ai, bi),
                   [&t, ai, bi, oi, ac, bc]() {
                     const Matrix& g = t.grad_ref(oi);
                     if (t.needs_grad(ai)) t.grad_ref(ai) += g.leftCols(ac);
                     if (t.needs_grad(bi)) t.grad_ref(bi) += g.rightCols(bc);
                   });
}

Val cols(Val a, int start, int len) {
  Tape& t = *a.tape;
  if (start < 0 || len < 0 || start + len > a.value().cols()) {
    std::ostringstream os;
    os << "cols: range [" << start << ", " << start + len
       << ") out of bounds for " << a.value().cols() << " columns";
    throw std::invalid_argument(os.str());
  }
  const int ai = a.id, oi = t.size();
  return make_node(t, a.value().middleCols(start, len), any_grad(t, ai),
                   [&t, ai, oi, start, len]() {
                     t.grad_ref(ai).middleCols(start, len) += t.grad_ref(oi);
                   });
}

Val sum(Val a) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return make_node(t, std::move(out), any_grad(t, ai), [&t, ai, oi]() {
    t.grad_ref(ai).array() += t.grad_ref(oi)(0, 0);
  });
}

Val mean(Val a) {
  const double n = static_cast<double>(a.value().size());
  return (1.0 / n) * sum(a);
}

Val row_sum(Val a) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  return make_node(t, a.value().rowwise().sum(), any_grad(t, ai),
                   [&t, ai, oi]() {
                     const Matrix& g = t.grad_ref(oi);
                     t.grad_ref(ai).colwise() += g.col(0);
                   });
}

Val tanh(Val a) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  return make_node(t, a.value().array().tanh().matrix(), any_grad(t, ai),
                   [&t, ai, oi]() {
                     const Matrix& y = t.value(oi);
                     t.grad_ref(ai).array() +=
                         t.grad_ref(oi).array() * (1.0 - y.array().square());
                   });
}

Val relu(Val a) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  return make_node(t, a.value().cwiseMax(0.0), any_grad(t, ai),
                   [&t, ai, oi]() {
                     const Matrix& x = t.value(ai);
                     t.grad_ref(ai).array() +=
                         t.grad_ref(oi).array() *
                         (x.array() > 0.0).cast<double>();
                   });
}

Val sigmoid(Val a) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  Matrix out = a.value().unaryExpr(&detail::sigmoid_clamped);
  return make_node(t, std::move(out), any_grad(t, ai), [&t, ai, oi]() {
    const Matrix& y = t.value(oi);
    t.grad_ref(ai).array() +=
        t.grad_ref(oi).array() * y.array() * (1.0 - y.array());
  });
}

Val exp(Val a) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  return make_node(t, a.value().array().exp().matrix(), any_grad(t, ai),
                   [&t, ai, oi]() {
                     t.grad_ref(ai).array() +=
                         t.grad_ref(oi).array() * t.value(oi).array();
                   });
}

Val log(Val a) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  return make_node(t, a.value().array().log().matrix(), any_grad(t, ai),
                   [&t, ai, oi]() {
                     t.grad_ref(ai).array() +=
                         t.grad_ref(oi).array() / t.value(ai).array();
                   });
}

Val square(Val a) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  return make_node(t, a.value().array().square().matrix(), any_grad(t, ai),
                   [&t, ai, oi]() {
                     t.grad_ref(ai).array() +=
                         2.0 * t.grad_ref(oi).array() * t.value(ai).array();
                   });
}

Val softplus(Val a) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  // softplus(x) = max(x, 0) + log1p(exp(-|x|)) is stable for large |x|.
  Matrix out = a.value().unaryExpr([](double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  });
  return make_node(t, std::move(out), any_grad(t, ai), [&t, ai, oi]() {
    const Matrix& x = t.value(ai);
    t.grad_ref(ai).array() +=
        t.grad_ref(oi).array() *
        x.unaryExpr(&detail::sigmoid_clamped).array();
  });
}

Val clamp(Val a, double lo, double hi) {
  Tape& t = *a.tape;
  const int ai = a.id, oi = t.size();
  return make_node(t, a.value().cwiseMax(lo).cwiseMin(hi), any_grad(t, ai),
                   [&t, ai, oi, lo, hi]() {
                     const Matrix& x = t.value(ai);
                     t.grad_ref(ai).array() +=
                         t.grad_ref(oi).array() *
                         ((x.array() >= lo) && (x.array() <= hi))
                             .cast<double>();
                   });
}

Val minimum(Val a, Val b) {
  check_same_tape("minimum", a, b);
  check_same_shape("minimum", a, b);
  Tape& t = *a.tape;
  const int ai = a.id, bi = b.id, oi = t.size();
  return make_node(t, a.value().cwiseMin(b.value()), any_grad(t, ai, bi),
                   [&t, ai, bi, oi]() {
                     const Matrix& g = t.grad_ref(oi);
                     const auto pick_a =
                         (t.value(ai).array() <= t.value(bi).array())
                             .cast<double>();
                     if (t.needs_grad(ai))
                       t.grad_ref(ai).array() += g.array() * pick_a;
                     if (t.needs_grad(bi))
                       t.grad_ref(bi).array() += g.array() * (1.0 - pick_a);
                   });
}

Val maximum(Val a, Val b) {
  check_same_tape("maximum", a, b);
  check_same_shape("maximum", a, b);
  Tape& t = *a.tape;
  const int ai = a.id, bi = b.id, oi = t.size();
  return make_node(t, a.value().cwiseMax(b.value()), any_grad(t, ai, bi),
                   [&t, ai, bi, oi]() {
                     const Matrix& g = t.grad_ref(oi);
                     const auto pick_a =
                         (t.value(ai).array() >= t.value(bi).array())
                             .cast<double>();
                     if (t.needs_grad(ai))
                       t.grad_ref(ai).array() += g.array() * pick_a;
                     if (t.needs_grad(bi))
                       t.grad_ref(bi).array() += g.array() * (1.0 - pick_a);
                   });
}

Val stop_gradient(Val a) {
  return a.tape->constant(a.value());
}

}  // namespace safemult::nn
