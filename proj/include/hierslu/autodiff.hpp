#pragma once

// Tape-based reverse-mode differentiation over Tensor.
//
// Every primitive appends one node holding its forward value and a closure
// that pushes the node's gradient into its inputs. Nodes are appended in
// execution order, so a single reverse sweep is a valid topological order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hierslu/error.hpp"
#include "hierslu/tensor.hpp"

namespace hierslu {

struct Var {
  std::size_t id = std::numeric_limits<std::size_t>::max();
};

class Tape {
 public:
  // Receives the tape and the id of the node being back-propagated.
  using Backprop = std::function<void(Tape&, std::size_t)>;

  Tape() { nodes_.reserve(1024); }

  Var push(Tensor value, Backprop backprop = {}) {
    nodes_.push_back(Node{std::move(value), Tensor{}, std::move(backprop)});
    return Var{nodes_.size() - 1};
  }

  Var constant(Tensor value) { return push(std::move(value)); }

  // Leaf bound to a stored parameter; one leaf per name per tape.
  Var param(const ParameterStore& store, const std::string& name) {
    if (const auto it = param_nodes_.find(name); it != param_nodes_.end()) return Var{it->second};
    const Var v = push(store.value(name));
    param_nodes_.emplace(name, v.id);
    return v;
  }

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  Tensor& grad(std::size_t id) { return nodes_[id].grad; }
  const Tensor& grad(Var v) const { return nodes_.at(v.id).grad; }

  std::size_t size() const { return nodes_.size(); }

  const std::map<std::string, std::size_t>& param_nodes() const { return param_nodes_; }

  // Reverse sweep from a scalar node; leaves gradients on every node.
  void backprop_from(Var loss) {
    if (value(loss).size() != 1) {
      throw Error(ErrorCode::NotScalarLoss, "loss has shape " + shape_string(value(loss)));
    }
    for (auto& n : nodes_) n.grad = Tensor(n.value.rows, n.value.cols);
    nodes_[loss.id].grad[0] = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      if (nodes_[i].backprop) nodes_[i].backprop(*this, i);
    }
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Backprop backprop;
  };

  std::vector<Node> nodes_;
  std::map<std::string, std::size_t> param_nodes_;
};

// Accumulates d(loss)/d(param) into store gradients for every parameter leaf.
inline void backward(Tape& tape, Var loss, ParameterStore& store) {
  tape.backprop_from(loss);
  for (const auto& [name, id] : tape.param_nodes()) {
    auto& g = store.grad(name);
    const auto& src = tape.grad(id);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += src[k];
  }
}

namespace detail {

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(op) + ": " + shape_string(a) + " vs " + shape_string(b));
  }
}

inline void require_set(const Tape& t, std::span<const Var> xs, const char* op) {
  if (xs.empty()) throw Error(ErrorCode::EmptyIntentSet, std::string(op) + " over an empty set");
  for (const auto& x : xs) require_same_shape(t.value(xs[0]), t.value(x), op);
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)) without overflow for large |x|.
inline double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline std::vector<std::size_t> ids(std::span<const Var> xs) {
  std::vector<std::size_t> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i].id;
  return out;
}

}  // namespace detail

// W (r x c) times vector x (c x 1).
inline Var matvec(Tape& t, Var w, Var x) {
  const auto& W = t.value(w);
  const auto& X = t.value(x);
  if (!X.is_vector() || W.cols != X.rows) {
    throw Error(ErrorCode::ShapeMismatch, "matvec: " + shape_string(W) + " x " + shape_string(X));
  }
  Tensor out(W.rows, 1);
  for (std::size_t r = 0; r < W.rows; ++r) {
    const double* row = &W.data[r * W.cols];
    double acc = 0.0;
    for (std::size_t c = 0; c < W.cols; ++c) acc += row[c] * X.data[c];
    out.data[r] = acc;
  }
  return t.push(std::move(out), [w = w.id, x = x.id](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    const auto& Wv = tp.value(w);
    const auto& Xv = tp.value(x);
    auto& gw = tp.grad(w);
    auto& gx = tp.grad(x);
    for (std::size_t r = 0; r < Wv.rows; ++r) {
      const double gr = g.data[r];
      if (gr == 0.0) continue;
      const double* row = &Wv.data[r * Wv.cols];
      double* grow = &gw.data[r * Wv.cols];
      for (std::size_t c = 0; c < Wv.cols; ++c) {
        grow[c] += gr * Xv.data[c];
        gx.data[c] += gr * row[c];
      }
    }
  });
}

inline Var add(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require_same_shape(A, B, "add");
  Tensor out = A;
  for (std::size_t k = 0; k < out.size(); ++k) out.data[k] += B.data[k];
  return t.push(std::move(out), [a = a.id, b = b.id](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    auto& ga = tp.grad(a);
    for (std::size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k];
    auto& gb = tp.grad(b);
    for (std::size_t k = 0; k < g.size(); ++k) gb.data[k] += g.data[k];
  });
}

// Element-wise (Hadamard) product.
inline Var mul(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require_same_shape(A, B, "mul");
  Tensor out = A;
  for (std::size_t k = 0; k < out.size(); ++k) out.data[k] *= B.data[k];
  return t.push(std::move(out), [a = a.id, b = b.id](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    const auto& Av = tp.value(a);
    const auto& Bv = tp.value(b);
    auto& ga = tp.grad(a);
    for (std::size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k] * Bv.data[k];
    auto& gb = tp.grad(b);
    for (std::size_t k = 0; k < g.size(); ++k) gb.data[k] += g.data[k] * Av.data[k];
  });
}

inline Var scale(Tape& t, Var a, double s) {
  Tensor out = t.value(a);
  for (auto& v : out.data) v *= s;
  return t.push(std::move(out), [a = a.id, s](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    auto& ga = tp.grad(a);
    for (std::size_t k = 0; k < g.size(); ++k) ga.data[k] += s * g.data[k];
  });
}

inline Var neg(Tape& t, Var a) { return scale(t, a, -1.0); }

inline Var tanh(Tape& t, Var a) {
  Tensor out = t.value(a);
  for (auto& v : out.data) v = std::tanh(v);
  return t.push(std::move(out), [a = a.id](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    const auto& y = tp.value(self);
    auto& ga = tp.grad(a);
    for (std::size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k] * (1.0 - y.data[k] * y.data[k]);
  });
}

inline Var sigmoid(Tape& t, Var a) {
  Tensor out = t.value(a);
  for (auto& v : out.data) v = detail::sigmoid(v);
  return t.push(std::move(out), [a = a.id](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    const auto& y = tp.value(self);
    auto& ga = tp.grad(a);
    for (std::size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k] * y.data[k] * (1.0 - y.data[k]);
  });
}

// Element-wise log(sigmoid(x)).
inline Var log_sigmoid(Tape& t, Var a) {
  Tensor out = t.value(a);
  for (auto& v : out.data) v = detail::log_sigmoid(v);
  return t.push(std::move(out), [a = a.id](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    const auto& x = tp.value(a);
    auto& ga = tp.grad(a);
    for (std::size_t k = 0; k < g.size(); ++k) ga.data[k] += g.data[k] * detail::sigmoid(-x.data[k]);
  });
}

// Element-wise log(max(x, floor)); the clamped branch has zero gradient.
inline Var log(Tape& t, Var a, double floor = 0.0) {
  Tensor out = t.value(a);
  for (auto& v : out.data) v = std::log(std::max(v, floor));
  return t.push(std::move(out), [a = a.id, floor](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    const auto& x = tp.value(a);
    auto& ga = tp.grad(a);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (x.data[k] > floor) ga.data[k] += g.data[k] / x.data[k];
    }
  });
}

inline Var softmax(Tape& t, Var a) {
  const auto& A = t.value(a);
  if (!A.is_vector() || A.size() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "softmax needs a nonempty vector, got " + shape_string(A));
  }
  Tensor out = A;
  const double mx = *std::max_element(out.data.begin(), out.data.end());
  double sum = 0.0;
  for (auto& v : out.data) sum += (v = std::exp(v - mx));
  for (auto& v : out.data) v /= sum;
  return t.push(std::move(out), [a = a.id](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    const auto& y = tp.value(self);
    double gy = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) gy += g.data[k] * y.data[k];
    auto& ga = tp.grad(a);
    for (std::size_t k = 0; k < g.size(); ++k) ga.data[k] += y.data[k] * (g.data[k] - gy);
  });
}

inline Var dot(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  detail::require_same_shape(A, B, "dot");
  double acc = 0.0;
  for (std::size_t k = 0; k < A.size(); ++k) acc += A.data[k] * B.data[k];
  return t.push(Tensor::scalar(acc), [a = a.id, b = b.id](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    const auto& Av = tp.value(a);
    const auto& Bv = tp.value(b);
    auto& ga = tp.grad(a);
    for (std::size_t k = 0; k < Av.size(); ++k) ga.data[k] += g * Bv.data[k];
    auto& gb = tp.grad(b);
    for (std::size_t k = 0; k < Av.size(); ++k) gb.data[k] += g * Av.data[k];
  });
}

inline Var concat(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  if (!A.is_vector() || !B.is_vector()) {
    throw Error(ErrorCode::ShapeMismatch, "concat needs vectors");
  }
  Tensor out(A.rows + B.rows, 1);
  std::copy(A.data.begin(), A.data.end(), out.data.begin());
  std::copy(B.data.begin(), B.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(A.rows));
  return t.push(std::move(out), [a = a.id, b = b.id](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    auto& ga = tp.grad(a);
    auto& gb = tp.grad(b);
    for (std::size_t k = 0; k < ga.size(); ++k) ga.data[k] += g.data[k];
    for (std::size_t k = 0; k < gb.size(); ++k) gb.data[k] += g.data[ga.size() + k];
  });
}

// Single coordinate of a vector, as a scalar node.
inline Var pick(Tape& t, Var a, std::size_t index) {
  const auto& A = t.value(a);
  if (index >= A.size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "pick " + std::to_string(index) + " of " + std::to_string(A.size()));
  }
  return t.push(Tensor::scalar(A[index]), [a = a.id, index](Tape& tp, std::size_t self) {
    tp.grad(a).data[index] += tp.grad(self)[0];
  });
}

// Row `index` of a (n x k) table, returned as a (k x 1) vector.
inline Var row(Tape& t, Var table, std::size_t index) {
  const auto& T = t.value(table);
  if (index >= T.rows) {
    throw Error(ErrorCode::IndexOutOfRange,
                "row " + std::to_string(index) + " of " + std::to_string(T.rows));
  }
  Tensor out(T.cols, 1);
  std::copy_n(T.data.begin() + static_cast<std::ptrdiff_t>(index * T.cols), T.cols, out.data.begin());
  return t.push(std::move(out), [table = table.id, index](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    auto& gt = tp.grad(table);
    for (std::size_t k = 0; k < g.size(); ++k) gt.data[index * g.size() + k] += g.data[k];
  });
}

inline Var sum(Tape& t, std::span<const Var> xs) {
  detail::require_set(t, xs, "sum");
  Tensor out = t.value(xs[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const auto& X = t.value(xs[i]);
    for (std::size_t k = 0; k < out.size(); ++k) out.data[k] += X.data[k];
  }
  return t.push(std::move(out), [in = detail::ids(xs)](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    for (auto id : in) {
      auto& gi = tp.grad(id);
      for (std::size_t k = 0; k < g.size(); ++k) gi.data[k] += g.data[k];
    }
  });
}

// Element-wise mean over a set of equally shaped tensors, summed in the
// order given.
inline Var mean(Tape& t, std::span<const Var> xs) {
  detail::require_set(t, xs, "mean");
  Tensor out = t.value(xs[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const auto& X = t.value(xs[i]);
    for (std::size_t k = 0; k < out.size(); ++k) out.data[k] += X.data[k];
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (auto& v : out.data) v *= inv;
  return t.push(std::move(out), [in = detail::ids(xs), inv](Tape& tp, std::size_t self) {
    const auto& g = tp.grad(self);
    for (auto id : in) {
      auto& gi = tp.grad(id);
      for (std::size_t k = 0; k < g.size(); ++k) gi.data[k] += inv * g.data[k];
    }
  });
}

// Per-coordinate index of the maximal element across the set; ties go to
// the lower set index.
inline std::vector<std::size_t> max_winners(std::span<const Tensor* const> xs) {
  std::vector<std::size_t> win(xs.empty() ? 0 : xs[0]->size(), 0);
  for (std::size_t k = 0; k < win.size(); ++k) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
      if (xs[i]->data[k] > xs[win[k]]->data[k]) win[k] = i;
    }
  }
  return win;
}

// Element-wise max over a set; the gradient of each coordinate flows only
// to its recorded winner.
inline Var max_pool(Tape& t, std::span<const Var> xs) {
  detail::require_set(t, xs, "max_pool");
  std::vector<const Tensor*> vals;
  for (const auto& x : xs) vals.push_back(&t.value(x));
  auto win = max_winners(vals);
  Tensor out = *vals[0];
  for (std::size_t k = 0; k < out.size(); ++k) out.data[k] = vals[win[k]]->data[k];
  return t.push(std::move(out),
                [in = detail::ids(xs), win = std::move(win)](Tape& tp, std::size_t self) {
                  const auto& g = tp.grad(self);
                  for (std::size_t k = 0; k < g.size(); ++k) tp.grad(in[win[k]]).data[k] += g.data[k];
                });
}

}  // namespace hierslu
