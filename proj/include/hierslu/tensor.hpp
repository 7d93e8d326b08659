#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hierslu/error.hpp"

namespace hierslu {

// Dense row-major matrix of doubles. Vectors are (n x 1).
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 1;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  static Tensor vector(std::vector<double> v) {
    Tensor t;
    t.rows = v.size();
    t.cols = 1;
    t.data = std::move(v);
    return t;
  }

  static Tensor scalar(double x) { return vector({x}); }

  std::size_t size() const { return data.size(); }
  bool is_vector() const { return cols == 1; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  void fill(double x) { data.assign(data.size(), x); }

  bool operator==(const Tensor&) const = default;
};

inline std::string shape_string(const Tensor& t) {
  return "(" + std::to_string(t.rows) + "x" + std::to_string(t.cols) + ")";
}

// Learnable parameters and their accumulated gradients, keyed by name.
class ParameterStore {
 public:
  template <typename Map>
  static auto& lookup(Map& m, const std::string& name) {
    const auto it = m.find(name);
    if (it == m.end()) throw Error(ErrorCode::UnknownEntry, "no parameter " + name);
    return it->second;
  }

  Tensor& add(const std::string& name, Tensor value) {
    if (params_.count(name)) throw Error(ErrorCode::InvalidArgument, "duplicate parameter " + name);
    grads_[name] = Tensor(value.rows, value.cols);
    return params_[name] = std::move(value);
  }

  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  Tensor& value(const std::string& name) { return lookup(params_, name); }
  const Tensor& value(const std::string& name) const { return lookup(params_, name); }
  Tensor& grad(const std::string& name) { return lookup(grads_, name); }
  const Tensor& grad(const std::string& name) const { return lookup(grads_, name); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [n, _] : params_) out.push_back(n);
    return out;
  }

  std::size_t num_coordinates() const {
    std::size_t n = 0;
    for (const auto& [_, t] : params_) n += t.size();
    return n;
  }

  void zero_grad() {
    for (auto& [_, g] : grads_) g.fill(0.0);
  }

  const std::map<std::string, Tensor>& params() const { return params_; }

 private:
  std::map<std::string, Tensor> params_;
  std::map<std::string, Tensor> grads_;
};

}  // namespace hierslu
