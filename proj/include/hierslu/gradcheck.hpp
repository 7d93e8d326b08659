#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hierslu/autodiff.hpp"

namespace hierslu {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
  bool passed = true;
};

// Builds a scalar loss on a fresh tape from the current store values.
using TapedLoss = std::function<Var(Tape&, const ParameterStore&)>;

inline double evaluate_loss(const TapedLoss& f, const ParameterStore& store) {
  Tape tape;
  const Var loss = f(tape, store);
  return tape.value(loss)[0];
}

// Compares the taped gradient of every coordinate against the central
// difference (f(x+eps) - f(x-eps)) / (2 eps). Relative error is
// |a - n| / max(1e-8, |a| + |n|). Store gradients are left zeroed.
inline GradCheckReport check_gradients(const TapedLoss& f, ParameterStore& store, double eps,
                                       double tol) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "gradcheck eps must be positive");
  store.zero_grad();
  {
    Tape tape;
    const Var loss = f(tape, store);
    backward(tape, loss, store);
  }
  GradCheckReport report;
  for (const auto& name : store.names()) {
    const Tensor analytic = store.grad(name);
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      double& x = store.value(name).data[k];
      const double saved = x;
      x = saved + eps;
      const double up = evaluate_loss(f, store);
      x = saved - eps;
      const double down = evaluate_loss(f, store);
      x = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[k];
      const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      if (report.coordinates++ == 0 || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = name;
        report.worst_index = k;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  store.zero_grad();
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace hierslu
