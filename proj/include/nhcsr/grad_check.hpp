#pragma once

// Finite-difference gradient verification for reverse-mode rules.

#include <functional>
#include <vector>

#include "nhcsr/tensor.hpp"

namespace nhcsr {

// Compares analytic gradients of `closure` (a scalar-valued function of the
// given inputs, re-evaluated on each call from the inputs' current data)
// against central differences. Returns the max over all input elements of
// |analytic - central| / max(1, |analytic|).
inline double grad_check(const std::function<Tensor()>& closure, std::vector<Tensor> inputs,
                         double eps = 1e-6) {
  for (Tensor& t : inputs) {
    if (!t.requires_grad()) throw ContractError("grad_check: all inputs must require grad");
    t.zero_grad();
  }
  Tensor loss = closure();
  backward(loss);

  double max_err = 0.0;
  for (Tensor& t : inputs) {
    std::vector<double> analytic(t.grad_vec());
    for (int64_t i = 0; i < t.numel(); ++i) {
      double saved = t.data()[i];
      t.data()[i] = saved + eps;
      double fp = closure().item();
      t.data()[i] = saved - eps;
      double fm = closure().item();
      t.data()[i] = saved;
      double central = (fp - fm) / (2.0 * eps);
      double a = analytic[static_cast<size_t>(i)];
      double err = std::abs(a - central) / std::max(1.0, std::abs(a));
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace nhcsr
