#pragma once

// Training objective: per-sample L1 plus the stochastic cosine similarity
// term, Loss = L1 + lambda * (1 - mean cosine over random index draws).

#include "nhcsr/rng.hpp"
#include "nhcsr/tensor.hpp"

namespace nhcsr {

struct LossConfig {
  double lambda = 0.1;  // SCS weight
  int p = 0;            // indices per draw; 0 = resolve to H+1 at training setup
  int r = 0;            // repeat count; 0 = resolve to H+1 at training setup

  void validate() const {
    if (lambda < 0.0) throw ConfigError("loss lambda must be >= 0");
    if (p < 1 || r < 1) throw ConfigError("SCS sample count and repeats must be >= 1");
  }
};

// Mean over the batch of the per-sample L1 norms. pred/target: [B,Q].
inline Tensor l1_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape() || pred.ndim() != 2)
    throw ShapeError("l1_loss: expects matching [B,Q] tensors");
  return mul_scalar(sum(abs(sub(pred, target))), 1.0 / static_cast<double>(pred.size(0)));
}

// Stochastic cosine similarity: R draws of P query indices (uniform, without
// replacement, shared across the batch within a draw); the loss is one minus
// the mean cosine similarity over draws and batch. A zero-norm projection
// contributes similarity 0.
inline Tensor scs_loss(const Tensor& pred, const Tensor& target, const LossConfig& cfg, Rng& rng) {
  cfg.validate();
  if (pred.shape() != target.shape() || pred.ndim() != 2)
    throw ShapeError("scs_loss: expects matching [B,Q] tensors");
  const int b = pred.size(0), q = pred.size(1);
  if (cfg.p > q)
    throw ContractError("scs_loss: P=" + std::to_string(cfg.p) + " exceeds query count " +
                        std::to_string(q));
  Tensor acc = Tensor::zeros({1});
  for (int rep = 0; rep < cfg.r; ++rep) {
    std::vector<int> idx = rng.sample_without_replacement(q, cfg.p);
    Tensor sims = cosine_rows(gather_cols(pred, idx), gather_cols(target, idx));
    acc = add(acc, sum(sims));
  }
  return add_scalar(mul_scalar(acc, -1.0 / static_cast<double>(b * cfg.r)), 1.0);
}

struct LossParts {
  Tensor total;
  double l1 = 0.0;
  double scs = 0.0;
};

// L1 + lambda * SCS. With lambda = 0 the objective is exactly the L1 term;
// the SCS value is still evaluated (outside the graph) so histories always
// record both components, and the RNG stream advances identically.
inline LossParts total_loss(const Tensor& pred, const Tensor& target, const LossConfig& cfg,
                            Rng& rng) {
  LossParts parts;
  Tensor l1 = l1_loss(pred, target);
  parts.l1 = l1.item();
  if (cfg.lambda == 0.0) {
    NoGradGuard ng;
    parts.scs = scs_loss(pred, target, cfg, rng).item();
    parts.total = l1;
  } else {
    Tensor scs = scs_loss(pred, target, cfg, rng);
    parts.scs = scs.item();
    parts.total = add(l1, mul_scalar(scs, cfg.lambda));
  }
  return parts;
}

}  // namespace nhcsr
