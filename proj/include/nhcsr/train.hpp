#pragma once

// Optimization loop and evaluation protocol: Adam with a halving schedule,
// per-iteration derived RNG streams (so runs are deterministic and resume is
// bitwise), validation cadence, checkpointing, and test-set metrics against
// the bicubic baseline.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nhcsr/dataset.hpp"
#include "nhcsr/losses.hpp"
#include "nhcsr/metrics.hpp"
#include "nhcsr/model.hpp"

namespace nhcsr {

struct TrainConfig {
  int iterations = 2000;
  int batch = 8;
  double lr = 1e-4;
  int halve_at = 1000;   // learning rate halves from this iteration on
  int queries = 256;     // query nodes per sample per step
  int val_every = 100;
  int checkpoint_every = 500;  // 0 = final checkpoint only
  uint64_t seed = 0;
  LossConfig loss;
  ModelConfig model;
  std::string train_path;
  std::string val_path;
  std::string out_checkpoint;
  std::string history_path;
  std::string resume;  // checkpoint to continue from (optional)

  void validate() const {
    if (iterations < 1 || batch < 1 || queries < 1) throw ConfigError("train counts must be positive");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (halve_at < 1 || halve_at > iterations)
      throw ConfigError("halve_at must lie in [1, iterations]");
    if (val_every < 1) throw ConfigError("val_every must be positive");
    if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
    if (train_path.empty()) throw ConfigError("train dataset path required");
  }
};

inline double lr_schedule(int iter, const TrainConfig& cfg) {
  return iter < cfg.halve_at ? cfg.lr : cfg.lr * 0.5;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct OptState {
  ParamMap m, v;
  uint64_t step = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  static OptState init(const Model& model) {
    OptState s;
    for (const auto& [name, t] : model.params) {
      s.m.emplace(name, Tensor::zeros(t.shape()));
      s.v.emplace(name, Tensor::zeros(t.shape()));
    }
    return s;
  }
};

// Standard bias-corrected Adam, applied in place in parameter-name order.
inline void adam_step(Model& model, OptState& opt, double lr) {
  opt.step += 1;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  for (auto& [name, p] : model.params) {
    if (!p.requires_grad()) throw ContractError("adam_step: parameter '" + name + "' has no grad");
    double* m = opt.m.at(name).data();
    double* v = opt.v.at(name).data();
    const double* g = p.grad();
    double* w = p.data();
    for (int64_t i = 0; i < p.numel(); ++i) {
      m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
      v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + opt.eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Query sampling
// ---------------------------------------------------------------------------

struct QueryBatch {
  std::vector<int> nodes;      // linear node indices into the n x n grid
  std::vector<double> xy;      // normalized coordinates, 2 per query
  std::vector<double> targets; // field values at those nodes
};

// Draws n node queries uniformly without replacement from an n_side x n_side
// field, paired with the exact nodal values.
inline QueryBatch sample_queries(const std::vector<double>& field, int n_side, int n, Rng& rng) {
  const int total = n_side * n_side;
  if (static_cast<size_t>(total) != field.size())
    throw ShapeError("sample_queries: field size does not match n_side");
  if (n > total)
    throw ContractError("sample_queries: requested " + std::to_string(n) + " of " +
                        std::to_string(total) + " nodes");
  QueryBatch qb;
  qb.nodes = rng.sample_without_replacement(total, n);
  qb.xy.reserve(static_cast<size_t>(n) * 2);
  qb.targets.reserve(static_cast<size_t>(n));
  for (int node : qb.nodes) {
    int iy = node / n_side, ix = node % n_side;
    qb.xy.push_back(index_to_coord(ix, n_side));
    qb.xy.push_back(index_to_coord(iy, n_side));
    qb.targets.push_back(field[static_cast<size_t>(node)]);
  }
  return qb;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct HistoryRow {
  int iter = 0;
  double lr = 0.0, l1 = 0.0, scs = 0.0, total = 0.0;
  double val_l1 = std::numeric_limits<double>::quiet_NaN();  // NaN = not measured
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<HistoryRow> history;
};

namespace detail {

struct CachedSample {
  Tensor x01;       // [1,N,N] normalized coarse input
  Tensor x01_flat;  // same buffer, cached for the residual path
  Tensor a01;       // [1,E,E]
  std::vector<double> y01;  // normalized fine field
};

inline std::vector<CachedSample> cache_samples(const Dataset& ds, const Model& model) {
  Normalizer nm = Normalizer::from_minmax(model.cfg.norm_min, model.cfg.norm_max);
  std::vector<CachedSample> out;
  out.reserve(ds.samples.size());
  for (const DatasetSample& s : ds.samples) {
    CachedSample c;
    GridField x = s.coarse(static_cast<int>(ds.h));
    c.x01 = normalized_input(model, x);
    c.x01_flat = c.x01;
    c.a01 = coefficient_input(s.coefficient(static_cast<int>(ds.e)));
    c.y01 = nm.apply(s.y);
    out.push_back(std::move(c));
  }
  return out;
}

// Full-grid validation L1 (per-sample sum convention, averaged over samples).
inline double validation_l1(const Model& model, const std::vector<CachedSample>& samples,
                            int fine_n) {
  NoGradGuard ng;
  std::vector<double> xy = node_coords(fine_n);
  double acc = 0.0;
  for (const CachedSample& s : samples) {
    LatentMaps maps = prepare_latents(model, s.x01, s.a01);
    Tensor pred = predict01(model, s.x01, maps, xy);
    const double* p = pred.data();
    double l1 = 0.0;
    for (size_t i = 0; i < s.y01.size(); ++i) l1 += std::abs(p[i] - s.y01[i]);
    acc += l1;
  }
  return acc / static_cast<double>(samples.size());
}

inline std::string history_line(const HistoryRow& r) {
  char buf[256];
  if (std::isnan(r.val_l1))
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,", r.iter, r.lr, r.l1, r.scs,
                  r.total);
  else
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g", r.iter, r.lr, r.l1, r.scs,
                  r.total, r.val_l1);
  return std::string(buf) + "\n";
}

}  // namespace detail

inline TrainResult train(const TrainConfig& cfg_in) {
  TrainConfig cfg = cfg_in;
  cfg.validate();

  Dataset train_ds = read_dataset(cfg.train_path);
  if (train_ds.samples.empty()) throw ConfigError("train dataset is empty");
  Dataset val_ds;
  bool have_val = !cfg.val_path.empty();
  if (have_val) {
    val_ds = read_dataset(cfg.val_path);
    if (val_ds.h != train_ds.h || val_ds.alpha != train_ds.alpha || val_ds.e != train_ds.e)
      throw ConfigError("validation dataset geometry differs from training dataset");
  }

  // Resolve data-dependent defaults.
  if (cfg.loss.p == 0) cfg.loss.p = static_cast<int>(train_ds.h) + 1;
  if (cfg.loss.r == 0) cfg.loss.r = static_cast<int>(train_ds.h) + 1;
  if (cfg.loss.p > cfg.queries)
    throw ConfigError("SCS sample count exceeds queries per step");
  cfg.loss.validate();
  const int fine_n = train_ds.fine_nodes();
  if (cfg.queries > fine_n * fine_n)
    throw ConfigError("queries per step exceed the fine grid node count");

  // Model: fresh init with the dataset's normalization record, or resume.
  Checkpoint ck;
  OptState opt;
  int start_iter = 0;
  if (!cfg.resume.empty()) {
    ck = load_checkpoint(cfg.resume);
    if (!ck.has_opt) throw ConfigError("resume checkpoint lacks optimizer state");
    start_iter = static_cast<int>(ck.model.cfg.trained_iters);
    if (start_iter >= cfg.iterations)
      throw ConfigError("resume checkpoint already has >= the requested iterations");
    opt.m = ck.opt_m;
    opt.v = ck.opt_v;
    opt.step = ck.opt_step;
  } else {
    ModelConfig mc = cfg.model;
    mc.norm_min = train_ds.y_min;
    mc.norm_max = train_ds.y_max;
    mc.trained_iters = 0;
    ck.model = init_params(mc, derive_seed(cfg.seed, "params"));
    opt = OptState::init(ck.model);
  }
  Model& model = ck.model;

  std::vector<detail::CachedSample> train_cache = detail::cache_samples(train_ds, model);
  std::vector<detail::CachedSample> val_cache;
  if (have_val) val_cache = detail::cache_samples(val_ds, model);

  std::ofstream history;
  if (!cfg.history_path.empty()) {
    bool fresh = cfg.resume.empty();
    history.open(cfg.history_path, fresh ? std::ios::trunc : std::ios::app);
    if (!history) throw IoError("cannot open history file: " + cfg.history_path);
    if (fresh) history << "iter,lr,l1,scs,total,val_l1\n";
  }

  auto save = [&](const std::string& path) {
    ck.opt_m = opt.m;
    ck.opt_v = opt.v;
    ck.opt_step = opt.step;
    ck.has_opt = true;
    save_checkpoint(path, ck);
  };

  TrainResult result;
  const int n_train = static_cast<int>(train_cache.size());
  for (int iter = start_iter; iter < cfg.iterations; ++iter) {
    Rng rng(derive_seed(cfg.seed, "it", static_cast<uint64_t>(iter)));

    std::vector<Tensor> pred_rows;
    std::vector<double> target_data;
    pred_rows.reserve(static_cast<size_t>(cfg.batch));
    target_data.reserve(static_cast<size_t>(cfg.batch) * cfg.queries);
    for (int b = 0; b < cfg.batch; ++b) {
      const detail::CachedSample& s =
          train_cache[static_cast<size_t>(rng.below(static_cast<uint64_t>(n_train)))];
      QueryBatch qb = sample_queries(s.y01, fine_n, cfg.queries, rng);
      LatentMaps maps = prepare_latents(model, s.x01, s.a01);
      pred_rows.push_back(predict01(model, s.x01, maps, qb.xy));
      target_data.insert(target_data.end(), qb.targets.begin(), qb.targets.end());
    }
    Tensor pred = stack_rows(pred_rows);
    Tensor target = Tensor::from_data({cfg.batch, cfg.queries}, std::move(target_data));
    LossParts parts = total_loss(pred, target, cfg.loss, rng);

    HistoryRow row;
    row.iter = iter;
    row.lr = lr_schedule(iter, cfg);
    row.l1 = parts.l1;
    row.scs = parts.scs;
    row.total = parts.total.item();
    if (!std::isfinite(row.total)) {
      if (!cfg.out_checkpoint.empty()) {
        try {
          save(cfg.out_checkpoint + ".diverged");
        } catch (...) {
        }
      }
      throw NumericError("training diverged at iteration " + std::to_string(iter) + " (l1=" +
                         std::to_string(parts.l1) + ", scs=" + std::to_string(parts.scs) + ")");
    }

    for (auto& [name, p] : model.params) p.zero_grad();
    backward(parts.total);
    adam_step(model, opt, row.lr);
    model.cfg.trained_iters = static_cast<uint64_t>(iter) + 1;

    if (have_val && (iter + 1) % cfg.val_every == 0)
      row.val_l1 = detail::validation_l1(model, val_cache, fine_n);
    result.history.push_back(row);
    if (history.is_open()) {
      history << detail::history_line(row);
      history.flush();
    }

    bool last = iter + 1 == cfg.iterations;
    bool periodic = cfg.checkpoint_every > 0 && (iter + 1) % cfg.checkpoint_every == 0;
    if (!cfg.out_checkpoint.empty() && (last || periodic)) save(cfg.out_checkpoint);
  }

  ck.opt_m = opt.m;
  ck.opt_v = opt.v;
  ck.opt_step = opt.step;
  ck.has_opt = true;
  result.checkpoint = ck;
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalRow {
  int sample = 0;
  std::string method;  // "model" | "bicubic"
  double mse = 0.0, mae = 0.0, psnr = 0.0, ssim = 0.0;
};

struct EvalSummary {
  std::string method;
  double mse_mean = 0.0, mse_std = 0.0;
  double mae_mean = 0.0, mae_std = 0.0;
  double psnr_mean = 0.0, psnr_std = 0.0;
  double ssim_mean = 0.0, ssim_std = 0.0;
};

struct EvalResult {
  int alpha = 0;
  int fine_n = 0;
  std::vector<EvalRow> rows;
  std::vector<EvalSummary> summary;
  // Mean RAPSD per method over the test set ("model", "bicubic", "target").
  std::map<std::string, std::vector<double>> rapsd_mean;
};

namespace detail {

inline EvalSummary summarize(const std::string& method, const std::vector<EvalRow>& rows) {
  EvalSummary s;
  s.method = method;
  auto stat = [&](auto field, double& mean, double& sd) {
    double acc = 0.0;
    int n = 0;
    for (const EvalRow& r : rows)
      if (r.method == method) {
        acc += field(r);
        ++n;
      }
    mean = acc / n;
    double var = 0.0;
    for (const EvalRow& r : rows)
      if (r.method == method) {
        double d = field(r) - mean;
        var += d * d;
      }
    sd = std::sqrt(var / n);
  };
  stat([](const EvalRow& r) { return r.mse; }, s.mse_mean, s.mse_std);
  stat([](const EvalRow& r) { return r.mae; }, s.mae_mean, s.mae_std);
  stat([](const EvalRow& r) { return r.psnr; }, s.psnr_mean, s.psnr_std);
  stat([](const EvalRow& r) { return r.ssim; }, s.ssim_mean, s.ssim_std);
  return s;
}

}  // namespace detail

// Runs the model and the bicubic baseline over a test dataset; metrics and
// spectra on the dataset's normalized value scale.
inline EvalResult evaluate(const Model& model, const Dataset& ds) {
  if (ds.samples.empty()) throw ConfigError("evaluate: dataset is empty");
  EvalResult res;
  res.alpha = static_cast<int>(ds.alpha);
  res.fine_n = ds.fine_nodes();
  const int coarse_n = ds.coarse_nodes();
  Normalizer nm = Normalizer::from_minmax(ds.y_min, ds.y_max);

  std::map<std::string, std::vector<double>> rapsd_acc;
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    const DatasetSample& s = ds.samples[i];
    GridField x = s.coarse(coarse_n - 1);
    CoefficientMap a = s.coefficient(static_cast<int>(ds.e));
    std::vector<double> target01 = nm.apply(s.y);

    GridField pred = forward(model, x, a, res.fine_n);
    std::vector<double> pred01 = nm.apply(pred.v);

    NoGradGuard ng;
    Tensor bic = bicubic_resize(field_tensor(x), res.fine_n, res.fine_n);
    std::vector<double> bic01 = nm.apply(bic.vec());

    auto push = [&](const std::string& method, const std::vector<double>& v01) {
      EvalRow row;
      row.sample = static_cast<int>(i);
      row.method = method;
      row.mse = mse(v01, target01);
      row.mae = mae(v01, target01);
      row.psnr = psnr(v01, target01);
      row.ssim = ssim(v01, target01, res.fine_n, res.fine_n);
      res.rows.push_back(row);
      std::vector<RapsdBin> bins = rapsd(v01, res.fine_n, res.fine_n);
      auto& acc = rapsd_acc[method];
      if (acc.empty()) acc.assign(bins.size(), 0.0);
      for (size_t k = 0; k < bins.size(); ++k) acc[k] += bins[k].power;
    };
    push("model", pred01);
    push("bicubic", bic01);
    {
      std::vector<RapsdBin> bins = rapsd(target01, res.fine_n, res.fine_n);
      auto& acc = rapsd_acc["target"];
      if (acc.empty()) acc.assign(bins.size(), 0.0);
      for (size_t k = 0; k < bins.size(); ++k) acc[k] += bins[k].power;
    }
  }
  for (auto& [method, acc] : rapsd_acc) {
    for (double& v : acc) v /= static_cast<double>(ds.samples.size());
    res.rapsd_mean.emplace(method, acc);
  }
  res.summary.push_back(detail::summarize("model", res.rows));
  res.summary.push_back(detail::summarize("bicubic", res.rows));
  return res;
}

}  // namespace nhcsr
