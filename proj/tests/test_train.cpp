// Optimizer, query sampling, the deterministic training loop (including
// bitwise resume and divergence handling), and the evaluation protocol.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "nhcsr/train.hpp"
#include "test_util.hpp"

using namespace nhcsr;
using nhtest::scratch_path;

namespace {

ModelConfig tiny_model() {
  ModelConfig mc;
  mc.c = 2;
  mc.blocks = 1;
  mc.d = 2;
  mc.neigh = 3;
  mc.gabor_layers = 1;
  mc.enc_dim = 2;
  mc.mlp_hidden = 4;
  mc.shuffle_u = 2;
  mc.encoding = Encoding::gabor;
  mc.multiscale = true;
  return mc;
}

// Writes a small dataset and returns its path.
std::string make_dataset(const std::string& name, int n, int alpha, uint64_t seed, int e = 4,
                         int h = 4) {
  BuildConfig bc;
  bc.n_samples = n;
  bc.e = e;
  bc.h = h;
  bc.alpha = alpha;
  bc.pattern = parse_pattern("random");
  bc.seed = seed;
  Dataset ds = build_dataset(bc);
  std::string path = scratch_path("train", name);
  write_dataset(ds, path);
  return path;
}

TrainConfig base_train_config(const std::string& dir_tag) {
  TrainConfig cfg;
  cfg.iterations = 20;
  cfg.batch = 2;
  cfg.lr = 3e-3;
  cfg.halve_at = 10;
  cfg.queries = 16;
  cfg.val_every = 5;
  cfg.checkpoint_every = 0;
  cfg.seed = 99;
  cfg.loss.lambda = 0.1;
  cfg.loss.p = 8;
  cfg.loss.r = 2;
  cfg.model = tiny_model();
  cfg.train_path = make_dataset(dir_tag + "_train.nhcd", 3, 2, 1);
  cfg.val_path = make_dataset(dir_tag + "_val.nhcd", 2, 2, 2);
  return cfg;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

TEST(Adam, FirstStepIsSignScaledByLrAndZeroGradFreezes) {
  Model m;
  m.cfg = tiny_model();
  Tensor w = Tensor::from_data({3}, {1.0, 2.0, 3.0}, true);
  m.params.emplace("w", w);
  Tensor dir = Tensor::from_data({3}, {0.5, -2.0, 0.0});
  backward(sum(mul(w, dir)));  // dL/dw = dir

  OptState opt = OptState::init(m);
  adam_step(m, opt, 0.01);
  EXPECT_EQ(opt.step, 1u);
  // Bias-corrected first step is lr * g/(|g| + eps) ~= lr * sign(g).
  EXPECT_NEAR(w.vec()[0], 1.0 - 0.01, 1e-6);
  EXPECT_NEAR(w.vec()[1], 2.0 + 0.01, 1e-6);
  EXPECT_EQ(w.vec()[2], 3.0);  // zero gradient: exactly no movement

  Model frozen;
  frozen.params.emplace("w", Tensor::from_data({1}, {1.0}, false));
  OptState opt2 = OptState::init(frozen);
  EXPECT_THROW(adam_step(frozen, opt2, 0.01), ContractError);
}

TEST(Adam, StepsShrinkAsMomentsAccumulate) {
  // With a constant gradient the update magnitude stays ~lr (never explodes).
  Model m;
  Tensor w = Tensor::from_data({1}, {0.0}, true);
  m.params.emplace("w", w);
  OptState opt = OptState::init(m);
  double prev = 0.0;
  for (int it = 0; it < 25; ++it) {
    w.zero_grad();
    backward(mul_scalar(sum(w), 2.0));  // grad = 2 every step
    adam_step(m, opt, 0.01);
    double step_size = std::abs(w.vec()[0] - prev);
    EXPECT_LE(step_size, 0.0101);
    EXPECT_GT(step_size, 0.005);
    prev = w.vec()[0];
  }
}

// ---------------------------------------------------------------------------
// Schedule and query sampling
// ---------------------------------------------------------------------------

TEST(Schedule, HalvesExactlyAtTheConfiguredIteration) {
  TrainConfig cfg;
  cfg.lr = 4e-3;
  cfg.halve_at = 10;
  EXPECT_EQ(lr_schedule(0, cfg), 4e-3);
  EXPECT_EQ(lr_schedule(9, cfg), 4e-3);
  EXPECT_EQ(lr_schedule(10, cfg), 2e-3);
  EXPECT_EQ(lr_schedule(10000, cfg), 2e-3);
}

TEST(SampleQueries, PermutationCoordinatesAndTargetsAgree) {
  const int n_side = 5;
  std::vector<double> field(25);
  for (int i = 0; i < 25; ++i) field[static_cast<size_t>(i)] = 10.0 * i;

  Rng rng(7);
  QueryBatch qb = sample_queries(field, n_side, 25, rng);
  std::vector<int> sorted = qb.nodes;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 25; ++i) EXPECT_EQ(sorted[static_cast<size_t>(i)], i);  // a permutation

  for (size_t k = 0; k < qb.nodes.size(); ++k) {
    int node = qb.nodes[k];
    EXPECT_EQ(qb.targets[k], field[static_cast<size_t>(node)]);
    EXPECT_EQ(coord_to_index(qb.xy[2 * k], n_side), node % n_side);      // x over columns
    EXPECT_EQ(coord_to_index(qb.xy[2 * k + 1], n_side), node / n_side);  // y over rows
  }

  Rng r1(13), r2(13), r3(14);
  QueryBatch a = sample_queries(field, n_side, 8, r1);
  QueryBatch b = sample_queries(field, n_side, 8, r2);
  QueryBatch c = sample_queries(field, n_side, 8, r3);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_NE(a.nodes, c.nodes);

  Rng r4(1);
  EXPECT_THROW(sample_queries(field, n_side, 26, r4), ContractError);
  EXPECT_THROW(sample_queries(field, 4, 4, r4), ShapeError);
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

TEST(Train, ConfigValidation) {
  TrainConfig cfg = base_train_config("val");
  cfg.iterations = 0;
  EXPECT_THROW(train(cfg), ConfigError);
  cfg = base_train_config("val");
  cfg.lr = 0.0;
  EXPECT_THROW(train(cfg), ConfigError);
  cfg = base_train_config("val");
  cfg.halve_at = cfg.iterations + 1;
  EXPECT_THROW(train(cfg), ConfigError);
  cfg = base_train_config("val");
  cfg.val_every = 0;
  EXPECT_THROW(train(cfg), ConfigError);
  cfg = base_train_config("val");
  cfg.train_path.clear();
  EXPECT_THROW(train(cfg), ConfigError);
  cfg = base_train_config("val");
  cfg.loss.p = cfg.queries + 1;  // SCS draw wider than the per-step queries
  EXPECT_THROW(train(cfg), ConfigError);
  cfg = base_train_config("val");
  cfg.queries = 100;  // fine grid has 9*9 = 81 nodes
  EXPECT_THROW(train(cfg), ConfigError);
  cfg = base_train_config("val");
  cfg.val_path = make_dataset("val_geom.nhcd", 1, 3, 5);  // alpha mismatch
  EXPECT_THROW(train(cfg), ConfigError);
}

TEST(Train, LossDecreasesAndHistoryRecordsCadence) {
  // Single-sample memorization: full-grid validation L1 on the training
  // sample must fall well below its early-training level.
  TrainConfig cfg = base_train_config("dec");
  cfg.train_path = make_dataset("dec_train.nhcd", 1, 2, 1);
  cfg.val_path = cfg.train_path;
  cfg.model.c = 4;
  cfg.model.d = 4;
  cfg.model.enc_dim = 4;
  cfg.model.mlp_hidden = 8;
  cfg.iterations = 400;
  cfg.halve_at = 200;
  cfg.queries = 32;
  cfg.val_every = 50;
  cfg.out_checkpoint = scratch_path("train", "dec.nhck");
  cfg.history_path = scratch_path("train", "dec_history.csv");

  TrainResult res = train(cfg);
  ASSERT_EQ(res.history.size(), 400u);

  std::vector<double> vals;
  for (const HistoryRow& row : res.history) {
    EXPECT_EQ(row.lr, row.iter < 200 ? 3e-3 : 1.5e-3);
    EXPECT_TRUE(std::isfinite(row.l1));
    EXPECT_TRUE(std::isfinite(row.scs));
    bool val_iter = (row.iter + 1) % cfg.val_every == 0;
    EXPECT_EQ(!std::isnan(row.val_l1), val_iter) << row.iter;
    if (val_iter) vals.push_back(row.val_l1);
  }
  ASSERT_EQ(vals.size(), 8u);
  EXPECT_LT(vals.back(), 2.0) << "training made no progress";
  EXPECT_LT(vals.back(), 0.5 * vals.front());

  // Final checkpoint carries the optimizer and the full iteration count.
  Checkpoint ck = load_checkpoint(cfg.out_checkpoint);
  EXPECT_TRUE(ck.has_opt);
  EXPECT_EQ(ck.model.cfg.trained_iters, 400u);
  EXPECT_EQ(ck.opt_step, 400u);
  EXPECT_EQ(ck.model.cfg.norm_min, read_dataset(cfg.train_path).y_min);

  std::vector<std::string> lines = read_lines(cfg.history_path);
  ASSERT_EQ(lines.size(), 401u);
  EXPECT_EQ(lines[0], "iter,lr,l1,scs,total,val_l1");
  EXPECT_EQ(lines[1].substr(0, 2), "0,");
  // Non-validation rows end with the empty val column.
  EXPECT_EQ(lines[1].back(), ',');
  EXPECT_NE(lines[50].back(), ',');  // iter 49 is a validation row
}

TEST(Train, SameSeedIsBitwiseReproducible) {
  TrainConfig cfg = base_train_config("rep");
  cfg.out_checkpoint = scratch_path("train", "rep_a.nhck");
  train(cfg);
  cfg.out_checkpoint = scratch_path("train", "rep_b.nhck");
  train(cfg);
  EXPECT_EQ(read_file(scratch_path("train", "rep_a.nhck")),
            read_file(scratch_path("train", "rep_b.nhck")));

  cfg.seed = 100;
  cfg.out_checkpoint = scratch_path("train", "rep_c.nhck");
  train(cfg);
  EXPECT_NE(read_file(scratch_path("train", "rep_a.nhck")),
            read_file(scratch_path("train", "rep_c.nhck")));
}

TEST(Train, ResumeReproducesTheSingleRunBitwise) {
  // One 20-iteration run...
  TrainConfig whole = base_train_config("res");
  whole.out_checkpoint = scratch_path("train", "whole.nhck");
  whole.history_path = scratch_path("train", "whole_history.csv");
  train(whole);

  // ...must equal 10 iterations + a resumed 10, checkpoint and history both.
  TrainConfig part = whole;
  part.iterations = 10;
  part.out_checkpoint = scratch_path("train", "part.nhck");
  part.history_path = scratch_path("train", "part_history.csv");
  train(part);

  TrainConfig rest = whole;
  rest.resume = part.out_checkpoint;
  rest.out_checkpoint = scratch_path("train", "rest.nhck");
  rest.history_path = part.history_path;  // appends
  train(rest);

  EXPECT_EQ(read_file(whole.out_checkpoint), read_file(rest.out_checkpoint));
  EXPECT_EQ(read_lines(whole.history_path), read_lines(part.history_path));

  // Resuming past the requested horizon or without optimizer state fails.
  TrainConfig bad = whole;
  bad.resume = whole.out_checkpoint;
  EXPECT_THROW(train(bad), ConfigError);

  Checkpoint bare;
  bare.model = load_checkpoint(part.out_checkpoint).model;
  std::string bare_path = scratch_path("train", "bare.nhck");
  save_checkpoint(bare_path, bare);
  TrainConfig noopt = whole;
  noopt.resume = bare_path;
  EXPECT_THROW(train(noopt), ConfigError);
}

TEST(Train, DivergenceSavesEmergencyCheckpointAndRaisesNumericError) {
  TrainConfig cfg = base_train_config("div");
  cfg.model.blocks = 0;        // keeps the logits finite while the head overflows
  cfg.model.multiscale = false;
  cfg.lr = 1e55;
  cfg.iterations = 10;
  cfg.halve_at = 10;
  cfg.loss.lambda = 0.0;
  cfg.loss.p = 4;
  cfg.loss.r = 1;
  cfg.out_checkpoint = scratch_path("train", "div.nhck");

  EXPECT_THROW(train(cfg), NumericError);
  EXPECT_FALSE(std::filesystem::exists(cfg.out_checkpoint));
  std::string emergency = cfg.out_checkpoint + ".diverged";
  ASSERT_TRUE(std::filesystem::exists(emergency));
  Checkpoint ck = load_checkpoint(emergency);  // intact, loadable state
  EXPECT_TRUE(ck.has_opt);
  EXPECT_GE(ck.model.cfg.trained_iters, 1u);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

TEST(Evaluate, UnitScaleFreshModelIsExactEverywhere) {
  // At alpha = 1 the fine field equals the coarse field; both the fresh model
  // (zero head) and same-size bicubic reproduce it exactly.
  std::string path = make_dataset("eval_a1.nhcd", 2, 1, 3, /*e=*/8, /*h=*/8);
  Dataset ds = read_dataset(path);
  ModelConfig mc = tiny_model();
  mc.norm_min = ds.y_min;
  mc.norm_max = ds.y_max;
  Model model = init_params(mc, 1);

  EvalResult res = evaluate(model, ds);
  EXPECT_EQ(res.alpha, 1);
  EXPECT_EQ(res.fine_n, 9);
  ASSERT_EQ(res.rows.size(), 4u);  // 2 samples x {model, bicubic}
  for (const EvalRow& row : res.rows) {
    EXPECT_EQ(row.mse, 0.0) << row.method;
    EXPECT_EQ(row.mae, 0.0) << row.method;
    EXPECT_TRUE(std::isinf(row.psnr)) << row.method;
    EXPECT_NEAR(row.ssim, 1.0, 1e-12) << row.method;
  }
  EXPECT_EQ(res.rapsd_mean.count("target"), 1u);
  EXPECT_EQ(res.rapsd_mean.at("target").size(), 5u);  // radii 0..4 on a 9x9 grid
}

TEST(Evaluate, SummaryReportsPopulationStatistics) {
  std::string path = make_dataset("eval_sum.nhcd", 3, 2, 4);
  Dataset ds = read_dataset(path);
  ModelConfig mc = tiny_model();
  mc.norm_min = ds.y_min;
  mc.norm_max = ds.y_max;
  Model model = init_params(mc, 2);

  EvalResult res = evaluate(model, ds);
  ASSERT_EQ(res.rows.size(), 6u);
  ASSERT_EQ(res.summary.size(), 2u);
  for (const EvalSummary& s : res.summary) {
    // Independent recomputation of mean and population standard deviation.
    std::vector<double> vals;
    for (const EvalRow& r : res.rows)
      if (r.method == s.method) vals.push_back(r.mse);
    ASSERT_EQ(vals.size(), 3u);
    double mean = (vals[0] + vals[1] + vals[2]) / 3.0;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    double sd = std::sqrt(var / 3.0);
    EXPECT_NEAR(s.mse_mean, mean, 1e-15);
    EXPECT_NEAR(s.mse_std, sd, 1e-15);
    EXPECT_TRUE(std::isfinite(s.ssim_mean));
    EXPECT_LE(s.ssim_mean, 1.0 + 1e-12);
  }
  EXPECT_EQ(res.summary[0].method, "model");
  EXPECT_EQ(res.summary[1].method, "bicubic");

  Dataset empty;
  empty.e = 4;
  empty.h = 4;
  empty.alpha = 2;
  EXPECT_THROW(evaluate(model, empty), ConfigError);
}
