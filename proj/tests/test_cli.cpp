// End-to-end tests of the command-line tool: exit codes, the one-line error
// contract on stderr, manifests with artifact hashes, replay verification,
// and byte-exact agreement of plot/infer outputs with the library routines.
//
// The binary under test is located via the NHCSR_BIN compile definition.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "nhcsr/nhcsr.hpp"
#include "test_util.hpp"

using namespace nhcsr;
using nhtest::scratch_path;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  const char* bin = NHCSR_BIN;  // injected by the build
  static int counter = 0;
  std::string base = scratch_path("cli_io", "run" + std::to_string(counter++));
  std::string cmd = std::string(bin) + " " + args + " >" + base + ".out 2>" + base + ".err";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(base + ".out");
  r.err = read_file(base + ".err");
  return r;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

bool is_error_line(const std::string& line, const std::string& kind, const std::string& code) {
  std::string prefix = "error kind=" + kind + " code=" + code + " msg=\"";
  return line.rfind(prefix, 0) == 0 && line.back() == '"';
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Generates a small dataset through the CLI and returns its path.
std::string cli_dataset(const std::string& name, int n, uint64_t seed,
                        const std::string& pattern = "random") {
  std::string path = scratch_path("cli", name);
  RunResult r = run_cli("gen-data --out " + path + " --n " + std::to_string(n) +
                        " --e 4 --h 4 --alpha 2 --pattern " + pattern + " --seed " +
                        std::to_string(seed));
  EXPECT_EQ(r.code, 0) << r.err;
  return path;
}

std::string tiny_train_flags() {
  return " --c 2 --blocks 1 --d 2 --neigh 3 --gabor-layers 1 --enc-dim 2 --mlp-hidden 4"
         " --shuffle-u 2 --encoding gabor --iterations 6 --batch 2 --lr 3e-3 --halve-at 3"
         " --queries 12 --scs-p 6 --scs-r 2 --val-every 3 --checkpoint-every 0 --seed 9"
         " --lambda 0.1";
}

}  // namespace

TEST(Cli, HelpExitsZeroAndUsageErrorsExitTwo) {
  RunResult help = run_cli("--help");
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("gen-data"), std::string::npos);
  EXPECT_NE(help.out.find("replay"), std::string::npos);

  RunResult sub_help = run_cli("train --help");
  EXPECT_EQ(sub_help.code, 0);
  EXPECT_NE(sub_help.out.find("--iterations"), std::string::npos);

  RunResult none = run_cli("");
  EXPECT_EQ(none.code, 2);
  EXPECT_EQ(first_line(none.err).rfind("error kind=usage code=", 0), 0u);

  RunResult unknown = run_cli("frobnicate");
  EXPECT_EQ(unknown.code, 2);

  RunResult missing = run_cli("gen-data --n 2");
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(first_line(missing.err).rfind("error kind=usage code=", 0), 0u);
}

TEST(Cli, DataErrorsUseTheErrorLineContract) {
  std::string out = scratch_path("cli", "bad.nhcd");
  RunResult r = run_cli("gen-data --out " + out + " --pattern nope");
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(is_error_line(first_line(r.err), "data", "config")) << r.err;

  RunResult r2 = run_cli("infer --checkpoint /nonexistent.nhck --data /nonexistent.nhcd --out " +
                         scratch_path("cli", "x.nhgf"));
  EXPECT_EQ(r2.code, 3);
  EXPECT_TRUE(is_error_line(first_line(r2.err), "data", "io")) << r2.err;
}

TEST(Cli, GenDataWritesManifestAndConfigFileIsEquivalent) {
  std::string ds_path = scratch_path("cli", "gen.nhcd");
  std::string man_path = scratch_path("cli", "gen.manifest.json");
  RunResult r = run_cli("gen-data --out " + ds_path +
                        " --n 2 --e 4 --h 4 --alpha 2 --pattern checkerboard:2 --seed 5"
                        " --manifest " + man_path);
  ASSERT_EQ(r.code, 0) << r.err;

  Dataset ds = read_dataset(ds_path);
  EXPECT_EQ(ds.samples.size(), 2u);
  EXPECT_EQ(ds.e, 4u);
  EXPECT_EQ(ds.h, 4u);
  EXPECT_EQ(ds.alpha, 2u);

  nlohmann::json j = nlohmann::json::parse(read_file(man_path));
  EXPECT_EQ(j.at("command"), "gen-data");
  EXPECT_EQ(j.at("config").at("pattern"), "checkerboard:2");
  EXPECT_EQ(j.at("config").at("seed"), "5");
  ASSERT_EQ(j.at("outputs").size(), 1u);
  EXPECT_EQ(j.at("outputs")[0].at("path"), ds_path);
  EXPECT_EQ(j.at("outputs")[0].at("crc32").get<uint32_t>(), file_crc32(ds_path));
  EXPECT_TRUE(j.contains("started_at"));
  EXPECT_TRUE(j.contains("wall_clock_sec"));

  // The same run driven by a key=value config file produces the same bytes.
  std::string ds2_path = scratch_path("cli", "gen2.nhcd");
  std::string cfg_path = scratch_path("cli", "gen.ini");
  write_file(cfg_path, "[gen-data]\nout=" + ds2_path +
                           "\nn=2\ne=4\nh=4\nalpha=2\npattern=checkerboard:2\nseed=5\n");
  RunResult r2 = run_cli("--config " + cfg_path + " gen-data");
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_EQ(read_file(ds_path), read_file(ds2_path));
  // Default manifest lands next to the dataset.
  EXPECT_TRUE(std::filesystem::exists(ds2_path + ".manifest.json"));
}

TEST(Cli, TrainInferEvalPipeline) {
  std::string train_ds = cli_dataset("p_train.nhcd", 2, 1);
  std::string val_ds = cli_dataset("p_val.nhcd", 1, 2);
  std::string ck = scratch_path("cli", "p.nhck");
  std::string hist = scratch_path("cli", "p_history.csv");

  RunResult tr = run_cli("train --train " + train_ds + " --val " + val_ds + " --out " + ck +
                         " --history " + hist + tiny_train_flags());
  ASSERT_EQ(tr.code, 0) << tr.err;
  Checkpoint loaded = load_checkpoint(ck);
  EXPECT_EQ(loaded.model.cfg.trained_iters, 6u);
  EXPECT_TRUE(loaded.has_opt);
  ASSERT_EQ(read_lines(hist).size(), 7u);
  EXPECT_EQ(read_lines(hist)[0], "iter,lr,l1,scs,total,val_l1");

  // Inference at the dataset's factor and at explicit alternatives.
  std::string y_def = scratch_path("cli", "p_def.nhgf");
  ASSERT_EQ(run_cli("infer --checkpoint " + ck + " --data " + train_ds + " --out " + y_def).code, 0);
  EXPECT_EQ(read_gridfile(y_def).n, 9);

  std::string y_a4 = scratch_path("cli", "p_a4.nhgf");
  ASSERT_EQ(run_cli("infer --checkpoint " + ck + " --data " + train_ds +
                    " --alpha 4 --sample 1 --out " + y_a4)
                .code,
            0);
  EXPECT_EQ(read_gridfile(y_a4).n, 17);

  std::string y_n13 = scratch_path("cli", "p_n13.nhgf");
  ASSERT_EQ(
      run_cli("infer --checkpoint " + ck + " --data " + train_ds + " --nodes 13 --out " + y_n13)
          .code,
      0);
  EXPECT_EQ(read_gridfile(y_n13).n, 13);

  RunResult conflict = run_cli("infer --checkpoint " + ck + " --data " + train_ds +
                               " --alpha 4 --nodes 13 --out " + y_n13);
  EXPECT_EQ(conflict.code, 2);
  EXPECT_TRUE(is_error_line(first_line(conflict.err), "usage", "usage")) << conflict.err;

  RunResult oor = run_cli("infer --checkpoint " + ck + " --data " + train_ds +
                          " --sample 7 --out " + y_n13);
  EXPECT_EQ(oor.code, 3);
  EXPECT_TRUE(is_error_line(first_line(oor.err), "data", "config")) << oor.err;

  // Evaluation over two datasets: per-sample rows, summaries, and spectra.
  std::string eval_dir = scratch_path("cli", "p_eval");
  RunResult ev = run_cli("eval --checkpoint " + ck + " --data " + train_ds + " --data " + val_ds +
                         " --out-dir " + eval_dir);
  ASSERT_EQ(ev.code, 0) << ev.err;
  std::vector<std::string> metrics = read_lines(eval_dir + "/metrics.csv");
  ASSERT_EQ(metrics.size(), 7u);  // header + (2 + 1 samples) x 2 methods
  EXPECT_EQ(metrics[0], "alpha,sample,method,mse,mae,psnr,ssim");
  EXPECT_EQ(metrics[1].substr(0, 2), "2,");
  std::vector<std::string> summary = read_lines(eval_dir + "/summary.csv");
  ASSERT_EQ(summary.size(), 5u);  // header + 2 datasets x 2 methods
  EXPECT_EQ(summary[0],
            "alpha,method,n_samples,mse_mean,mse_std,mae_mean,mae_std,psnr_mean,psnr_std,"
            "ssim_mean,ssim_std");
  std::vector<std::string> rapsd_rows = read_lines(eval_dir + "/rapsd.csv");
  ASSERT_EQ(rapsd_rows.size(), 31u);  // header + 2 datasets x 3 methods x radii 0..4
  EXPECT_EQ(rapsd_rows[0], "alpha,method,radius,power");
}

TEST(Cli, ReplayReproducesRunsAndDetectsCrcDrift) {
  std::string ds_path = scratch_path("cli", "r.nhcd");
  std::string man_path = scratch_path("cli", "r.manifest.json");
  ASSERT_EQ(run_cli("gen-data --out " + ds_path + " --n 2 --e 4 --h 4 --alpha 2"
                    " --pattern random --seed 11 --manifest " + man_path)
                .code,
            0);
  uint32_t crc_before = file_crc32(ds_path);

  RunResult rep = run_cli("replay " + man_path);
  EXPECT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(file_crc32(ds_path), crc_before);  // regeneration is bitwise
  EXPECT_TRUE(std::filesystem::exists(man_path + ".replay.manifest.json"));

  // A train run (checkpoint + history outputs) replays bitwise too.
  std::string ck = scratch_path("cli", "r.nhck");
  std::string hist = scratch_path("cli", "r_history.csv");
  std::string tman = scratch_path("cli", "r_train.manifest.json");
  ASSERT_EQ(run_cli("train --train " + ds_path + " --out " + ck + " --history " + hist +
                    " --manifest " + tman + tiny_train_flags())
                .code,
            0);
  EXPECT_EQ(run_cli("replay " + tman).code, 0);

  // Tampering with a recorded output hash must fail verification.
  nlohmann::json j = nlohmann::json::parse(read_file(man_path));
  j["outputs"][0]["crc32"] = j["outputs"][0]["crc32"].get<uint32_t>() ^ 1u;
  write_file(man_path, j.dump(2) + "\n");
  RunResult bad = run_cli("replay " + man_path);
  EXPECT_EQ(bad.code, 3);
  EXPECT_TRUE(is_error_line(first_line(bad.err), "data", "io")) << bad.err;

  EXPECT_EQ(run_cli("replay " + scratch_path("cli", "missing.manifest.json")).code, 3);
}

TEST(Cli, PlotMatchesTheLibraryRenderingByteForByte) {
  std::string ds_path = cli_dataset("plot.nhcd", 1, 3, "checkerboard:2");
  Dataset ds = read_dataset(ds_path);

  // Fine field, default jet colormap and gain.
  std::string img = scratch_path("cli", "plot_y.ppm");
  ASSERT_EQ(run_cli("plot --data " + ds_path + " --which y --out " + img).code, 0);
  GridField y = ds.samples[0].fine(static_cast<int>(ds.h), static_cast<int>(ds.alpha));
  PlotOptions jet;
  std::vector<uint8_t> px = render_field(y.v, jet);
  std::string expected = "P6\n9 9\n255\n";
  expected.append(reinterpret_cast<const char*>(px.data()), px.size());
  EXPECT_EQ(read_file(img), expected);

  // Grayscale is a P5 map of the same pipeline.
  std::string gray = scratch_path("cli", "plot_x.pgm");
  ASSERT_EQ(
      run_cli("plot --data " + ds_path + " --which x --colormap gray --out " + gray).code, 0);
  GridField x = ds.samples[0].coarse(static_cast<int>(ds.h));
  PlotOptions gopt;
  gopt.colormap = "gray";
  std::vector<uint8_t> gpx = render_field(x.v, gopt);
  std::string gexp = "P5\n5 5\n255\n";
  gexp.append(reinterpret_cast<const char*>(gpx.data()), gpx.size());
  EXPECT_EQ(read_file(gray), gexp);

  // Coefficient channel renders the E x E mask.
  std::string coef_img = scratch_path("cli", "plot_a.ppm");
  ASSERT_EQ(run_cli("plot --data " + ds_path + " --which a --out " + coef_img).code, 0);
  EXPECT_EQ(read_file(coef_img).substr(0, 9), "P6\n4 4\n25");

  // Slices CSV equals the library writer's output.
  std::string slices = scratch_path("cli", "plot_slices.csv");
  ASSERT_EQ(run_cli("plot --data " + ds_path + " --which y --out " + img + " --slices " + slices)
                .code,
            0);
  std::string slices_ref = scratch_path("cli", "plot_slices_ref.csv");
  write_slices_csv(slices_ref, y);
  EXPECT_EQ(read_file(slices), read_file(slices_ref));

  // Difference plots: |a - b| with the boosted default gain of 20.
  GridField f1(5), f2(5);
  Rng rng(9);
  for (int i = 0; i < 25; ++i) {
    f1.v[static_cast<size_t>(i)] = rng.uniform(0.0, 1.0);
    f2.v[static_cast<size_t>(i)] = rng.uniform(0.0, 1.0);
  }
  std::string p1 = scratch_path("cli", "f1.nhgf"), p2 = scratch_path("cli", "f2.nhgf");
  write_gridfile(f1, p1);
  write_gridfile(f2, p2);
  std::string diff_img = scratch_path("cli", "diff.ppm");
  ASSERT_EQ(run_cli("plot --field " + p1 + " --compare " + p2 + " --out " + diff_img).code, 0);
  GridField d(5);
  for (int i = 0; i < 25; ++i)
    d.v[static_cast<size_t>(i)] =
        std::abs(f1.v[static_cast<size_t>(i)] - f2.v[static_cast<size_t>(i)]);
  PlotOptions dopt;
  dopt.gain = 20.0;
  std::vector<uint8_t> dpx = render_field(d.v, dopt);
  std::string dexp = "P6\n5 5\n255\n";
  dexp.append(reinterpret_cast<const char*>(dpx.data()), dpx.size());
  EXPECT_EQ(read_file(diff_img), dexp);

  // An explicit --gain overrides the compare default.
  std::string diff3_img = scratch_path("cli", "diff3.ppm");
  ASSERT_EQ(
      run_cli("plot --field " + p1 + " --compare " + p2 + " --gain 3 --out " + diff3_img).code, 0);
  dopt.gain = 3.0;
  std::vector<uint8_t> dpx3 = render_field(d.v, dopt);
  std::string dexp3 = "P6\n5 5\n255\n";
  dexp3.append(reinterpret_cast<const char*>(dpx3.data()), dpx3.size());
  EXPECT_EQ(read_file(diff3_img), dexp3);

  // Exactly one source must be given.
  RunResult both = run_cli("plot --field " + p1 + " --data " + ds_path + " --out " + diff_img);
  EXPECT_EQ(both.code, 2);
  RunResult neither = run_cli("plot --out " + diff_img);
  EXPECT_EQ(neither.code, 2);
}

TEST(Cli, TrainingDivergenceExitsWithTheNumericCode) {
  std::string ds_path = cli_dataset("div.nhcd", 3, 1);
  std::string ck = scratch_path("cli", "div.nhck");
  RunResult r = run_cli("train --train " + ds_path + " --out " + ck +
                        " --no-history --c 2 --blocks 0 --d 2 --neigh 3 --gabor-layers 1"
                        " --enc-dim 2 --mlp-hidden 4 --shuffle-u 2 --multiscale false"
                        " --iterations 10 --batch 2 --lr 1e55 --halve-at 10 --queries 16"
                        " --lambda 0 --scs-p 4 --scs-r 1 --seed 99");
  EXPECT_EQ(r.code, 4);
  EXPECT_TRUE(is_error_line(first_line(r.err), "numeric", "numeric")) << r.err;
  EXPECT_TRUE(std::filesystem::exists(ck + ".diverged"));
  EXPECT_FALSE(std::filesystem::exists(ck));
}
