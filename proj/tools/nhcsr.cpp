// Command-line front end: dataset generation, training, evaluation, inference,
// plotting, and manifest replay. Every command records a JSON manifest with
// its full configuration and the CRC32 of each input and output, so any run
// can be reproduced and verified bit for bit with `nhcsr replay`.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nhcsr/nhcsr.hpp"

namespace nhcsr::cli {

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_u64(uint64_t v) { return std::to_string(v); }

// Consumes keys from a manifest config map; leftover keys are an error so a
// stale or hand-edited manifest fails loudly instead of silently drifting.
struct KvReader {
  KvMap kv;
  explicit KvReader(KvMap m) : kv(std::move(m)) {}

  bool has(const std::string& k) const { return kv.count(k) != 0; }

  std::string str(const std::string& k, const std::string& dflt = "") {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  }
  std::string require(const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw ConfigError("manifest config: missing key '" + k + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  }
  long long integer(const std::string& k, long long dflt) {
    if (!has(k)) return dflt;
    return parse_ll(k, require(k));
  }
  uint64_t u64(const std::string& k, uint64_t dflt) {
    if (!has(k)) return dflt;
    std::string v = require(k);
    try {
      size_t used = 0;
      uint64_t r = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return r;
    } catch (const std::exception&) {
      throw ConfigError("manifest config: bad unsigned value '" + v + "' for key '" + k + "'");
    }
  }
  double dbl(const std::string& k, double dflt) {
    if (!has(k)) return dflt;
    std::string v = require(k);
    try {
      size_t used = 0;
      double r = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return r;
    } catch (const std::exception&) {
      throw ConfigError("manifest config: bad numeric value '" + v + "' for key '" + k + "'");
    }
  }
  bool boolean(const std::string& k, bool dflt) {
    if (!has(k)) return dflt;
    std::string v = require(k);
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw ConfigError("manifest config: bad boolean value '" + v + "' for key '" + k + "'");
  }
  void finish(const std::string& where) const {
    if (kv.empty()) return;
    std::string keys;
    for (const auto& [k, v] : kv) keys += (keys.empty() ? "" : ", ") + k;
    throw ConfigError("manifest config: unknown keys for " + where + ": " + keys);
  }

 private:
  long long parse_ll(const std::string& k, const std::string& v) {
    try {
      size_t used = 0;
      long long r = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return r;
    } catch (const std::exception&) {
      throw ConfigError("manifest config: bad integer value '" + v + "' for key '" + k + "'");
    }
  }
};

inline std::string default_manifest(const std::string& explicit_path, const std::string& anchor) {
  return explicit_path.empty() ? anchor + ".manifest.json" : explicit_path;
}

inline std::vector<std::string> split_paths(const std::string& joined) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(joined);
  while (std::getline(is, cur, ';'))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::string join_paths(const std::vector<std::string>& paths) {
  std::string out;
  for (const std::string& p : paths) out += (out.empty() ? "" : ";") + p;
  return out;
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

struct GenArgs {
  std::string out;
  int n = 16;
  int e = 32;
  int h = 8;
  int alpha = 2;
  std::string pattern = "random";
  uint64_t seed = 1;
  double f_value = 1.0;
  std::string manifest;

  void finalize() { manifest = default_manifest(manifest, out); }

  KvMap to_kv() const {
    return {{"out", out},
            {"n", std::to_string(n)},
            {"e", std::to_string(e)},
            {"h", std::to_string(h)},
            {"alpha", std::to_string(alpha)},
            {"pattern", pattern},
            {"seed", fmt_u64(seed)},
            {"f_value", fmt_g(f_value)},
            {"manifest", manifest}};
  }
  static GenArgs from_kv(const KvMap& kv) {
    KvReader r(kv);
    GenArgs a;
    a.out = r.require("out");
    a.n = static_cast<int>(r.integer("n", a.n));
    a.e = static_cast<int>(r.integer("e", a.e));
    a.h = static_cast<int>(r.integer("h", a.h));
    a.alpha = static_cast<int>(r.integer("alpha", a.alpha));
    a.pattern = r.str("pattern", a.pattern);
    a.seed = r.u64("seed", a.seed);
    a.f_value = r.dbl("f_value", a.f_value);
    a.manifest = r.str("manifest", a.out + ".manifest.json");
    r.finish("gen-data");
    return a;
  }
};

inline void run_gen(const GenArgs& a) {
  ManifestBuilder mb("gen-data");
  mb.config(a.to_kv());

  BuildConfig bc;
  bc.n_samples = a.n;
  bc.e = a.e;
  bc.h = a.h;
  bc.alpha = a.alpha;
  bc.pattern = parse_pattern(a.pattern);
  bc.seed = a.seed;
  bc.source.tag = 0;
  bc.source.value = a.f_value;

  Dataset ds = build_dataset(bc);
  write_dataset(ds, a.out);

  mb.output(a.out);
  mb.write(a.manifest);
  std::cout << "gen-data: " << a.n << " samples, E=" << a.e << ", H=" << a.h << ", alpha="
            << a.alpha << ", pattern=" << bc.pattern.str() << ", y range [" << fmt_g(ds.y_min)
            << ", " << fmt_g(ds.y_max) << "] -> " << a.out << "\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string train_path;
  std::string val_path;
  std::string out;
  std::string history;
  bool no_history = false;
  std::string resume;
  int iterations = 2000;
  int batch = 8;
  double lr = 1e-4;
  int halve_at = 1000;
  int queries = 256;
  int val_every = 100;
  int checkpoint_every = 500;
  uint64_t seed = 1;
  double lambda = 0.1;
  int scs_p = 0;
  int scs_r = 0;
  // model
  int c = 32;
  int blocks = 4;
  int d = 32;
  int neigh = 3;
  int gabor_layers = 2;
  int enc_dim = 32;
  int mlp_hidden = 64;
  int shuffle_u = 2;
  std::string encoding = "gabor";
  bool multiscale = true;
  double w0 = 30.0;
  double s0 = 10.0;
  std::string manifest;

  void finalize() {
    if (no_history)
      history.clear();
    else if (history.empty())
      history = out + ".history.csv";
    manifest = default_manifest(manifest, out);
  }

  KvMap to_kv() const {
    return {{"train", train_path},
            {"val", val_path},
            {"out", out},
            {"history", history},
            {"resume", resume},
            {"iterations", std::to_string(iterations)},
            {"batch", std::to_string(batch)},
            {"lr", fmt_g(lr)},
            {"halve_at", std::to_string(halve_at)},
            {"queries", std::to_string(queries)},
            {"val_every", std::to_string(val_every)},
            {"checkpoint_every", std::to_string(checkpoint_every)},
            {"seed", fmt_u64(seed)},
            {"lambda", fmt_g(lambda)},
            {"scs_p", std::to_string(scs_p)},
            {"scs_r", std::to_string(scs_r)},
            {"c", std::to_string(c)},
            {"blocks", std::to_string(blocks)},
            {"d", std::to_string(d)},
            {"neigh", std::to_string(neigh)},
            {"gabor_layers", std::to_string(gabor_layers)},
            {"enc_dim", std::to_string(enc_dim)},
            {"mlp_hidden", std::to_string(mlp_hidden)},
            {"shuffle_u", std::to_string(shuffle_u)},
            {"encoding", encoding},
            {"multiscale", multiscale ? "1" : "0"},
            {"w0", fmt_g(w0)},
            {"s0", fmt_g(s0)},
            {"manifest", manifest}};
  }
  static TrainArgs from_kv(const KvMap& kv) {
    KvReader r(kv);
    TrainArgs a;
    a.train_path = r.require("train");
    a.val_path = r.str("val");
    a.out = r.require("out");
    a.history = r.str("history");
    a.resume = r.str("resume");
    a.iterations = static_cast<int>(r.integer("iterations", a.iterations));
    a.batch = static_cast<int>(r.integer("batch", a.batch));
    a.lr = r.dbl("lr", a.lr);
    a.halve_at = static_cast<int>(r.integer("halve_at", a.halve_at));
    a.queries = static_cast<int>(r.integer("queries", a.queries));
    a.val_every = static_cast<int>(r.integer("val_every", a.val_every));
    a.checkpoint_every = static_cast<int>(r.integer("checkpoint_every", a.checkpoint_every));
    a.seed = r.u64("seed", a.seed);
    a.lambda = r.dbl("lambda", a.lambda);
    a.scs_p = static_cast<int>(r.integer("scs_p", a.scs_p));
    a.scs_r = static_cast<int>(r.integer("scs_r", a.scs_r));
    a.c = static_cast<int>(r.integer("c", a.c));
    a.blocks = static_cast<int>(r.integer("blocks", a.blocks));
    a.d = static_cast<int>(r.integer("d", a.d));
    a.neigh = static_cast<int>(r.integer("neigh", a.neigh));
    a.gabor_layers = static_cast<int>(r.integer("gabor_layers", a.gabor_layers));
    a.enc_dim = static_cast<int>(r.integer("enc_dim", a.enc_dim));
    a.mlp_hidden = static_cast<int>(r.integer("mlp_hidden", a.mlp_hidden));
    a.shuffle_u = static_cast<int>(r.integer("shuffle_u", a.shuffle_u));
    a.encoding = r.str("encoding", a.encoding);
    a.multiscale = r.boolean("multiscale", a.multiscale);
    a.w0 = r.dbl("w0", a.w0);
    a.s0 = r.dbl("s0", a.s0);
    a.manifest = r.str("manifest", a.out + ".manifest.json");
    r.finish("train");
    return a;
  }
};

inline void run_train(const TrainArgs& a) {
  ManifestBuilder mb("train");
  mb.config(a.to_kv());

  TrainConfig tc;
  tc.iterations = a.iterations;
  tc.batch = a.batch;
  tc.lr = a.lr;
  tc.halve_at = a.halve_at;
  tc.queries = a.queries;
  tc.val_every = a.val_every;
  tc.checkpoint_every = a.checkpoint_every;
  tc.seed = a.seed;
  tc.loss.lambda = a.lambda;
  tc.loss.p = a.scs_p;
  tc.loss.r = a.scs_r;
  tc.model.c = a.c;
  tc.model.blocks = a.blocks;
  tc.model.d = a.d;
  tc.model.neigh = a.neigh;
  tc.model.gabor_layers = a.gabor_layers;
  tc.model.enc_dim = a.enc_dim;
  tc.model.mlp_hidden = a.mlp_hidden;
  tc.model.shuffle_u = a.shuffle_u;
  tc.model.encoding = parse_encoding(a.encoding);
  tc.model.multiscale = a.multiscale;
  tc.model.w0_init = a.w0;
  tc.model.s0_init = a.s0;
  tc.train_path = a.train_path;
  tc.val_path = a.val_path;
  tc.out_checkpoint = a.out;
  tc.history_path = a.history;
  tc.resume = a.resume;

  mb.input(a.train_path);
  if (!a.val_path.empty()) mb.input(a.val_path);
  if (!a.resume.empty()) mb.input(a.resume);

  TrainResult res = train(tc);

  mb.output(a.out);
  if (!a.history.empty()) mb.output(a.history);
  mb.write(a.manifest);

  const HistoryRow& last = res.history.back();
  std::cout << "train: " << res.checkpoint.model.cfg.trained_iters << " iterations, final l1="
            << fmt_g(last.l1) << ", total=" << fmt_g(last.total) << " -> " << a.out << "\n";
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::vector<std::string> data;
  std::string out_dir;
  std::string manifest;

  void finalize() {
    if (data.empty()) throw UsageError("eval: at least one --data dataset is required");
    manifest = default_manifest(manifest, out_dir + "/eval");
  }

  KvMap to_kv() const {
    return {{"checkpoint", checkpoint},
            {"data", join_paths(data)},
            {"out_dir", out_dir},
            {"manifest", manifest}};
  }
  static EvalArgs from_kv(const KvMap& kv) {
    KvReader r(kv);
    EvalArgs a;
    a.checkpoint = r.require("checkpoint");
    a.data = split_paths(r.require("data"));
    a.out_dir = r.require("out_dir");
    a.manifest = r.str("manifest", a.out_dir + "/eval.manifest.json");
    r.finish("eval");
    if (a.data.empty()) throw ConfigError("manifest config: eval data list is empty");
    return a;
  }
};

inline void run_eval(const EvalArgs& a) {
  ManifestBuilder mb("eval");
  mb.config(a.to_kv());
  mb.input(a.checkpoint);
  for (const std::string& p : a.data) mb.input(p);

  Model model = load_checkpoint(a.checkpoint).model;

  std::filesystem::create_directories(a.out_dir);
  const std::string metrics_path = a.out_dir + "/metrics.csv";
  const std::string summary_path = a.out_dir + "/summary.csv";
  const std::string rapsd_path = a.out_dir + "/rapsd.csv";
  std::ofstream metrics(metrics_path, std::ios::trunc);
  std::ofstream summary(summary_path, std::ios::trunc);
  std::ofstream spectra(rapsd_path, std::ios::trunc);
  if (!metrics || !summary || !spectra)
    throw IoError("eval: cannot open output files under " + a.out_dir);
  metrics << "alpha,sample,method,mse,mae,psnr,ssim\n";
  summary << "alpha,method,n_samples,mse_mean,mse_std,mae_mean,mae_std,psnr_mean,psnr_std,"
             "ssim_mean,ssim_std\n";
  spectra << "alpha,method,radius,power\n";

  for (const std::string& path : a.data) {
    Dataset ds = read_dataset(path);
    EvalResult res = evaluate(model, ds);
    for (const EvalRow& row : res.rows)
      metrics << res.alpha << "," << row.sample << "," << row.method << "," << fmt_g(row.mse)
              << "," << fmt_g(row.mae) << "," << fmt_g(row.psnr) << "," << fmt_g(row.ssim)
              << "\n";
    for (const EvalSummary& s : res.summary)
      summary << res.alpha << "," << s.method << "," << ds.samples.size() << ","
              << fmt_g(s.mse_mean) << "," << fmt_g(s.mse_std) << "," << fmt_g(s.mae_mean) << ","
              << fmt_g(s.mae_std) << "," << fmt_g(s.psnr_mean) << "," << fmt_g(s.psnr_std) << ","
              << fmt_g(s.ssim_mean) << "," << fmt_g(s.ssim_std) << "\n";
    for (const auto& [method, powers] : res.rapsd_mean)
      for (size_t k = 0; k < powers.size(); ++k)
        spectra << res.alpha << "," << method << "," << k << "," << fmt_g(powers[k]) << "\n";
    for (const EvalSummary& s : res.summary)
      std::cout << "eval: alpha=" << res.alpha << " method=" << s.method << " mse="
                << fmt_g(s.mse_mean) << " mae=" << fmt_g(s.mae_mean) << " psnr="
                << fmt_g(s.psnr_mean) << " ssim=" << fmt_g(s.ssim_mean) << "\n";
  }
  metrics.close();
  summary.close();
  spectra.close();
  if (metrics.fail() || summary.fail() || spectra.fail())
    throw IoError("eval: write failure under " + a.out_dir);

  mb.output(metrics_path);
  mb.output(summary_path);
  mb.output(rapsd_path);
  mb.write(a.manifest);
}

// ---------------------------------------------------------------------------
// infer
// ---------------------------------------------------------------------------

struct InferArgs {
  std::string checkpoint;
  std::string data;
  int sample = 0;
  double alpha = 0.0;  // 0 = use the dataset's refinement factor
  int nodes = 0;       // 0 = derive from alpha
  std::string out;
  std::string manifest;

  void finalize() {
    if (alpha != 0.0 && nodes != 0)
      throw UsageError("infer: give at most one of --alpha and --nodes");
    manifest = default_manifest(manifest, out);
  }

  KvMap to_kv() const {
    return {{"checkpoint", checkpoint}, {"data", data},           {"sample", std::to_string(sample)},
            {"alpha", fmt_g(alpha)},    {"nodes", std::to_string(nodes)}, {"out", out},
            {"manifest", manifest}};
  }
  static InferArgs from_kv(const KvMap& kv) {
    KvReader r(kv);
    InferArgs a;
    a.checkpoint = r.require("checkpoint");
    a.data = r.require("data");
    a.sample = static_cast<int>(r.integer("sample", a.sample));
    a.alpha = r.dbl("alpha", a.alpha);
    a.nodes = static_cast<int>(r.integer("nodes", a.nodes));
    a.out = r.require("out");
    a.manifest = r.str("manifest", a.out + ".manifest.json");
    r.finish("infer");
    return a;
  }
};

inline void run_infer(const InferArgs& a) {
  ManifestBuilder mb("infer");
  mb.config(a.to_kv());
  mb.input(a.checkpoint);
  mb.input(a.data);

  Model model = load_checkpoint(a.checkpoint).model;
  Dataset ds = read_dataset(a.data);
  if (a.sample < 0 || a.sample >= static_cast<int>(ds.samples.size()))
    throw ConfigError("infer: sample index " + std::to_string(a.sample) +
                      " out of range (dataset has " + std::to_string(ds.samples.size()) +
                      " samples)");
  const DatasetSample& s = ds.samples[static_cast<size_t>(a.sample)];
  GridField x = s.coarse(ds.coarse_nodes() - 1);
  CoefficientMap coef = s.coefficient(static_cast<int>(ds.e));

  int n_out;
  if (a.nodes != 0)
    n_out = a.nodes;
  else if (a.alpha != 0.0)
    n_out = scaled_nodes(x.n, a.alpha);
  else
    n_out = ds.fine_nodes();

  GridField y = forward(model, x, coef, n_out);
  write_gridfile(y, a.out);

  mb.output(a.out);
  mb.write(a.manifest);
  std::cout << "infer: sample " << a.sample << ", " << x.n << "x" << x.n << " -> " << y.n << "x"
            << y.n << " -> " << a.out << "\n";
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

struct PlotArgs {
  std::string field;    // NHGF input
  std::string data;     // or: dataset input ...
  int sample = 0;       //   ... with sample index ...
  std::string which = "y";  //   ... and channel x|y|a
  std::string compare;  // second NHGF; plots |field - compare|
  std::string out;
  std::string slices;
  double gain = 8.0;
  bool gain_given = false;
  std::string colormap = "jet";
  std::string manifest;

  void finalize() {
    if (field.empty() == data.empty())
      throw UsageError("plot: give exactly one of --field and --data");
    if (which != "x" && which != "y" && which != "a")
      throw UsageError("plot: --which must be x, y, or a");
    if (!compare.empty() && !gain_given) gain = 20.0;
    manifest = default_manifest(manifest, out);
  }

  KvMap to_kv() const {
    return {{"field", field},       {"data", data},   {"sample", std::to_string(sample)},
            {"which", which},       {"compare", compare}, {"out", out},
            {"slices", slices},     {"gain", fmt_g(gain)}, {"colormap", colormap},
            {"manifest", manifest}};
  }
  static PlotArgs from_kv(const KvMap& kv) {
    KvReader r(kv);
    PlotArgs a;
    a.field = r.str("field");
    a.data = r.str("data");
    a.sample = static_cast<int>(r.integer("sample", a.sample));
    a.which = r.str("which", a.which);
    a.compare = r.str("compare");
    a.out = r.require("out");
    a.slices = r.str("slices");
    a.gain = r.dbl("gain", a.gain);
    a.gain_given = true;  // manifests store the resolved gain
    a.colormap = r.str("colormap", a.colormap);
    a.manifest = r.str("manifest", a.out + ".manifest.json");
    r.finish("plot");
    if (a.field.empty() == a.data.empty())
      throw ConfigError("manifest config: plot needs exactly one of field/data");
    return a;
  }
};

inline GridField plot_source(const PlotArgs& a) {
  if (!a.field.empty()) return read_gridfile(a.field);
  Dataset ds = read_dataset(a.data);
  if (a.sample < 0 || a.sample >= static_cast<int>(ds.samples.size()))
    throw ConfigError("plot: sample index " + std::to_string(a.sample) +
                      " out of range (dataset has " + std::to_string(ds.samples.size()) +
                      " samples)");
  const DatasetSample& s = ds.samples[static_cast<size_t>(a.sample)];
  if (a.which == "x") return s.coarse(ds.coarse_nodes() - 1);
  if (a.which == "y") return s.fine(static_cast<int>(ds.h), static_cast<int>(ds.alpha));
  GridField g(static_cast<int>(ds.e));
  for (size_t i = 0; i < s.mask.size(); ++i) g.v[i] = s.mask[i] ? 1.0 : 0.0;
  return g;
}

inline void run_plot(const PlotArgs& a) {
  ManifestBuilder mb("plot");
  mb.config(a.to_kv());
  if (!a.field.empty()) mb.input(a.field);
  if (!a.data.empty()) mb.input(a.data);
  if (!a.compare.empty()) mb.input(a.compare);

  GridField g = plot_source(a);
  if (!a.compare.empty()) {
    GridField other = read_gridfile(a.compare);
    if (other.n != g.n)
      throw ContractError("plot: cannot compare " + std::to_string(g.n) + "x" +
                          std::to_string(g.n) + " against " + std::to_string(other.n) + "x" +
                          std::to_string(other.n));
    for (size_t i = 0; i < g.v.size(); ++i) g.v[i] = std::abs(g.v[i] - other.v[i]);
  }

  PlotOptions opt;
  opt.gain = a.gain;
  opt.colormap = a.colormap;
  write_pnm(a.out, render_field(g.v, opt), g.n, g.n);
  if (!a.slices.empty()) write_slices_csv(a.slices, g);

  mb.output(a.out);
  if (!a.slices.empty()) mb.output(a.slices);
  mb.write(a.manifest);
  std::cout << "plot: " << g.n << "x" << g.n << " field -> " << a.out << "\n";
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

struct ReplayArgs {
  std::string manifest_path;
  std::string manifest;  // manifest of the replay run itself

  void finalize() { manifest = default_manifest(manifest, manifest_path + ".replay"); }
};

inline void dispatch_config(const std::string& command, const KvMap& config) {
  if (command == "gen-data")
    run_gen(GenArgs::from_kv(config));
  else if (command == "train")
    run_train(TrainArgs::from_kv(config));
  else if (command == "eval")
    run_eval(EvalArgs::from_kv(config));
  else if (command == "infer")
    run_infer(InferArgs::from_kv(config));
  else if (command == "plot")
    run_plot(PlotArgs::from_kv(config));
  else
    throw ConfigError("replay: manifest has unknown command '" + command + "'");
}

inline void run_replay(const ReplayArgs& a) {
  ManifestBuilder mb("replay");
  mb.config({{"manifest", a.manifest_path}});
  mb.input(a.manifest_path);

  ManifestRecord rec = read_manifest(a.manifest_path);
  dispatch_config(rec.command, rec.config);

  for (const auto& [path, expected] : rec.outputs) {
    uint32_t got = file_crc32(path);
    if (got != expected) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "replay: output mismatch for %s (recorded crc32 %08x, got %08x)",
                    path.c_str(), expected, got);
      throw IoError(buf);
    }
    mb.output(path);
  }
  mb.write(a.manifest);
  std::cout << "replay: " << rec.command << " reproduced, " << rec.outputs.size()
            << " output(s) verified against " << a.manifest_path << "\n";
}

// ---------------------------------------------------------------------------
// Wiring
// ---------------------------------------------------------------------------

// Long-form --help only: the geometry flag --h needs the "h" option name.
inline CLI::App* make_sub(CLI::App& app, const std::string& name, const std::string& desc) {
  CLI::App* c = app.add_subcommand(name, desc);
  c->set_help_flag("--help", "Print help and exit");
  return c;
}

inline void bind(CLI::App& app, GenArgs& a) {
  CLI::App* c = make_sub(app, "gen-data", "Generate a paired coarse/fine dataset");
  c->add_option("--out", a.out, "Output dataset path")->required();
  c->add_option("--n", a.n, "Number of samples");
  c->add_option("--e", a.e, "Coefficient grid cells per side");
  c->add_option("--h", a.h, "Coarse mesh cells per side");
  c->add_option("--alpha", a.alpha, "Fine/coarse refinement factor");
  c->add_option("--pattern", a.pattern,
                "Coefficient pattern: random | checkerboard[:p] | wave[:p[,amp]] | stride[:w] | mix");
  c->add_option("--seed", a.seed, "Master seed");
  c->add_option("--f", a.f_value, "Constant source value");
  c->add_option("--manifest", a.manifest, "Manifest path (default <out>.manifest.json)");
  c->callback([&a] {
    a.finalize();
    run_gen(a);
  });
}

inline void bind(CLI::App& app, TrainArgs& a) {
  CLI::App* c = make_sub(app, "train", "Train a super-resolution model");
  c->add_option("--train", a.train_path, "Training dataset")->required();
  c->add_option("--val", a.val_path, "Validation dataset");
  c->add_option("--out", a.out, "Output checkpoint path")->required();
  c->add_option("--history", a.history, "History CSV path (default <out>.history.csv)");
  c->add_flag("--no-history", a.no_history, "Skip the history CSV");
  c->add_option("--resume", a.resume, "Continue from this checkpoint");
  c->add_option("--iterations", a.iterations, "Total optimization steps");
  c->add_option("--batch", a.batch, "Samples per step");
  c->add_option("--lr", a.lr, "Base learning rate");
  c->add_option("--halve-at", a.halve_at, "Iteration from which the rate halves");
  c->add_option("--queries", a.queries, "Query nodes per sample per step");
  c->add_option("--val-every", a.val_every, "Validation cadence, iterations");
  c->add_option("--checkpoint-every", a.checkpoint_every,
                "Checkpoint cadence, iterations (0 = final only)");
  c->add_option("--seed", a.seed, "Master seed");
  c->add_option("--lambda", a.lambda, "Cosine-similarity loss weight");
  c->add_option("--scs-p", a.scs_p, "Cosine draw size (0 = coarse nodes per side)");
  c->add_option("--scs-r", a.scs_r, "Cosine draw repeats (0 = coarse nodes per side)");
  c->add_option("--c", a.c, "Encoder channels");
  c->add_option("--blocks", a.blocks, "Encoder residual blocks");
  c->add_option("--d", a.d, "Attention dimension");
  c->add_option("--neigh", a.neigh, "Attention neighborhood side (odd)");
  c->add_option("--gabor-layers", a.gabor_layers, "Coordinate-encoding depth");
  c->add_option("--enc-dim", a.enc_dim, "Coordinate-encoding width");
  c->add_option("--mlp-hidden", a.mlp_hidden, "Final MLP hidden width");
  c->add_option("--shuffle-u", a.shuffle_u, "Pixel-shuffle factor of the fine branch");
  c->add_option("--encoding", a.encoding, "Coordinate encoding: gabor | sinusoid | gaussian | plain");
  c->add_option("--multiscale", a.multiscale, "Enable the fine branch (true/false)");
  c->add_option("--w0", a.w0, "Initial oscillation frequency");
  c->add_option("--s0", a.s0, "Initial envelope sharpness");
  c->add_option("--manifest", a.manifest, "Manifest path (default <out>.manifest.json)");
  c->callback([&a] {
    a.finalize();
    run_train(a);
  });
}

inline void bind(CLI::App& app, EvalArgs& a) {
  CLI::App* c = make_sub(app, "eval", "Evaluate a checkpoint against datasets");
  c->add_option("--checkpoint", a.checkpoint, "Model checkpoint")->required();
  c->add_option("--data", a.data, "Evaluation dataset(s); repeatable")->required();
  c->add_option("--out-dir", a.out_dir, "Directory for metrics/summary/rapsd CSVs")->required();
  c->add_option("--manifest", a.manifest, "Manifest path (default <out-dir>/eval.manifest.json)");
  c->callback([&a] {
    a.finalize();
    run_eval(a);
  });
}

inline void bind(CLI::App& app, InferArgs& a) {
  CLI::App* c = make_sub(app, "infer", "Super-resolve one dataset sample");
  c->add_option("--checkpoint", a.checkpoint, "Model checkpoint")->required();
  c->add_option("--data", a.data, "Dataset with the coarse input")->required();
  c->add_option("--sample", a.sample, "Sample index");
  c->add_option("--alpha", a.alpha, "Refinement factor (default: the dataset's)");
  c->add_option("--nodes", a.nodes, "Explicit output nodes per side");
  c->add_option("--out", a.out, "Output field path")->required();
  c->add_option("--manifest", a.manifest, "Manifest path (default <out>.manifest.json)");
  c->callback([&a] {
    a.finalize();
    run_infer(a);
  });
}

inline void bind(CLI::App& app, PlotArgs& a) {
  CLI::App* c = make_sub(app, "plot", "Render a field to a portable pixmap");
  c->add_option("--field", a.field, "Field file to plot");
  c->add_option("--data", a.data, "Dataset to plot from (with --sample/--which)");
  c->add_option("--sample", a.sample, "Sample index");
  c->add_option("--which", a.which, "Dataset channel: x (coarse) | y (fine) | a (coefficient)");
  c->add_option("--compare", a.compare, "Second field; plots |field - compare| (gain default 20)");
  c->add_option("--out", a.out, "Output image (.ppm for jet, .pgm for gray)")->required();
  c->add_option("--slices", a.slices, "Also write middle row/column CSV here");
  c->add_option("--gain", a.gain, "Contrast gain before the 255-fold wrap")
      ->trigger_on_parse()
      ->each([&a](const std::string&) { a.gain_given = true; });
  c->add_option("--colormap", a.colormap, "jet | gray");
  c->add_option("--manifest", a.manifest, "Manifest path (default <out>.manifest.json)");
  c->callback([&a] {
    a.finalize();
    run_plot(a);
  });
}

inline void bind(CLI::App& app, ReplayArgs& a) {
  CLI::App* c = make_sub(app, "replay", "Re-run a manifest and verify its outputs");
  c->add_option("manifest", a.manifest_path, "Manifest to replay")->required();
  c->add_option("--manifest-out", a.manifest, "Manifest of the replay run (default <manifest>.replay.manifest.json)");
  c->callback([&a] {
    a.finalize();
    run_replay(a);
  });
}

inline std::string sanitize(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    if (ch == '"')
      out += '\'';
    else if (ch == '\n' || ch == '\r' || ch == '\t')
      out += ' ';
    else
      out += ch;
  }
  return out;
}

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage:
      return "usage";
    case ErrorKind::data:
      return "data";
    case ErrorKind::numeric:
      return "numeric";
  }
  return "unknown";
}

}  // namespace nhcsr::cli

int main(int argc, char** argv) {
  using namespace nhcsr;
  using namespace nhcsr::cli;

  CLI::App app{"Paired coarse/fine elliptic-field datasets and continuous super-resolution"};
  app.set_help_flag("--help", "Print help and exit");
  app.set_config("--config", "",
                 "Read options from a key=value file; place it before the subcommand and put the "
                 "keys in a [subcommand] section");
  app.require_subcommand(1);

  GenArgs gen;
  TrainArgs train;
  EvalArgs eval;
  InferArgs infer;
  PlotArgs plot;
  ReplayArgs replay;
  bind(app, gen);
  bind(app, train);
  bind(app, eval);
  bind(app, infer);
  bind(app, plot);
  bind(app, replay);

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error kind=usage code=" << e.get_name() << " msg=\"" << sanitize(e.what())
              << "\"" << std::endl;
    return 2;
  } catch (const Error& e) {
    std::cerr << "error kind=" << kind_name(e.kind()) << " code=" << e.code() << " msg=\""
              << sanitize(e.what()) << "\"" << std::endl;
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error kind=internal code=unhandled msg=\"" << sanitize(e.what()) << "\""
              << std::endl;
    return 1;
  }
}
