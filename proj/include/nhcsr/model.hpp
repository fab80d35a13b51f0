#pragma once

// The continuous super-resolution network f(X, A, alpha): conditional conv
// encoder, Gabor coordinate encoding, local implicit attention over a 3x3
// latent neighborhood, optional pixel-shuffle fine branch, scalar head on a
// bilinear global residual. Also the "NHCK" checkpoint container.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nhcsr/dataset.hpp"
#include "nhcsr/field.hpp"
#include "nhcsr/io.hpp"
#include "nhcsr/rng.hpp"
#include "nhcsr/tensor.hpp"
#include "nhcsr/tensor_image.hpp"

namespace nhcsr {

enum class Encoding : uint8_t { plain = 0, sinusoid = 1, gaussian = 2, gabor = 3 };

inline Encoding parse_encoding(const std::string& s) {
  if (s == "plain") return Encoding::plain;
  if (s == "sinusoid") return Encoding::sinusoid;
  if (s == "gaussian") return Encoding::gaussian;
  if (s == "gabor") return Encoding::gabor;
  throw ConfigError("unknown encoding '" + s + "' (plain|sinusoid|gaussian|gabor)");
}

inline std::string encoding_name(Encoding e) {
  switch (e) {
    case Encoding::plain: return "plain";
    case Encoding::sinusoid: return "sinusoid";
    case Encoding::gaussian: return "gaussian";
    case Encoding::gabor: return "gabor";
  }
  return "?";
}

struct ModelConfig {
  int c = 32;           // encoder feature channels
  int blocks = 4;       // encoder residual blocks
  int d = 32;           // attention dimension
  int neigh = 3;        // attention neighborhood side (odd)
  int gabor_layers = 2; // coordinate-encoding depth
  int enc_dim = 32;     // coordinate-encoding width
  int mlp_hidden = 64;  // final MLP hidden width
  int shuffle_u = 2;    // pixel-shuffle factor of the fine branch
  Encoding encoding = Encoding::gabor;
  bool multiscale = true;
  double w0_init = 30.0;
  double s0_init = 10.0;
  double norm_min = 0.0;  // dataset normalization record
  double norm_max = 1.0;
  uint64_t trained_iters = 0;

  void validate() const {
    if (c <= 0 || blocks < 0 || d <= 0 || enc_dim <= 0 || mlp_hidden <= 0)
      throw ConfigError("model dimensions must be positive");
    if (neigh < 1 || neigh % 2 == 0) throw ConfigError("attention neighborhood must be odd and >= 1");
    if (gabor_layers < 1) throw ConfigError("coordinate encoding needs at least one layer");
    if (shuffle_u < 1) throw ConfigError("pixel-shuffle factor must be >= 1");
  }

  double norm_range() const {
    double r = norm_max - norm_min;
    return r > 0.0 ? r : 1.0;
  }
};

using ParamMap = std::map<std::string, Tensor>;

struct Model {
  ModelConfig cfg;
  ParamMap params;

  Tensor& p(const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw ContractError("missing parameter '" + name + "'");
    return it->second;
  }
  const Tensor& p(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw ContractError("missing parameter '" + name + "'");
    return it->second;
  }
};

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

namespace detail {

inline void init_uniform(ParamMap& params, const std::string& name, Shape shape, int fan_in,
                         uint64_t seed) {
  Tensor t = Tensor::zeros(std::move(shape), true);
  Rng rng(derive_seed(seed, "init." + name));
  double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(-bound, bound);
  params.emplace(name, std::move(t));
}

inline void init_const(ParamMap& params, const std::string& name, Shape shape, double value) {
  Tensor t = Tensor::zeros(std::move(shape), true);
  std::fill(t.vec().begin(), t.vec().end(), value);
  params.emplace(name, std::move(t));
}

inline void init_branch(ParamMap& m, const ModelConfig& cfg, const std::string& br, uint64_t seed) {
  const int c = cfg.c, d = cfg.d, ed = cfg.enc_dim;
  init_uniform(m, br + ".wq", {d, c}, c, seed);
  init_uniform(m, br + ".wk", {d, c}, c, seed);
  init_uniform(m, br + ".wv", {d, c}, c, seed);
  for (int l = 0; l < cfg.gabor_layers; ++l) {
    int in = l == 0 ? 2 : ed;
    std::string base = br + ".enc.l" + std::to_string(l);
    init_uniform(m, base + ".w", {in, ed}, in, seed);
    init_uniform(m, base + ".b", {ed}, in, seed);
    // Learnable frequency/width scalars exist only where the nonlinearity
    // reads them, so every parameter participates in the forward graph.
    if (cfg.encoding == Encoding::gabor || cfg.encoding == Encoding::sinusoid)
      init_const(m, base + ".w0", {1}, cfg.w0_init);
    if (cfg.encoding == Encoding::gabor || cfg.encoding == Encoding::gaussian)
      init_const(m, base + ".s0", {1}, cfg.s0_init);
  }
  init_uniform(m, br + ".bias.w", {ed, 1}, ed, seed);
  init_uniform(m, br + ".bias.b", {1}, ed, seed);
  init_uniform(m, br + ".head.w", {d, d}, d, seed);
  init_uniform(m, br + ".head.b", {d}, d, seed);
}

}  // namespace detail

// Uniform +/- sqrt(1/fan_in) for convs and linears; frequency scalars at their
// configured values; the final scalar head zero-initialized so a fresh model
// is exactly the bilinear residual path. Deterministic per (config, seed).
inline Model init_params(const ModelConfig& cfg, uint64_t seed) {
  cfg.validate();
  Model model;
  model.cfg = cfg;
  ParamMap& m = model.params;
  const int c = cfg.c, u = cfg.shuffle_u;

  detail::init_uniform(m, "enc.stem.w", {c, 2, 3, 3}, 2 * 9, seed);
  detail::init_uniform(m, "enc.stem.b", {c}, 2 * 9, seed);
  for (int b = 0; b < cfg.blocks; ++b) {
    std::string base = "enc.block" + std::to_string(b);
    detail::init_uniform(m, base + ".c1.w", {c, c, 3, 3}, c * 9, seed);
    detail::init_uniform(m, base + ".c1.b", {c}, c * 9, seed);
    detail::init_uniform(m, base + ".c2.w", {c, c, 3, 3}, c * 9, seed);
    detail::init_uniform(m, base + ".c2.b", {c}, c * 9, seed);
  }
  detail::init_branch(m, cfg, "lr", seed);
  if (cfg.multiscale) {
    detail::init_uniform(m, "hr.up.w", {c * u * u, c, 3, 3}, c * 9, seed);
    detail::init_uniform(m, "hr.up.b", {c * u * u}, c * 9, seed);
    detail::init_branch(m, cfg, "hr", seed);
  }
  detail::init_uniform(m, "mlp.l0.w", {cfg.d, cfg.mlp_hidden}, cfg.d, seed);
  detail::init_uniform(m, "mlp.l0.b", {cfg.mlp_hidden}, cfg.d, seed);
  detail::init_uniform(m, "mlp.l1.w", {cfg.mlp_hidden, cfg.d}, cfg.mlp_hidden, seed);
  detail::init_uniform(m, "mlp.l1.b", {cfg.d}, cfg.mlp_hidden, seed);
  detail::init_const(m, "out.w", {cfg.d, 1}, 0.0);
  detail::init_const(m, "out.b", {1}, 0.0);
  return model;
}

// ---------------------------------------------------------------------------
// Input adapters
// ---------------------------------------------------------------------------

inline Tensor field_tensor(const GridField& g) {
  return Tensor::from_data({1, g.n, g.n}, g.v);
}

// X normalized to [0,1] by the dataset's global min/max.
inline Tensor normalized_input(const Model& model, const GridField& x) {
  double lo = model.cfg.norm_min, range = model.cfg.norm_range();
  std::vector<double> v(x.v.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = (x.v[i] - lo) / range;
  return Tensor::from_data({1, x.n, x.n}, std::move(v));
}

// A mapped from {lo,hi} to {0,1}.
inline Tensor coefficient_input(const CoefficientMap& a) {
  std::vector<double> v(a.v.size());
  double span = a.hi - a.lo;
  if (!(span > 0.0)) throw ContractError("coefficient contrast must have hi > lo");
  for (size_t i = 0; i < v.size(); ++i) v[i] = (a.v[i] - a.lo) / span;
  return Tensor::from_data({1, a.e, a.e}, std::move(v));
}

// ---------------------------------------------------------------------------
// Forward pieces
// ---------------------------------------------------------------------------

// Conditional encoder: bicubic X to the coefficient grid, stack with A, conv
// stem plus conv-relu-conv residual blocks.
inline Tensor encode(const Model& model, const Tensor& x01, const Tensor& a01) {
  if (a01.ndim() != 3 || a01.size(0) != 1 || a01.size(1) != a01.size(2))
    throw ShapeError("encode: coefficient input must be [1,E,E]");
  const int e = a01.size(1);
  Tensor xr = bicubic_resize(x01, e, e);
  Tensor f = conv2d(concat_channels(xr, a01), model.p("enc.stem.w"), model.p("enc.stem.b"));
  for (int b = 0; b < model.cfg.blocks; ++b) {
    std::string base = "enc.block" + std::to_string(b);
    Tensor r = conv2d(relu(conv2d(f, model.p(base + ".c1.w"), model.p(base + ".c1.b"))),
                      model.p(base + ".c2.w"), model.p(base + ".c2.b"));
    f = add(f, r);
  }
  return f;
}

// Coordinate encoding of residues [M,2]: affine layers with the configured
// nonlinearity phi(x) = cos(w0 x) * exp(-(s0 x)^2) or one of its ablations.
inline Tensor coord_encode(const Model& model, const std::string& br, const Tensor& delta) {
  Tensor h = delta;
  for (int l = 0; l < model.cfg.gabor_layers; ++l) {
    std::string base = br + ".enc.l" + std::to_string(l);
    h = add_rowvec(matmul(h, model.p(base + ".w")), model.p(base + ".b"));
    switch (model.cfg.encoding) {
      case Encoding::plain:
        h = relu(h);
        break;
      case Encoding::sinusoid:
        h = cos(scale(h, model.p(base + ".w0")));
        break;
      case Encoding::gaussian:
        h = exp(neg(square(scale(h, model.p(base + ".s0")))));
        break;
      case Encoding::gabor:
        h = mul(cos(scale(h, model.p(base + ".w0"))),
                exp(neg(square(scale(h, model.p(base + ".s0"))))));
        break;
    }
  }
  return h;
}

// Local implicit attention of one branch over feature map f ([C,n,n]).
// Queries are normalized coordinates; tokens are the neigh x neigh latent
// nodes around each query's nearest node (indices clamped at the border).
inline Tensor lit_attention(const Model& model, const std::string& br, const Tensor& f,
                            const std::vector<double>& xy) {
  const int c = f.size(0), n = f.size(1);
  if (f.ndim() != 3 || f.size(2) != n) throw ShapeError("lit_attention: feature map must be square");
  if (c != model.cfg.c) throw ShapeError("lit_attention: channel mismatch");
  const int d = model.cfg.d;
  const int wing = model.cfg.neigh / 2;
  const int t = model.cfg.neigh * model.cfg.neigh;
  const int q = static_cast<int>(xy.size() / 2);
  if (q == 0) throw ContractError("lit_attention: no queries");

  Tensor f_flat = reshape(f, {c, n * n});
  Tensor q_map = reshape(matmul(model.p(br + ".wq"), f_flat), {d, n, n});
  Tensor k_map = reshape(matmul(model.p(br + ".wk"), f_flat), {d, n, n});
  Tensor v_map = reshape(matmul(model.p(br + ".wv"), f_flat), {d, n, n});

  Tensor q_feat = grid_sample_bilinear(q_map, xy);  // [Q,D]

  // Token indices and coordinate residues (node - query), both constants.
  std::vector<int> idx(static_cast<size_t>(q) * t);
  std::vector<double> delta(static_cast<size_t>(q) * t * 2);
  for (int i = 0; i < q; ++i) {
    double qx = xy[static_cast<size_t>(2 * i)], qy = xy[static_cast<size_t>(2 * i) + 1];
    int nc = static_cast<int>(std::lround(coord_to_index(qx, n)));
    int nr = static_cast<int>(std::lround(coord_to_index(qy, n)));
    int tok = 0;
    for (int dy = -wing; dy <= wing; ++dy)
      for (int dx = -wing; dx <= wing; ++dx, ++tok) {
        int r = std::min(std::max(nr + dy, 0), n - 1);
        int cc = std::min(std::max(nc + dx, 0), n - 1);
        size_t at = static_cast<size_t>(i) * t + tok;
        idx[at] = r * n + cc;
        delta[2 * at] = index_to_coord(cc, n) - qx;
        delta[2 * at + 1] = index_to_coord(r, n) - qy;
      }
  }

  Tensor k_feat = gather_pixels(k_map, idx);  // [Q*T,D]
  Tensor v_feat = gather_pixels(v_map, idx);  // [Q*T,D]

  Tensor enc = coord_encode(model, br, Tensor::from_data({q * t, 2}, std::move(delta)));
  Tensor bias = add_rowvec(matmul(enc, model.p(br + ".bias.w")), model.p(br + ".bias.b"));
  Tensor logits = add(mul_scalar(qk_scores(q_feat, k_feat, t), 1.0 / std::sqrt(static_cast<double>(d))),
                      reshape(bias, {q, t}));
  Tensor w = softmax(logits, 1);
  return attn_mix(w, v_feat);  // [Q,D]
}

// Query-independent feature maps, computed once per sample.
struct LatentMaps {
  Tensor coarse;  // [C,E,E]
  Tensor fine;    // [C,uE,uE] when multiscale
};

inline LatentMaps prepare_latents(const Model& model, const Tensor& x01, const Tensor& a01) {
  LatentMaps maps;
  maps.coarse = encode(model, x01, a01);
  if (model.cfg.multiscale)
    maps.fine = pixel_shuffle(conv2d(maps.coarse, model.p("hr.up.w"), model.p("hr.up.b")),
                              model.cfg.shuffle_u);
  return maps;
}

// Multi-scale implicit features followed by the final MLP -> [Q,D].
inline Tensor multiscale_iif(const Model& model, const LatentMaps& maps,
                             const std::vector<double>& xy) {
  Tensor lr_att = lit_attention(model, "lr", maps.coarse, xy);
  Tensor z = add_rowvec(matmul(lr_att, model.p("lr.head.w")), model.p("lr.head.b"));
  if (model.cfg.multiscale) {
    Tensor hr_att = lit_attention(model, "hr", maps.fine, xy);
    Tensor hr_feat = add_rowvec(matmul(hr_att, model.p("hr.head.w")), model.p("hr.head.b"));
    z = add(z, hr_feat);
  }
  Tensor h = relu(add_rowvec(matmul(z, model.p("mlp.l0.w")), model.p("mlp.l0.b")));
  return add_rowvec(matmul(h, model.p("mlp.l1.w")), model.p("mlp.l1.b"));
}

// Normalized-scale network correction at the queries -> [Q].
inline Tensor head_correction(const Model& model, const LatentMaps& maps,
                              const std::vector<double>& xy) {
  Tensor feat = multiscale_iif(model, maps, xy);
  Tensor h = add_rowvec(matmul(feat, model.p("out.w")), model.p("out.b"));
  return reshape(h, {static_cast<int>(xy.size() / 2)});
}

// Normalized prediction: network correction plus bilinearly sampled input.
inline Tensor predict01(const Model& model, const Tensor& x01, const LatentMaps& maps,
                        const std::vector<double>& xy) {
  Tensor base = reshape(grid_sample_bilinear(x01, xy), {static_cast<int>(xy.size() / 2)});
  return add(head_correction(model, maps, xy), base);
}

// All node coordinates of an n x n output grid, row-major.
inline std::vector<double> node_coords(int n) {
  std::vector<double> xy(static_cast<size_t>(n) * n * 2);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      size_t at = (static_cast<size_t>(iy) * n + ix) * 2;
      xy[at] = index_to_coord(ix, n);
      xy[at + 1] = index_to_coord(iy, n);
    }
  return xy;
}

// Full-field inference at an arbitrary output node count. Works on the raw
// value scale: raw bilinear residual plus range-scaled head, so a zero head
// reproduces the input exactly at alpha = 1. Boundary forced to zero.
inline GridField forward(const Model& model, const GridField& x, const CoefficientMap& a, int n_out,
                         int chunk = 4096) {
  if (n_out < 2) throw ConfigError("forward: output grid needs at least 2 nodes per side");
  NoGradGuard ng;
  Tensor x01 = normalized_input(model, x);
  Tensor x_raw = field_tensor(x);
  LatentMaps maps = prepare_latents(model, x01, coefficient_input(a));
  const double range = model.cfg.norm_range();

  std::vector<double> xy = node_coords(n_out);
  GridField out(n_out);
  const int total = n_out * n_out;
  for (int begin = 0; begin < total; begin += chunk) {
    int count = std::min(chunk, total - begin);
    std::vector<double> part(xy.begin() + static_cast<size_t>(begin) * 2,
                             xy.begin() + static_cast<size_t>(begin + count) * 2);
    Tensor head = head_correction(model, maps, part);
    Tensor base = reshape(grid_sample_bilinear(x_raw, part), {count});
    for (int i = 0; i < count; ++i)
      out.v[static_cast<size_t>(begin + i)] = base.data()[i] + range * head.data()[i];
  }
  for (int iy = 0; iy < n_out; ++iy)
    for (int ix = 0; ix < n_out; ++ix)
      if (out.is_boundary(ix, iy)) out.at(ix, iy) = 0.0;
  for (double v : out.v)
    if (!std::isfinite(v)) throw NumericError("forward: non-finite output value");
  return out;
}

// Output node count for scale factor alpha on an n-node input: alpha*(n-1)+1.
inline int scaled_nodes(int n_in, double alpha) {
  double exact = alpha * static_cast<double>(n_in - 1) + 1.0;
  double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-9 || rounded < 2.0)
    throw ConfigError("scale factor " + std::to_string(alpha) +
                      " does not yield an integer node count on " + std::to_string(n_in) + " nodes");
  return static_cast<int>(rounded);
}

// ---------------------------------------------------------------------------
// Checkpoint I/O ("NHCK")
// ---------------------------------------------------------------------------
// magic "NHCK" | u32 version=1
// u32 c, blocks, d, neigh, gabor_layers, enc_dim, mlp_hidden, shuffle_u
// u8 encoding | u8 multiscale | f64 w0_init, s0_init, norm_min, norm_max
// u64 trained_iters | u32 n_entries
// per entry: u32 name_len | name | u32 ndim | u32 dims[] | f64 data[]
// trailing u32 CRC32 over everything before it.
// Entries: model parameters plus optional optimizer state under "opt." names.

struct Checkpoint {
  Model model;
  ParamMap opt_m, opt_v;   // Adam moments keyed by parameter name
  uint64_t opt_step = 0;
  bool has_opt = false;
};

namespace detail {

inline void write_entry(ByteWriter& w, const std::string& name, const Tensor& t) {
  w.u32(static_cast<uint32_t>(name.size()));
  w.str(name);
  w.u32(static_cast<uint32_t>(t.shape().size()));
  for (int dim : t.shape()) w.u32(static_cast<uint32_t>(dim));
  for (int64_t i = 0; i < t.numel(); ++i) w.f64(t.data()[i]);
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  const ModelConfig& cfg = ck.model.cfg;
  ByteWriter w;
  w.str("NHCK");
  w.u32(1);
  for (int v : {cfg.c, cfg.blocks, cfg.d, cfg.neigh, cfg.gabor_layers, cfg.enc_dim, cfg.mlp_hidden,
                cfg.shuffle_u})
    w.u32(static_cast<uint32_t>(v));
  w.u8(static_cast<uint8_t>(cfg.encoding));
  w.u8(cfg.multiscale ? 1 : 0);
  w.f64(cfg.w0_init);
  w.f64(cfg.s0_init);
  w.f64(cfg.norm_min);
  w.f64(cfg.norm_max);
  w.u64(cfg.trained_iters);

  uint32_t n_entries = static_cast<uint32_t>(ck.model.params.size());
  if (ck.has_opt) n_entries += static_cast<uint32_t>(ck.opt_m.size() + ck.opt_v.size()) + 1;
  w.u32(n_entries);
  for (const auto& [name, t] : ck.model.params) detail::write_entry(w, name, t);
  if (ck.has_opt) {
    for (const auto& [name, t] : ck.opt_m) detail::write_entry(w, "opt.m:" + name, t);
    for (const auto& [name, t] : ck.opt_v) detail::write_entry(w, "opt.v:" + name, t);
    Tensor step = Tensor::scalar(static_cast<double>(ck.opt_step));
    detail::write_entry(w, "opt.step", step);
  }
  w.u32(w.crc_from(0));
  write_file(path, w.data());
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::string bytes = read_file(path);
  if (bytes.size() < 8) throw IoError(path + ": not a checkpoint file (too short)");
  ByteReader r(bytes);
  if (r.raw(4) != "NHCK") throw IoError(path + ": not a checkpoint file (bad magic)");
  uint32_t version = r.u32();
  if (version != 1) throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
  {
    ByteReader crc_r(bytes);
    uint32_t expect = crc_r.crc_range(0, bytes.size() - 4);
    ByteReader tail(std::string_view(bytes).substr(bytes.size() - 4));
    if (tail.u32() != expect) throw IoError(path + ": checksum mismatch");
  }

  Checkpoint ck;
  ModelConfig cfg;
  cfg.c = static_cast<int>(r.u32());
  cfg.blocks = static_cast<int>(r.u32());
  cfg.d = static_cast<int>(r.u32());
  cfg.neigh = static_cast<int>(r.u32());
  cfg.gabor_layers = static_cast<int>(r.u32());
  cfg.enc_dim = static_cast<int>(r.u32());
  cfg.mlp_hidden = static_cast<int>(r.u32());
  cfg.shuffle_u = static_cast<int>(r.u32());
  uint8_t enc = r.u8();
  if (enc > 3) throw IoError(path + ": invalid encoding tag");
  cfg.encoding = static_cast<Encoding>(enc);
  cfg.multiscale = r.u8() != 0;
  cfg.w0_init = r.f64();
  cfg.s0_init = r.f64();
  cfg.norm_min = r.f64();
  cfg.norm_max = r.f64();
  cfg.trained_iters = r.u64();
  cfg.validate();
  ck.model.cfg = cfg;

  uint32_t n_entries = r.u32();
  for (uint32_t i = 0; i < n_entries; ++i) {
    uint32_t len = r.u32();
    if (len > 4096) throw IoError(path + ": implausible entry name length");
    std::string name(r.raw(len));
    uint32_t ndim = r.u32();
    if (ndim > 8) throw IoError(path + ": implausible entry rank");
    Shape shape(ndim);
    for (uint32_t k = 0; k < ndim; ++k) {
      uint32_t dim = r.u32();
      if (dim == 0 || dim > (1u << 24)) throw IoError(path + ": implausible entry extent");
      shape[k] = static_cast<int>(dim);
    }
    int64_t n = shape_numel(shape);
    if (static_cast<uint64_t>(n) * 8 > r.remaining()) throw IoError(path + ": truncated entry data");
    std::vector<double> data(static_cast<size_t>(n));
    for (double& v : data) v = r.f64();
    if (name == "opt.step") {
      ck.opt_step = static_cast<uint64_t>(data[0]);
      ck.has_opt = true;
    } else if (name.rfind("opt.m:", 0) == 0) {
      ck.opt_m.emplace(name.substr(6), Tensor::from_data(std::move(shape), std::move(data)));
      ck.has_opt = true;
    } else if (name.rfind("opt.v:", 0) == 0) {
      ck.opt_v.emplace(name.substr(6), Tensor::from_data(std::move(shape), std::move(data)));
      ck.has_opt = true;
    } else {
      ck.model.params.emplace(name, Tensor::from_data(std::move(shape), std::move(data), true));
    }
  }
  r.u32();  // CRC (verified above)
  if (!r.at_end()) throw IoError(path + ": trailing bytes after checkpoint");

  // Validate the parameter set against the config's expected skeleton.
  Model skeleton = init_params(cfg, 0);
  if (skeleton.params.size() != ck.model.params.size())
    throw IoError(path + ": parameter set inconsistent with stored config");
  for (const auto& [name, t] : skeleton.params) {
    auto it = ck.model.params.find(name);
    if (it == ck.model.params.end())
      throw IoError(path + ": missing parameter '" + name + "'");
    if (it->second.shape() != t.shape())
      throw IoError(path + ": parameter '" + name + "' has wrong shape");
  }
  if (ck.has_opt)
    for (const auto& [name, t] : ck.model.params)
      if (!ck.opt_m.count(name) || !ck.opt_v.count(name))
        throw IoError(path + ": optimizer state incomplete");
  return ck;
}

}  // namespace nhcsr
