#pragma once

// Image-shaped tensor operations: [C,H,W] layout, row-major within a channel.
// All ops are differentiable w.r.t. their tensor inputs (coordinates are
// treated as constants throughout).

#include <cmath>
#include <vector>

#include "nhcsr/tensor.hpp"

namespace nhcsr {

// 2D convolution, stride 1, zero padding k/2 (odd k), with bias.
// x: [Cin,H,W], w: [Cout,Cin,k,k], b: [Cout] -> [Cout,H,W].
inline Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.ndim() != 3 || w.ndim() != 4 || b.ndim() != 1)
    throw ShapeError("conv2d: expects x[C,H,W], w[Co,Ci,k,k], b[Co]");
  const int ci = x.size(0), h = x.size(1), wd = x.size(2);
  const int co = w.size(0), k = w.size(2);
  if (w.size(1) != ci || w.size(3) != k || b.size(0) != co)
    throw ShapeError("conv2d: weight/bias shapes inconsistent with input " + shape_str(x.shape()) +
                     " vs " + shape_str(w.shape()));
  if (k % 2 == 0) throw ShapeError("conv2d: kernel size must be odd");
  const int p = k / 2;

  std::vector<double> out(static_cast<size_t>(co) * h * wd);
  const double* px = x.data();
  const double* pw = w.data();
  const double* pb = b.data();
  for (int oc = 0; oc < co; ++oc) {
    double* ochan = out.data() + static_cast<size_t>(oc) * h * wd;
    std::fill(ochan, ochan + static_cast<size_t>(h) * wd, pb[oc]);
    for (int icn = 0; icn < ci; ++icn) {
      const double* ichan = px + static_cast<size_t>(icn) * h * wd;
      const double* wk = pw + (static_cast<size_t>(oc) * ci + icn) * k * k;
      for (int y = 0; y < h; ++y) {
        double* orow = ochan + static_cast<size_t>(y) * wd;
        for (int ky = 0; ky < k; ++ky) {
          int iy = y + ky - p;
          if (iy < 0 || iy >= h) continue;
          const double* irow = ichan + static_cast<size_t>(iy) * wd;
          for (int kx = 0; kx < k; ++kx) {
            double wv = wk[ky * k + kx];
            int dx = kx - p;
            int x0 = std::max(0, -dx), x1 = std::min(wd, wd - dx);
            for (int xx = x0; xx < x1; ++xx) orow[xx] += wv * irow[xx + dx];
          }
        }
      }
    }
  }

  auto ix = x.impl(), iw = w.impl(), ib = b.impl();
  return detail::make_node({co, h, wd}, std::move(out), {&x, &w, &b},
                           [ix, iw, ib, ci, co, h, wd, k, p](TensorImpl& self) {
    const double* g = self.grad.data();
    if (ib->requires_grad) {
      for (int oc = 0; oc < co; ++oc) {
        const double* gchan = g + static_cast<size_t>(oc) * h * wd;
        double acc = 0.0;
        for (int i = 0; i < h * wd; ++i) acc += gchan[i];
        ib->grad[static_cast<size_t>(oc)] += acc;
      }
    }
    for (int oc = 0; oc < co; ++oc) {
      const double* gchan = g + static_cast<size_t>(oc) * h * wd;
      for (int icn = 0; icn < ci; ++icn) {
        const double* ichan = ix->data.data() + static_cast<size_t>(icn) * h * wd;
        double* dichan = ix->requires_grad ? ix->grad.data() + static_cast<size_t>(icn) * h * wd : nullptr;
        const double* wk = iw->data.data() + (static_cast<size_t>(oc) * ci + icn) * k * k;
        double* dwk = iw->requires_grad ? iw->grad.data() + (static_cast<size_t>(oc) * ci + icn) * k * k : nullptr;
        for (int y = 0; y < h; ++y) {
          const double* grow = gchan + static_cast<size_t>(y) * wd;
          for (int ky = 0; ky < k; ++ky) {
            int iy = y + ky - p;
            if (iy < 0 || iy >= h) continue;
            const double* irow = ichan + static_cast<size_t>(iy) * wd;
            double* dirow = dichan ? dichan + static_cast<size_t>(iy) * wd : nullptr;
            for (int kx = 0; kx < k; ++kx) {
              int dx = kx - p;
              int x0 = std::max(0, -dx), x1 = std::min(wd, wd - dx);
              if (dwk) {
                double acc = 0.0;
                for (int xx = x0; xx < x1; ++xx) acc += grow[xx] * irow[xx + dx];
                dwk[ky * k + kx] += acc;
              }
              if (dirow) {
                double wv = wk[ky * k + kx];
                for (int xx = x0; xx < x1; ++xx) dirow[xx + dx] += wv * grow[xx];
              }
            }
          }
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Coordinate mapping: normalized [-1,1] node-centered coordinates, where -1
// maps to node index 0 and +1 to node index N-1 along each axis; the first
// coordinate component x runs over columns, the second y over rows.
// ---------------------------------------------------------------------------

inline double coord_to_index(double c, int n) {
  double idx = (c + 1.0) * 0.5 * static_cast<double>(n - 1);
  double r = std::round(idx);
  if (std::abs(idx - r) < 1e-9) idx = r;  // snap so node queries hit nodes exactly
  return std::min(std::max(idx, 0.0), static_cast<double>(n - 1));
}

inline double index_to_coord(int i, int n) {
  return n == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
}

// Bilinear point sampling. x: [C,H,W]; xy: 2Q doubles, (x,y) per query,
// normalized and clamped into the grid -> [Q,C].
inline Tensor grid_sample_bilinear(const Tensor& x, const std::vector<double>& xy) {
  if (x.ndim() != 3) throw ShapeError("grid_sample_bilinear: expects [C,H,W]");
  if (xy.size() % 2 != 0) throw ContractError("grid_sample_bilinear: coordinate list must be pairs");
  const int c = x.size(0), h = x.size(1), w = x.size(2);
  const int q = static_cast<int>(xy.size() / 2);

  // 4 taps per query: indices into a channel plane plus weights.
  std::vector<int> tap(static_cast<size_t>(q) * 4);
  std::vector<double> tw(static_cast<size_t>(q) * 4);
  for (int i = 0; i < q; ++i) {
    double col = coord_to_index(xy[static_cast<size_t>(2 * i)], w);
    double row = coord_to_index(xy[static_cast<size_t>(2 * i) + 1], h);
    int c0 = static_cast<int>(std::floor(col)), r0 = static_cast<int>(std::floor(row));
    int c1 = std::min(c0 + 1, w - 1), r1 = std::min(r0 + 1, h - 1);
    double fx = col - c0, fy = row - r0;
    tap[static_cast<size_t>(4 * i) + 0] = r0 * w + c0;
    tap[static_cast<size_t>(4 * i) + 1] = r0 * w + c1;
    tap[static_cast<size_t>(4 * i) + 2] = r1 * w + c0;
    tap[static_cast<size_t>(4 * i) + 3] = r1 * w + c1;
    tw[static_cast<size_t>(4 * i) + 0] = (1.0 - fy) * (1.0 - fx);
    tw[static_cast<size_t>(4 * i) + 1] = (1.0 - fy) * fx;
    tw[static_cast<size_t>(4 * i) + 2] = fy * (1.0 - fx);
    tw[static_cast<size_t>(4 * i) + 3] = fy * fx;
  }

  std::vector<double> out(static_cast<size_t>(q) * c);
  const double* px = x.data();
  for (int i = 0; i < q; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      const double* plane = px + static_cast<size_t>(ch) * h * w;
      double acc = 0.0;
      for (int t = 0; t < 4; ++t)
        acc += tw[static_cast<size_t>(4 * i) + t] * plane[tap[static_cast<size_t>(4 * i) + t]];
      out[static_cast<size_t>(i) * c + ch] = acc;
    }
  }
  auto ix = x.impl();
  return detail::make_node({q, c}, std::move(out), {&x},
                           [ix, tap = std::move(tap), tw = std::move(tw), q, c, h, w](TensorImpl& self) {
    if (!ix->requires_grad) return;
    const double* g = self.grad.data();
    for (int i = 0; i < q; ++i) {
      for (int ch = 0; ch < c; ++ch) {
        double gv = g[static_cast<size_t>(i) * c + ch];
        double* plane = ix->grad.data() + static_cast<size_t>(ch) * h * w;
        for (int t = 0; t < 4; ++t)
          plane[tap[static_cast<size_t>(4 * i) + t]] += gv * tw[static_cast<size_t>(4 * i) + t];
      }
    }
  });
}

// Rearranges [C*u*u, H, W] -> [C, u*H, u*W] with
// out[c, u*i+p, u*j+q] = in[c*u*u + p*u + q, i, j].
inline Tensor pixel_shuffle(const Tensor& x, int u) {
  if (x.ndim() != 3) throw ShapeError("pixel_shuffle: expects [C,H,W]");
  if (u <= 0 || x.size(0) % (u * u) != 0)
    throw ShapeError("pixel_shuffle: channel count " + std::to_string(x.size(0)) +
                     " not divisible by u^2");
  const int cu = x.size(0), h = x.size(1), w = x.size(2);
  const int c = cu / (u * u), ho = u * h, wo = u * w;
  std::vector<double> out(static_cast<size_t>(c) * ho * wo);
  const double* px = x.data();
  for (int ch = 0; ch < c; ++ch)
    for (int pp = 0; pp < u; ++pp)
      for (int qq = 0; qq < u; ++qq) {
        const double* in_plane = px + static_cast<size_t>(ch * u * u + pp * u + qq) * h * w;
        for (int i = 0; i < h; ++i) {
          double* orow = out.data() + (static_cast<size_t>(ch) * ho + (u * i + pp)) * wo;
          const double* irow = in_plane + static_cast<size_t>(i) * w;
          for (int j = 0; j < w; ++j) orow[static_cast<size_t>(u * j + qq)] = irow[j];
        }
      }
  auto ix = x.impl();
  return detail::make_node({c, ho, wo}, std::move(out), {&x}, [ix, c, h, w, u, ho, wo](TensorImpl& self) {
    if (!ix->requires_grad) return;
    const double* g = self.grad.data();
    for (int ch = 0; ch < c; ++ch)
      for (int pp = 0; pp < u; ++pp)
        for (int qq = 0; qq < u; ++qq) {
          double* dplane = ix->grad.data() + static_cast<size_t>(ch * u * u + pp * u + qq) * h * w;
          for (int i = 0; i < h; ++i) {
            const double* grow = g + (static_cast<size_t>(ch) * ho + (u * i + pp)) * wo;
            double* drow = dplane + static_cast<size_t>(i) * w;
            for (int j = 0; j < w; ++j) drow[j] += grow[static_cast<size_t>(u * j + qq)];
          }
        }
  });
}

namespace detail {

// Catmull-Rom kernel (cubic convolution, a = -0.5).
inline double catmull_rom(double t) {
  t = std::abs(t);
  if (t <= 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
  if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
  return 0.0;
}

struct CubicTaps {
  std::vector<int> idx;   // 4 per output coordinate, clamped (edge replication)
  std::vector<double> w;  // 4 per output coordinate
};

// Node-centered axis mapping: output node i maps to source position
// i*(n-1)/(n_out-1); same-size output degenerates to the identity.
inline CubicTaps cubic_axis_taps(int n, int n_out) {
  CubicTaps t;
  t.idx.resize(static_cast<size_t>(n_out) * 4);
  t.w.resize(static_cast<size_t>(n_out) * 4);
  for (int i = 0; i < n_out; ++i) {
    double src = n_out == 1 ? 0.0
                            : static_cast<double>(i) * static_cast<double>(n - 1) /
                                  static_cast<double>(n_out - 1);
    int i0 = static_cast<int>(std::floor(src));
    double f = src - i0;
    for (int k = 0; k < 4; ++k) {
      int j = i0 - 1 + k;
      t.idx[static_cast<size_t>(4 * i) + k] = std::min(std::max(j, 0), n - 1);
      t.w[static_cast<size_t>(4 * i) + k] = catmull_rom(f - static_cast<double>(k - 1));
    }
  }
  return t;
}

}  // namespace detail

// Separable bicubic (Catmull-Rom) resize with edge replication.
// x: [C,H,W] -> [C,h_out,w_out]; node-centered mapping, identity when sizes match.
inline Tensor bicubic_resize(const Tensor& x, int h_out, int w_out) {
  if (x.ndim() != 3) throw ShapeError("bicubic_resize: expects [C,H,W]");
  if (h_out < 1 || w_out < 1) throw ShapeError("bicubic_resize: target size must be positive");
  const int c = x.size(0), h = x.size(1), w = x.size(2);
  detail::CubicTaps ty = detail::cubic_axis_taps(h, h_out);
  detail::CubicTaps tx = detail::cubic_axis_taps(w, w_out);

  std::vector<double> out(static_cast<size_t>(c) * h_out * w_out);
  const double* px = x.data();
  // Row pass into a scratch buffer [h, w_out], then column pass.
  std::vector<double> scratch(static_cast<size_t>(h) * w_out);
  for (int ch = 0; ch < c; ++ch) {
    const double* plane = px + static_cast<size_t>(ch) * h * w;
    for (int y = 0; y < h; ++y) {
      const double* irow = plane + static_cast<size_t>(y) * w;
      double* srow = scratch.data() + static_cast<size_t>(y) * w_out;
      for (int xo = 0; xo < w_out; ++xo) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k)
          acc += tx.w[static_cast<size_t>(4 * xo) + k] * irow[tx.idx[static_cast<size_t>(4 * xo) + k]];
        srow[xo] = acc;
      }
    }
    double* oplane = out.data() + static_cast<size_t>(ch) * h_out * w_out;
    for (int yo = 0; yo < h_out; ++yo) {
      double* orow = oplane + static_cast<size_t>(yo) * w_out;
      for (int xo = 0; xo < w_out; ++xo) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k)
          acc += ty.w[static_cast<size_t>(4 * yo) + k] *
                 scratch[static_cast<size_t>(ty.idx[static_cast<size_t>(4 * yo) + k]) * w_out + xo];
        orow[xo] = acc;
      }
    }
  }
  auto ix = x.impl();
  return detail::make_node({c, h_out, w_out}, std::move(out), {&x},
                           [ix, ty = std::move(ty), tx = std::move(tx), c, h, w, h_out, w_out](TensorImpl& self) {
    if (!ix->requires_grad) return;
    const double* g = self.grad.data();
    std::vector<double> scratch(static_cast<size_t>(h) * w_out);
    for (int ch = 0; ch < c; ++ch) {
      // Transpose of the column pass: scatter output grads over source rows.
      std::fill(scratch.begin(), scratch.end(), 0.0);
      const double* gplane = g + static_cast<size_t>(ch) * h_out * w_out;
      for (int yo = 0; yo < h_out; ++yo) {
        const double* grow = gplane + static_cast<size_t>(yo) * w_out;
        for (int k = 0; k < 4; ++k) {
          double wv = ty.w[static_cast<size_t>(4 * yo) + k];
          double* srow = scratch.data() +
                         static_cast<size_t>(ty.idx[static_cast<size_t>(4 * yo) + k]) * w_out;
          for (int xo = 0; xo < w_out; ++xo) srow[xo] += wv * grow[xo];
        }
      }
      // Transpose of the row pass.
      double* dplane = ix->grad.data() + static_cast<size_t>(ch) * h * w;
      for (int y = 0; y < h; ++y) {
        const double* srow = scratch.data() + static_cast<size_t>(y) * w_out;
        double* drow = dplane + static_cast<size_t>(y) * w;
        for (int xo = 0; xo < w_out; ++xo) {
          double gv = srow[xo];
          for (int k = 0; k < 4; ++k)
            drow[tx.idx[static_cast<size_t>(4 * xo) + k]] += gv * tx.w[static_cast<size_t>(4 * xo) + k];
        }
      }
    }
  });
}

inline Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 3 || b.ndim() != 3 || a.size(1) != b.size(1) || a.size(2) != b.size(2))
    throw ShapeError("concat_channels: spatial shapes differ: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  int ca = a.size(0), cb = b.size(0), h = a.size(1), w = a.size(2);
  std::vector<double> out;
  out.reserve(static_cast<size_t>(ca + cb) * h * w);
  out.insert(out.end(), a.vec().begin(), a.vec().end());
  out.insert(out.end(), b.vec().begin(), b.vec().end());
  auto ia = a.impl(), ib = b.impl();
  return detail::make_node({ca + cb, h, w}, std::move(out), {&a, &b}, [ia, ib](TensorImpl& self) {
    const double* g = self.grad.data();
    if (ia->requires_grad)
      for (size_t i = 0; i < ia->grad.size(); ++i) ia->grad[i] += g[i];
    if (ib->requires_grad) {
      const double* g2 = g + ia->data.size();
      for (size_t i = 0; i < ib->grad.size(); ++i) ib->grad[i] += g2[i];
    }
  });
}

// Gathers per-query token features. x: [C,H,W]; idx: M linear pixel indices
// (row*W+col, may repeat) -> [M,C].
inline Tensor gather_pixels(const Tensor& x, const std::vector<int>& idx) {
  if (x.ndim() != 3) throw ShapeError("gather_pixels: expects [C,H,W]");
  const int c = x.size(0), h = x.size(1), w = x.size(2);
  for (int j : idx)
    if (j < 0 || j >= h * w) throw ContractError("gather_pixels: index out of range");
  const int m = static_cast<int>(idx.size());
  std::vector<double> out(static_cast<size_t>(m) * c);
  const double* px = x.data();
  for (int i = 0; i < m; ++i)
    for (int ch = 0; ch < c; ++ch)
      out[static_cast<size_t>(i) * c + ch] = px[static_cast<size_t>(ch) * h * w + idx[static_cast<size_t>(i)]];
  auto ix = x.impl();
  return detail::make_node({m, c}, std::move(out), {&x}, [ix, idx, c, h, w, m](TensorImpl& self) {
    if (!ix->requires_grad) return;
    const double* g = self.grad.data();
    for (int i = 0; i < m; ++i)
      for (int ch = 0; ch < c; ++ch)
        ix->grad[static_cast<size_t>(ch) * h * w + idx[static_cast<size_t>(i)]] +=
            g[static_cast<size_t>(i) * c + ch];
  });
}

// Per-query dot products between one query vector and its T tokens.
// q: [Q,D], k: [Q*T,D] -> [Q,T] with out[a,t] = <q[a], k[a*T+t]>.
inline Tensor qk_scores(const Tensor& q, const Tensor& k, int t) {
  if (q.ndim() != 2 || k.ndim() != 2 || k.size(0) != q.size(0) * t || k.size(1) != q.size(1))
    throw ShapeError("qk_scores: incompatible shapes " + shape_str(q.shape()) + " and " +
                     shape_str(k.shape()));
  const int nq = q.size(0), d = q.size(1);
  std::vector<double> out(static_cast<size_t>(nq) * t);
  const double* pq = q.data();
  const double* pk = k.data();
  for (int a = 0; a < nq; ++a) {
    const double* qrow = pq + static_cast<size_t>(a) * d;
    for (int tt = 0; tt < t; ++tt) {
      const double* krow = pk + (static_cast<size_t>(a) * t + tt) * d;
      double acc = 0.0;
      for (int j = 0; j < d; ++j) acc += qrow[j] * krow[j];
      out[static_cast<size_t>(a) * t + tt] = acc;
    }
  }
  auto iq = q.impl(), ik = k.impl();
  return detail::make_node({nq, t}, std::move(out), {&q, &k}, [iq, ik, nq, d, t](TensorImpl& self) {
    const double* g = self.grad.data();
    for (int a = 0; a < nq; ++a) {
      const double* qrow = iq->data.data() + static_cast<size_t>(a) * d;
      double* dqrow = iq->requires_grad ? iq->grad.data() + static_cast<size_t>(a) * d : nullptr;
      for (int tt = 0; tt < t; ++tt) {
        double gv = g[static_cast<size_t>(a) * t + tt];
        const double* krow = ik->data.data() + (static_cast<size_t>(a) * t + tt) * d;
        if (dqrow)
          for (int j = 0; j < d; ++j) dqrow[j] += gv * krow[j];
        if (ik->requires_grad) {
          double* dkrow = ik->grad.data() + (static_cast<size_t>(a) * t + tt) * d;
          for (int j = 0; j < d; ++j) dkrow[j] += gv * qrow[j];
        }
      }
    }
  });
}

// Attention-weighted token mix. w: [Q,T], v: [Q*T,D] -> [Q,D] with
// out[a] = sum_t w[a,t] * v[a*T+t].
inline Tensor attn_mix(const Tensor& w, const Tensor& v) {
  if (w.ndim() != 2 || v.ndim() != 2 || v.size(0) % w.size(0) != 0 ||
      v.size(0) != w.size(0) * w.size(1))
    throw ShapeError("attn_mix: incompatible shapes " + shape_str(w.shape()) + " and " +
                     shape_str(v.shape()));
  const int nq = w.size(0), t = w.size(1), d = v.size(1);
  std::vector<double> out(static_cast<size_t>(nq) * d, 0.0);
  const double* pw = w.data();
  const double* pv = v.data();
  for (int a = 0; a < nq; ++a) {
    double* orow = out.data() + static_cast<size_t>(a) * d;
    for (int tt = 0; tt < t; ++tt) {
      double wv = pw[static_cast<size_t>(a) * t + tt];
      const double* vrow = pv + (static_cast<size_t>(a) * t + tt) * d;
      for (int j = 0; j < d; ++j) orow[j] += wv * vrow[j];
    }
  }
  auto iw = w.impl(), iv = v.impl();
  return detail::make_node({nq, d}, std::move(out), {&w, &v}, [iw, iv, nq, t, d](TensorImpl& self) {
    const double* g = self.grad.data();
    for (int a = 0; a < nq; ++a) {
      const double* grow = g + static_cast<size_t>(a) * d;
      for (int tt = 0; tt < t; ++tt) {
        const double* vrow = iv->data.data() + (static_cast<size_t>(a) * t + tt) * d;
        if (iw->requires_grad) {
          double acc = 0.0;
          for (int j = 0; j < d; ++j) acc += grow[j] * vrow[j];
          iw->grad[static_cast<size_t>(a) * t + tt] += acc;
        }
        if (iv->requires_grad) {
          double wv = iw->data[static_cast<size_t>(a) * t + tt];
          double* dvrow = iv->grad.data() + (static_cast<size_t>(a) * t + tt) * d;
          for (int j = 0; j < d; ++j) dvrow[j] += wv * grow[j];
        }
      }
    }
  });
}

}  // namespace nhcsr
