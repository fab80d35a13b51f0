#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "nhcsr/error.hpp"

namespace nhcsr {

using Shape = std::vector<int>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) {
    if (d <= 0) throw ShapeError("tensor extents must be positive");
    n *= d;
  }
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  std::function<void(TensorImpl&)> backward_fn;  // pushes this->grad into parents
};

// Dense row-major f64 tensor with reverse-mode differentiation. Value
// semantics on the handle; the buffer and tape node are shared. Graph
// recording can be suspended with NoGradGuard for evaluation-only passes.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    auto impl = std::make_shared<TensorImpl>();
    int64_t n = shape_numel(shape);
    impl->shape = std::move(shape);
    impl->data.assign(static_cast<size_t>(n), 0.0);
    impl->requires_grad = requires_grad;
    if (requires_grad) impl->grad.assign(static_cast<size_t>(n), 0.0);
    return Tensor(std::move(impl));
  }

  static Tensor full(Shape shape, double value, bool requires_grad = false) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
    return t;
  }

  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size()))
      throw ShapeError("from_data: shape " + shape_str(shape) + " does not match data length");
    auto impl = std::make_shared<TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    if (requires_grad) impl->grad.assign(impl->data.size(), 0.0);
    return Tensor(std::move(impl));
  }

  static Tensor scalar(double value, bool requires_grad = false) {
    return from_data({1}, {value}, requires_grad);
  }

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int ndim() const { return static_cast<int>(impl_->shape.size()); }
  int size(int axis) const { return impl_->shape[static_cast<size_t>(axis)]; }
  int64_t numel() const { return static_cast<int64_t>(impl_->data.size()); }

  double* data() { return impl_->data.data(); }
  const double* data() const { return impl_->data.data(); }
  std::vector<double>& vec() { return impl_->data; }
  const std::vector<double>& vec() const { return impl_->data; }

  bool requires_grad() const { return impl_->requires_grad; }
  double* grad() { return impl_->grad.data(); }
  const double* grad() const { return impl_->grad.data(); }
  const std::vector<double>& grad_vec() const { return impl_->grad; }

  void zero_grad() { std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0); }

  double item() const {
    if (numel() != 1) throw ContractError("item: tensor is not scalar, shape " + shape_str(shape()));
    return impl_->data[0];
  }

  std::shared_ptr<TensorImpl>& impl() { return impl_; }
  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<TensorImpl> impl_;
};

namespace detail {
inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}
}  // namespace detail

struct NoGradGuard {
  NoGradGuard() : prev_(detail::grad_mode()) { detail::grad_mode() = false; }
  ~NoGradGuard() { detail::grad_mode() = prev_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

namespace detail {

inline bool recording(std::initializer_list<const Tensor*> inputs) {
  if (!grad_mode()) return false;
  for (const Tensor* t : inputs)
    if ((*t).requires_grad()) return true;
  return false;
}

// Wires a freshly computed result into the tape when recording is active.
inline Tensor make_node(Shape shape, std::vector<double> data,
                        std::initializer_list<const Tensor*> inputs,
                        std::function<void(TensorImpl&)> backward) {
  Tensor out = Tensor::from_data(std::move(shape), std::move(data), false);
  if (recording(inputs)) {
    out.impl()->requires_grad = true;
    out.impl()->grad.assign(out.impl()->data.size(), 0.0);
    for (const Tensor* t : inputs) out.impl()->parents.push_back(t->impl());
    out.impl()->backward_fn = std::move(backward);
  }
  return out;
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise operations
// ---------------------------------------------------------------------------

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "add");
  std::vector<double> out(a.vec());
  const double* pb = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] += pb[i];
  auto ia = a.impl(), ib = b.impl();
  return detail::make_node(a.shape(), std::move(out), {&a, &b}, [ia, ib](TensorImpl& self) {
    const double* g = self.grad.data();
    if (ia->requires_grad)
      for (size_t i = 0; i < ia->grad.size(); ++i) ia->grad[i] += g[i];
    if (ib->requires_grad)
      for (size_t i = 0; i < ib->grad.size(); ++i) ib->grad[i] += g[i];
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "sub");
  std::vector<double> out(a.vec());
  const double* pb = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] -= pb[i];
  auto ia = a.impl(), ib = b.impl();
  return detail::make_node(a.shape(), std::move(out), {&a, &b}, [ia, ib](TensorImpl& self) {
    const double* g = self.grad.data();
    if (ia->requires_grad)
      for (size_t i = 0; i < ia->grad.size(); ++i) ia->grad[i] += g[i];
    if (ib->requires_grad)
      for (size_t i = 0; i < ib->grad.size(); ++i) ib->grad[i] -= g[i];
  });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "mul");
  std::vector<double> out(a.vec());
  const double* pb = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= pb[i];
  auto ia = a.impl(), ib = b.impl();
  return detail::make_node(a.shape(), std::move(out), {&a, &b}, [ia, ib](TensorImpl& self) {
    const double* g = self.grad.data();
    if (ia->requires_grad)
      for (size_t i = 0; i < ia->grad.size(); ++i) ia->grad[i] += g[i] * ib->data[i];
    if (ib->requires_grad)
      for (size_t i = 0; i < ib->grad.size(); ++i) ib->grad[i] += g[i] * ia->data[i];
  });
}

namespace detail {

template <class Fwd, class Bwd>
Tensor unary_op(const Tensor& a, Fwd fwd, Bwd dfdx) {
  std::vector<double> out(a.vec().size());
  const double* pa = a.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] = fwd(pa[i]);
  auto ia = a.impl();
  return make_node(a.shape(), std::move(out), {&a}, [ia, dfdx](TensorImpl& self) {
    if (!ia->requires_grad) return;
    const double* g = self.grad.data();
    for (size_t i = 0; i < ia->grad.size(); ++i) ia->grad[i] += g[i] * dfdx(ia->data[i]);
  });
}

}  // namespace detail

inline Tensor neg(const Tensor& a) {
  return detail::unary_op(a, [](double x) { return -x; }, [](double) { return -1.0; });
}

inline Tensor relu(const Tensor& a) {
  return detail::unary_op(a, [](double x) { return x > 0.0 ? x : 0.0; },
                          [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

inline Tensor sin(const Tensor& a) {
  return detail::unary_op(a, [](double x) { return std::sin(x); },
                          [](double x) { return std::cos(x); });
}

inline Tensor cos(const Tensor& a) {
  return detail::unary_op(a, [](double x) { return std::cos(x); },
                          [](double x) { return -std::sin(x); });
}

inline Tensor square(const Tensor& a) {
  return detail::unary_op(a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

// Subgradient 0 at exact ties.
inline Tensor abs(const Tensor& a) {
  return detail::unary_op(a, [](double x) { return std::abs(x); },
                          [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

inline Tensor exp(const Tensor& a) {
  std::vector<double> out(a.vec().size());
  const double* pa = a.data();
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(pa[i]);
    if (!std::isfinite(out[i])) throw NumericError("exp: overflow to non-finite value");
  }
  auto ia = a.impl();
  // d/dx exp = exp(x); recomputed in the backward pass.
  return detail::make_node(a.shape(), std::move(out), {&a}, [ia](TensorImpl& self) {
    if (!ia->requires_grad) return;
    const double* g = self.grad.data();
    const double* y = self.data.data();
    for (size_t i = 0; i < ia->grad.size(); ++i) ia->grad[i] += g[i] * y[i];
  });
}

inline Tensor add_scalar(const Tensor& a, double c) {
  return detail::unary_op(a, [c](double x) { return x + c; }, [](double) { return 1.0; });
}

inline Tensor mul_scalar(const Tensor& a, double c) {
  return detail::unary_op(a, [c](double x) { return x * c; }, [c](double) { return c; });
}

// out = a * s where s is a learnable one-element tensor.
inline Tensor scale(const Tensor& a, const Tensor& s) {
  if (s.numel() != 1) throw ShapeError("scale: scale factor must be a one-element tensor");
  double sv = s.data()[0];
  std::vector<double> out(a.vec());
  for (double& v : out) v *= sv;
  auto ia = a.impl(), is = s.impl();
  return detail::make_node(a.shape(), std::move(out), {&a, &s}, [ia, is](TensorImpl& self) {
    const double* g = self.grad.data();
    double sv2 = is->data[0];
    if (ia->requires_grad)
      for (size_t i = 0; i < ia->grad.size(); ++i) ia->grad[i] += g[i] * sv2;
    if (is->requires_grad) {
      double acc = 0.0;
      for (size_t i = 0; i < ia->data.size(); ++i) acc += g[i] * ia->data[i];
      is->grad[0] += acc;
    }
  });
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2)
    throw ShapeError("matmul: expects rank-2 tensors, got " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  int m = a.size(0), k = a.size(1), k2 = b.size(0), n = b.size(1);
  if (k != k2)
    throw ShapeError("matmul: inner extents disagree " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
  const double* pa = a.data();
  const double* pb = b.data();
  for (int i = 0; i < m; ++i) {
    double* orow = out.data() + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      double av = pa[static_cast<size_t>(i) * k + p];
      const double* brow = pb + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  auto ia = a.impl(), ib = b.impl();
  return detail::make_node({m, n}, std::move(out), {&a, &b}, [ia, ib, m, k, n](TensorImpl& self) {
    const double* g = self.grad.data();
    if (ia->requires_grad) {
      // da = g . b^T
      for (int i = 0; i < m; ++i) {
        const double* grow = g + static_cast<size_t>(i) * n;
        double* darow = ia->grad.data() + static_cast<size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
          const double* brow = ib->data.data() + static_cast<size_t>(p) * n;
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
          darow[p] += acc;
        }
      }
    }
    if (ib->requires_grad) {
      // db = a^T . g
      for (int p = 0; p < k; ++p) {
        double* dbrow = ib->grad.data() + static_cast<size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
          double av = ia->data[static_cast<size_t>(i) * k + p];
          const double* grow = g + static_cast<size_t>(i) * n;
          for (int j = 0; j < n; ++j) dbrow[j] += av * grow[j];
        }
      }
    }
  });
}

// Adds a length-K row vector to every row of an N x K matrix (bias add).
inline Tensor add_rowvec(const Tensor& m, const Tensor& v) {
  if (m.ndim() != 2 || v.ndim() != 1 || m.size(1) != v.size(0))
    throw ShapeError("add_rowvec: incompatible shapes " + shape_str(m.shape()) + " and " +
                     shape_str(v.shape()));
  int rows = m.size(0), cols = m.size(1);
  std::vector<double> out(m.vec());
  const double* pv = v.data();
  for (int i = 0; i < rows; ++i) {
    double* row = out.data() + static_cast<size_t>(i) * cols;
    for (int j = 0; j < cols; ++j) row[j] += pv[j];
  }
  auto im = m.impl(), iv = v.impl();
  return detail::make_node(m.shape(), std::move(out), {&m, &v}, [im, iv, rows, cols](TensorImpl& self) {
    const double* g = self.grad.data();
    if (im->requires_grad)
      for (size_t i = 0; i < im->grad.size(); ++i) im->grad[i] += g[i];
    if (iv->requires_grad) {
      for (int i = 0; i < rows; ++i) {
        const double* grow = g + static_cast<size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) iv->grad[j] += grow[j];
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions and shape ops
// ---------------------------------------------------------------------------

inline Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.vec()) acc += v;
  auto ia = a.impl();
  return detail::make_node({1}, {acc}, {&a}, [ia](TensorImpl& self) {
    if (!ia->requires_grad) return;
    double g = self.grad[0];
    for (double& dv : ia->grad) dv += g;
  });
}

inline Tensor mean(const Tensor& a) { return mul_scalar(sum(a), 1.0 / static_cast<double>(a.numel())); }

inline Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel())
    throw ShapeError("reshape: element count mismatch " + shape_str(a.shape()) + " -> " +
                     shape_str(shape));
  std::vector<double> out(a.vec());
  auto ia = a.impl();
  return detail::make_node(std::move(shape), std::move(out), {&a}, [ia](TensorImpl& self) {
    if (!ia->requires_grad) return;
    const double* g = self.grad.data();
    for (size_t i = 0; i < ia->grad.size(); ++i) ia->grad[i] += g[i];
  });
}

// Softmax along `axis` with max-subtraction. NaN input is a contract breach.
inline Tensor softmax(const Tensor& a, int axis) {
  if (axis < 0) axis += a.ndim();
  if (axis < 0 || axis >= a.ndim()) throw ShapeError("softmax: axis out of range");
  int64_t outer = 1, inner = 1;
  int n = a.size(axis);
  for (int i = 0; i < axis; ++i) outer *= a.size(i);
  for (int i = axis + 1; i < a.ndim(); ++i) inner *= a.size(i);

  std::vector<double> out(a.vec().size());
  const double* pa = a.data();
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const int64_t base = o * n * inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        double v = pa[base + i * inner];
        if (std::isnan(v)) throw NumericError("softmax: NaN input");
        mx = std::max(mx, v);
      }
      double denom = 0.0;
      for (int i = 0; i < n; ++i) {
        double e = std::exp(pa[base + i * inner] - mx);
        out[static_cast<size_t>(base + i * inner)] = e;
        denom += e;
      }
      for (int i = 0; i < n; ++i) out[static_cast<size_t>(base + i * inner)] /= denom;
    }
  }
  auto ia = a.impl();
  return detail::make_node(a.shape(), std::move(out), {&a}, [ia, outer, inner, n](TensorImpl& self) {
    if (!ia->requires_grad) return;
    const double* g = self.grad.data();
    const double* y = self.data.data();
    for (int64_t o = 0; o < outer; ++o) {
      for (int64_t in = 0; in < inner; ++in) {
        const int64_t base = o * n * inner + in;
        double dot = 0.0;
        for (int i = 0; i < n; ++i) {
          int64_t idx = base + i * inner;
          dot += g[idx] * y[idx];
        }
        for (int i = 0; i < n; ++i) {
          int64_t idx = base + i * inner;
          ia->grad[static_cast<size_t>(idx)] += (g[idx] - dot) * y[idx];
        }
      }
    }
  });
}

// Stacks B equal-length vectors into a B x Q matrix.
inline Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw ShapeError("stack_rows: empty input");
  int q = static_cast<int>(rows[0].numel());
  for (const Tensor& r : rows)
    if (r.ndim() != 1 || r.numel() != q) throw ShapeError("stack_rows: rows must be equal-length vectors");
  int b = static_cast<int>(rows.size());
  std::vector<double> out;
  out.reserve(static_cast<size_t>(b) * q);
  for (const Tensor& r : rows) out.insert(out.end(), r.vec().begin(), r.vec().end());

  bool rec = detail::grad_mode();
  bool any = false;
  for (const Tensor& r : rows) any = any || r.requires_grad();
  Tensor out_t = Tensor::from_data({b, q}, std::move(out), false);
  if (rec && any) {
    out_t.impl()->requires_grad = true;
    out_t.impl()->grad.assign(out_t.impl()->data.size(), 0.0);
    std::vector<std::shared_ptr<TensorImpl>> parents;
    for (const Tensor& r : rows) parents.push_back(r.impl());
    out_t.impl()->parents = parents;
    out_t.impl()->backward_fn = [parents, q](TensorImpl& self) {
      for (size_t bi = 0; bi < parents.size(); ++bi) {
        auto& p = parents[bi];
        if (!p->requires_grad) continue;
        const double* g = self.grad.data() + bi * static_cast<size_t>(q);
        for (int i = 0; i < q; ++i) p->grad[static_cast<size_t>(i)] += g[i];
      }
    };
  }
  return out_t;
}

// Gathers columns idx of a B x Q matrix into B x P.
inline Tensor gather_cols(const Tensor& t, const std::vector<int>& idx) {
  if (t.ndim() != 2) throw ShapeError("gather_cols: expects rank-2 tensor");
  int b = t.size(0), q = t.size(1);
  for (int j : idx)
    if (j < 0 || j >= q) throw ContractError("gather_cols: index out of range");
  int p = static_cast<int>(idx.size());
  std::vector<double> out(static_cast<size_t>(b) * p);
  const double* pt = t.data();
  for (int bi = 0; bi < b; ++bi)
    for (int j = 0; j < p; ++j)
      out[static_cast<size_t>(bi) * p + j] = pt[static_cast<size_t>(bi) * q + idx[static_cast<size_t>(j)]];
  auto it = t.impl();
  return detail::make_node({b, p}, std::move(out), {&t}, [it, idx, b, q, p](TensorImpl& self) {
    if (!it->requires_grad) return;
    const double* g = self.grad.data();
    for (int bi = 0; bi < b; ++bi)
      for (int j = 0; j < p; ++j)
        it->grad[static_cast<size_t>(bi) * q + idx[static_cast<size_t>(j)]] +=
            g[static_cast<size_t>(bi) * p + j];
  });
}

// Row-wise cosine similarity of two B x P matrices -> length-B vector.
// A row where either side has zero norm yields similarity 0 (and zero grad).
inline Tensor cosine_rows(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "cosine_rows");
  if (a.ndim() != 2) throw ShapeError("cosine_rows: expects rank-2 tensors");
  int rows = a.size(0), p = a.size(1);
  std::vector<double> out(static_cast<size_t>(rows));
  const double* pa = a.data();
  const double* pb = b.data();
  for (int i = 0; i < rows; ++i) {
    const double* ra = pa + static_cast<size_t>(i) * p;
    const double* rb = pb + static_cast<size_t>(i) * p;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int j = 0; j < p; ++j) {
      dot += ra[j] * rb[j];
      na += ra[j] * ra[j];
      nb += rb[j] * rb[j];
    }
    out[static_cast<size_t>(i)] = (na == 0.0 || nb == 0.0) ? 0.0 : dot / std::sqrt(na * nb);
  }
  auto ia = a.impl(), ib = b.impl();
  return detail::make_node({rows}, std::move(out), {&a, &b}, [ia, ib, rows, p](TensorImpl& self) {
    const double* g = self.grad.data();
    for (int i = 0; i < rows; ++i) {
      const double* ra = ia->data.data() + static_cast<size_t>(i) * p;
      const double* rb = ib->data.data() + static_cast<size_t>(i) * p;
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (int j = 0; j < p; ++j) {
        dot += ra[j] * rb[j];
        na += ra[j] * ra[j];
        nb += rb[j] * rb[j];
      }
      if (na == 0.0 || nb == 0.0) continue;
      double inv = 1.0 / std::sqrt(na * nb);
      double sim = dot * inv;
      double gi = g[i];
      if (ia->requires_grad) {
        double* da = ia->grad.data() + static_cast<size_t>(i) * p;
        for (int j = 0; j < p; ++j) da[j] += gi * (rb[j] * inv - sim * ra[j] / na);
      }
      if (ib->requires_grad) {
        double* db = ib->grad.data() + static_cast<size_t>(i) * p;
        for (int j = 0; j < p; ++j) db[j] += gi * (ra[j] * inv - sim * rb[j] / nb);
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Reverse pass
// ---------------------------------------------------------------------------

// Accumulates d(loss)/d(t) into every reachable tensor that requires grad.
// Grads are not reset here; repeated calls accumulate.
inline void backward(const Tensor& loss) {
  if (loss.numel() != 1) throw ContractError("backward: loss must be scalar");
  if (!loss.requires_grad())
    throw ContractError("backward: loss is not connected to any tracked tensor");

  // Iterative post-order DFS for reverse topological order.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> visited;
  std::vector<std::pair<TensorImpl*, size_t>> stack;
  stack.emplace_back(loss.impl().get(), 0);
  visited.insert(loss.impl().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorImpl* p = node->parents[next++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.impl()->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

}  // namespace nhcsr
