#include "tcd/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace tcd {

namespace {

// c(k,n) += a(m,k)^T * b(m,n)
void matmul_at_b_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    const double* brow = b + static_cast<std::size_t>(i) * n;
    for (int t = 0; t < k; ++t) {
      const double av = arow[t];
      if (av == 0.0) continue;
      double* crow = c + static_cast<std::size_t>(t) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c(m,k) += a(m,n) * b(k,n)^T
void matmul_a_bt_acc(const double* a, const double* b, double* c, int m, int n, int k) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * n;
    double* crow = c + static_cast<std::size_t>(i) * k;
    for (int t = 0; t < k; ++t) {
      const double* brow = b + static_cast<std::size_t>(t) * n;
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += arow[j] * brow[j];
      crow[t] += s;
    }
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

int ParamSet::add(std::string name, Tensor t) {
  names.push_back(std::move(name));
  tensors.push_back(std::move(t));
  return static_cast<int>(tensors.size()) - 1;
}

int ParamSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

std::size_t ParamSet::total_values() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors) n += t.numel();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet z;
  z.names = names;
  for (const Tensor& t : tensors) z.tensors.push_back(Tensor::zeros(t.shape));
  return z;
}

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.requires_grad = track_ && requires_grad;
  return push(std::move(n));
}

int Tape::conv1d(int x, int w, int b, int kernel, int stride) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  const Tensor& bv = value(b);
  if (xv.ndim() != 3) throw std::invalid_argument("conv1d: input must be (B,L,C)");
  const int B = xv.dim(0), L = xv.dim(1), cin = xv.dim(2);
  if (wv.ndim() != 2 || wv.dim(0) != kernel * cin)
    throw std::invalid_argument("conv1d: weight shape mismatch " + wv.shape_str());
  const int cout = wv.dim(1);
  if (bv.numel() != static_cast<std::size_t>(cout))
    throw std::invalid_argument("conv1d: bias shape mismatch");
  const int pad = (kernel - 1) / 2;
  const int lout = (L + 2 * pad - kernel) / stride + 1;

  Tensor cols({B * lout, kernel * cin});
  for (int bi = 0; bi < B; ++bi) {
    for (int lo = 0; lo < lout; ++lo) {
      double* row = cols.data.data() + (static_cast<std::size_t>(bi) * lout + lo) * kernel * cin;
      const int l0 = lo * stride - pad;
      for (int t = 0; t < kernel; ++t) {
        const int li = l0 + t;
        if (li < 0 || li >= L) continue;  // row pre-zeroed
        const double* src = xv.data.data() + (static_cast<std::size_t>(bi) * L + li) * cin;
        for (int cc = 0; cc < cin; ++cc) row[t * cin + cc] = src[cc];
      }
    }
  }

  Tensor out({B, lout, cout});
  matmul_acc(cols.data.data(), wv.data.data(), out.data.data(), B * lout, kernel * cin, cout);
  double* od = out.data.data();
  for (int r = 0; r < B * lout; ++r)
    for (int j = 0; j < cout; ++j) od[static_cast<std::size_t>(r) * cout + j] += bv.at(j);

  Node n;
  n.op = Op::Conv1d;
  n.a = x;
  n.b = w;
  n.c = b;
  n.kernel = kernel;
  n.stride = stride;
  n.value = std::move(out);
  n.requires_grad = nodes_[x].requires_grad || nodes_[w].requires_grad || nodes_[b].requires_grad;
  if (n.requires_grad) n.scratch = std::move(cols);
  return push(std::move(n));
}

int Tape::linear(int x, int w, int b) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  const Tensor& bv = value(b);
  if (wv.ndim() != 2) throw std::invalid_argument("linear: weight must be 2-d");
  const int in = wv.dim(0), out_w = wv.dim(1);
  if (xv.ndim() < 1 || xv.dim(xv.ndim() - 1) != in)
    throw std::invalid_argument("linear: input width mismatch " + xv.shape_str());
  if (bv.numel() != static_cast<std::size_t>(out_w)) throw std::invalid_argument("linear: bias shape mismatch");
  const int rows = static_cast<int>(xv.numel()) / in;

  std::vector<int> oshape = xv.shape;
  oshape.back() = out_w;
  Tensor out(oshape);
  matmul_acc(xv.data.data(), wv.data.data(), out.data.data(), rows, in, out_w);
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < out_w; ++j) out.data[static_cast<std::size_t>(r) * out_w + j] += bv.at(j);

  Node n;
  n.op = Op::Linear;
  n.a = x;
  n.b = w;
  n.c = b;
  n.value = std::move(out);
  n.requires_grad = nodes_[x].requires_grad || nodes_[w].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

int Tape::silu(int x) {
  const Tensor& xv = value(x);
  Tensor out(xv.shape);
  for (std::size_t i = 0; i < xv.numel(); ++i) {
    const double v = xv.data[i];
    out.data[i] = v * sigmoid(v);
  }
  Node n;
  n.op = Op::Silu;
  n.a = x;
  n.value = std::move(out);
  n.requires_grad = nodes_[x].requires_grad;
  return push(std::move(n));
}

int Tape::add(int x, int y) {
  const Tensor& xv = value(x);
  const Tensor& yv = value(y);
  if (!xv.same_shape(yv)) throw std::invalid_argument("add: shape mismatch");
  Tensor out(xv.shape);
  for (std::size_t i = 0; i < xv.numel(); ++i) out.data[i] = xv.data[i] + yv.data[i];
  Node n;
  n.op = Op::Add;
  n.a = x;
  n.b = y;
  n.value = std::move(out);
  n.requires_grad = nodes_[x].requires_grad || nodes_[y].requires_grad;
  return push(std::move(n));
}

int Tape::add_rowvec(int x, int e) {
  const Tensor& xv = value(x);
  const Tensor& ev = value(e);
  if (xv.ndim() != 3 || ev.ndim() != 2 || xv.dim(0) != ev.dim(0) || xv.dim(2) != ev.dim(1))
    throw std::invalid_argument("add_rowvec: shape mismatch");
  const int B = xv.dim(0), L = xv.dim(1), C = xv.dim(2);
  Tensor out(xv.shape);
  for (int bi = 0; bi < B; ++bi)
    for (int l = 0; l < L; ++l)
      for (int cc = 0; cc < C; ++cc) out.at(bi, l, cc) = xv.at(bi, l, cc) + ev.at(bi, cc);
  Node n;
  n.op = Op::AddRowvec;
  n.a = x;
  n.b = e;
  n.value = std::move(out);
  n.requires_grad = nodes_[x].requires_grad || nodes_[e].requires_grad;
  return push(std::move(n));
}

int Tape::concat_last(int x, int y) {
  const Tensor& xv = value(x);
  const Tensor& yv = value(y);
  if (xv.ndim() != yv.ndim()) throw std::invalid_argument("concat: rank mismatch");
  for (int i = 0; i + 1 < xv.ndim(); ++i)
    if (xv.dim(i) != yv.dim(i)) throw std::invalid_argument("concat: leading shape mismatch");
  const int c1 = xv.dim(xv.ndim() - 1), c2 = yv.dim(yv.ndim() - 1);
  const int rows = static_cast<int>(xv.numel()) / c1;
  std::vector<int> oshape = xv.shape;
  oshape.back() = c1 + c2;
  Tensor out(oshape);
  for (int r = 0; r < rows; ++r) {
    double* dst = out.data.data() + static_cast<std::size_t>(r) * (c1 + c2);
    const double* s1 = xv.data.data() + static_cast<std::size_t>(r) * c1;
    const double* s2 = yv.data.data() + static_cast<std::size_t>(r) * c2;
    for (int j = 0; j < c1; ++j) dst[j] = s1[j];
    for (int j = 0; j < c2; ++j) dst[c1 + j] = s2[j];
  }
  Node n;
  n.op = Op::ConcatLast;
  n.a = x;
  n.b = y;
  n.value = std::move(out);
  n.requires_grad = nodes_[x].requires_grad || nodes_[y].requires_grad;
  return push(std::move(n));
}

int Tape::upsample2(int x) {
  const Tensor& xv = value(x);
  if (xv.ndim() != 3) throw std::invalid_argument("upsample2: input must be (B,L,C)");
  const int B = xv.dim(0), L = xv.dim(1), C = xv.dim(2);
  Tensor out({B, 2 * L, C});
  for (int bi = 0; bi < B; ++bi)
    for (int l = 0; l < L; ++l)
      for (int cc = 0; cc < C; ++cc) {
        const double v = xv.at(bi, l, cc);
        out.at(bi, 2 * l, cc) = v;
        out.at(bi, 2 * l + 1, cc) = v;
      }
  Node n;
  n.op = Op::Upsample2;
  n.a = x;
  n.value = std::move(out);
  n.requires_grad = nodes_[x].requires_grad;
  return push(std::move(n));
}

int Tape::mean_sq_diff(int x, int y) {
  const Tensor& xv = value(x);
  const Tensor& yv = value(y);
  if (!xv.same_shape(yv)) throw std::invalid_argument("mean_sq_diff: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < xv.numel(); ++i) {
    const double d = xv.data[i] - yv.data[i];
    s += d * d;
  }
  Node n;
  n.op = Op::MeanSqDiff;
  n.a = x;
  n.b = y;
  n.value = Tensor::scalar(s / static_cast<double>(xv.numel()));
  n.requires_grad = nodes_[x].requires_grad || nodes_[y].requires_grad;
  return push(std::move(n));
}

int Tape::mean_sq_diff_masked(int x, int y, Tensor mask) {
  const Tensor& xv = value(x);
  const Tensor& yv = value(y);
  if (!xv.same_shape(yv) || !xv.same_shape(mask))
    throw std::invalid_argument("mean_sq_diff_masked: shape mismatch");
  double s = 0.0, cnt = 0.0;
  for (std::size_t i = 0; i < xv.numel(); ++i) {
    if (mask.data[i] == 0.0) continue;
    const double d = xv.data[i] - yv.data[i];
    s += d * d;
    cnt += 1.0;
  }
  if (cnt == 0.0) throw std::invalid_argument("mean_sq_diff_masked: empty mask");
  Node n;
  n.op = Op::MeanSqDiffMasked;
  n.a = x;
  n.b = y;
  n.scratch = std::move(mask);
  n.kernel = static_cast<int>(cnt);  // reused as the element count
  n.value = Tensor::scalar(s / cnt);
  n.requires_grad = nodes_[x].requires_grad || nodes_[y].requires_grad;
  return push(std::move(n));
}

double Tape::scalar_value(int id) const {
  const Tensor& v = value(id);
  if (v.numel() != 1) throw std::invalid_argument("scalar_value: node is not scalar");
  return v.data[0];
}

Tensor& Tape::grad_buf(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.numel() == 0) n.grad = Tensor::zeros(n.value.shape);
  return n.grad;
}

const Tensor& Tape::grad(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!ran_backward_) throw std::logic_error("grad requested before backward");
  if (n.grad.numel() == 0) throw std::logic_error("node has no gradient");
  return n.grad;
}

void Tape::backward(int loss_id) {
  if (!track_) throw std::logic_error("backward on a non-tracking tape");
  ran_backward_ = true;
  grad_buf(loss_id).fill(1.0);

  for (int id = loss_id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || n.grad.numel() == 0) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Conv1d: {
        const Tensor& xv = value(n.a);
        const Tensor& wv = value(n.b);
        const int B = xv.dim(0), L = xv.dim(1), cin = xv.dim(2);
        const int cout = wv.dim(1);
        const int lout = n.value.dim(1);
        const int pad = (n.kernel - 1) / 2;
        const int rows = B * lout, kc = n.kernel * cin;
        if (nodes_[n.b].requires_grad)
          matmul_at_b_acc(n.scratch.data.data(), g.data.data(), grad_buf(n.b).data.data(), rows, kc, cout);
        if (nodes_[n.c].requires_grad) {
          Tensor& db = grad_buf(n.c);
          for (int r = 0; r < rows; ++r)
            for (int j = 0; j < cout; ++j) db.at(j) += g.data[static_cast<std::size_t>(r) * cout + j];
        }
        if (nodes_[n.a].requires_grad) {
          Tensor dcols({rows, kc});
          matmul_a_bt_acc(g.data.data(), wv.data.data(), dcols.data.data(), rows, cout, kc);
          Tensor& dx = grad_buf(n.a);
          for (int bi = 0; bi < B; ++bi)
            for (int lo = 0; lo < lout; ++lo) {
              const double* row = dcols.data.data() + (static_cast<std::size_t>(bi) * lout + lo) * kc;
              const int l0 = lo * n.stride - pad;
              for (int t = 0; t < n.kernel; ++t) {
                const int li = l0 + t;
                if (li < 0 || li >= L) continue;
                double* dst = dx.data.data() + (static_cast<std::size_t>(bi) * L + li) * cin;
                for (int cc = 0; cc < cin; ++cc) dst[cc] += row[t * cin + cc];
              }
            }
        }
        break;
      }
      case Op::Linear: {
        const Tensor& xv = value(n.a);
        const Tensor& wv = value(n.b);
        const int in = wv.dim(0), out_w = wv.dim(1);
        const int rows = static_cast<int>(xv.numel()) / in;
        if (nodes_[n.b].requires_grad)
          matmul_at_b_acc(xv.data.data(), g.data.data(), grad_buf(n.b).data.data(), rows, in, out_w);
        if (nodes_[n.c].requires_grad) {
          Tensor& db = grad_buf(n.c);
          for (int r = 0; r < rows; ++r)
            for (int j = 0; j < out_w; ++j) db.at(j) += g.data[static_cast<std::size_t>(r) * out_w + j];
        }
        if (nodes_[n.a].requires_grad)
          matmul_a_bt_acc(g.data.data(), wv.data.data(), grad_buf(n.a).data.data(), rows, out_w, in);
        break;
      }
      case Op::Silu: {
        if (!nodes_[n.a].requires_grad) break;
        const Tensor& xv = value(n.a);
        Tensor& dx = grad_buf(n.a);
        for (std::size_t i = 0; i < xv.numel(); ++i) {
          const double s = sigmoid(xv.data[i]);
          dx.data[i] += g.data[i] * s * (1.0 + xv.data[i] * (1.0 - s));
        }
        break;
      }
      case Op::Add: {
        if (nodes_[n.a].requires_grad) {
          Tensor& dx = grad_buf(n.a);
          for (std::size_t i = 0; i < g.numel(); ++i) dx.data[i] += g.data[i];
        }
        if (nodes_[n.b].requires_grad) {
          Tensor& dy = grad_buf(n.b);
          for (std::size_t i = 0; i < g.numel(); ++i) dy.data[i] += g.data[i];
        }
        break;
      }
      case Op::AddRowvec: {
        const int B = n.value.dim(0), L = n.value.dim(1), C = n.value.dim(2);
        if (nodes_[n.a].requires_grad) {
          Tensor& dx = grad_buf(n.a);
          for (std::size_t i = 0; i < g.numel(); ++i) dx.data[i] += g.data[i];
        }
        if (nodes_[n.b].requires_grad) {
          Tensor& de = grad_buf(n.b);
          for (int bi = 0; bi < B; ++bi)
            for (int l = 0; l < L; ++l)
              for (int cc = 0; cc < C; ++cc) de.at(bi, cc) += g.at(bi, l, cc);
        }
        break;
      }
      case Op::ConcatLast: {
        const int c1 = value(n.a).dim(value(n.a).ndim() - 1);
        const int c2 = value(n.b).dim(value(n.b).ndim() - 1);
        const int rows = static_cast<int>(value(n.a).numel()) / c1;
        if (nodes_[n.a].requires_grad) {
          Tensor& dx = grad_buf(n.a);
          for (int r = 0; r < rows; ++r)
            for (int j = 0; j < c1; ++j)
              dx.data[static_cast<std::size_t>(r) * c1 + j] += g.data[static_cast<std::size_t>(r) * (c1 + c2) + j];
        }
        if (nodes_[n.b].requires_grad) {
          Tensor& dy = grad_buf(n.b);
          for (int r = 0; r < rows; ++r)
            for (int j = 0; j < c2; ++j)
              dy.data[static_cast<std::size_t>(r) * c2 + j] +=
                  g.data[static_cast<std::size_t>(r) * (c1 + c2) + c1 + j];
        }
        break;
      }
      case Op::Upsample2: {
        if (!nodes_[n.a].requires_grad) break;
        const Tensor& xv = value(n.a);
        const int B = xv.dim(0), L = xv.dim(1), C = xv.dim(2);
        Tensor& dx = grad_buf(n.a);
        for (int bi = 0; bi < B; ++bi)
          for (int l = 0; l < L; ++l)
            for (int cc = 0; cc < C; ++cc) dx.at(bi, l, cc) += g.at(bi, 2 * l, cc) + g.at(bi, 2 * l + 1, cc);
        break;
      }
      case Op::MeanSqDiff: {
        const Tensor& xv = value(n.a);
        const Tensor& yv = value(n.b);
        const double scale = 2.0 * g.data[0] / static_cast<double>(xv.numel());
        if (nodes_[n.a].requires_grad) {
          Tensor& dx = grad_buf(n.a);
          for (std::size_t i = 0; i < xv.numel(); ++i) dx.data[i] += scale * (xv.data[i] - yv.data[i]);
        }
        if (nodes_[n.b].requires_grad) {
          Tensor& dy = grad_buf(n.b);
          for (std::size_t i = 0; i < xv.numel(); ++i) dy.data[i] -= scale * (xv.data[i] - yv.data[i]);
        }
        break;
      }
      case Op::MeanSqDiffMasked: {
        const Tensor& xv = value(n.a);
        const Tensor& yv = value(n.b);
        const double scale = 2.0 * g.data[0] / static_cast<double>(n.kernel);
        if (nodes_[n.a].requires_grad) {
          Tensor& dx = grad_buf(n.a);
          for (std::size_t i = 0; i < xv.numel(); ++i)
            if (n.scratch.data[i] != 0.0) dx.data[i] += scale * (xv.data[i] - yv.data[i]);
        }
        if (nodes_[n.b].requires_grad) {
          Tensor& dy = grad_buf(n.b);
          for (std::size_t i = 0; i < xv.numel(); ++i)
            if (n.scratch.data[i] != 0.0) dy.data[i] -= scale * (xv.data[i] - yv.data[i]);
        }
        break;
      }
    }
  }
}

std::vector<int> bind_params(Tape& tape, const ParamSet& params, bool requires_grad) {
  std::vector<int> ids;
  ids.reserve(params.size());
  for (const Tensor& t : params.tensors) ids.push_back(tape.leaf(t, requires_grad));
  return ids;
}

double grad_check(const DiffFn& f, const ParamSet& point, double h) {
  if (h <= 0.0) throw std::invalid_argument("grad_check: h must be positive");
  ParamSet p = point;
  const ParamSet analytic = f.gradient(p);
  double max_rel = 0.0;
  for (std::size_t bi = 0; bi < p.size(); ++bi) {
    Tensor& t = p[static_cast<int>(bi)];
    for (std::size_t i = 0; i < t.numel(); ++i) {
      const double orig = t.data[i];
      t.data[i] = orig + h;
      const double fp = f.value(p);
      t.data[i] = orig - h;
      const double fm = f.value(p);
      t.data[i] = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw std::runtime_error("grad_check: function evaluated non-finite at " + p.names[bi]);
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[static_cast<int>(bi)].data[i];
      const double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      if (rel > max_rel) max_rel = rel;
    }
  }
  return max_rel;
}

}  // namespace tcd
