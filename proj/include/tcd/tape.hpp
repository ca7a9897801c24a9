#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tcd/tensor.hpp"

namespace tcd {

// Named collection of trainable tensors.
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Tensor> tensors;

  int add(std::string name, Tensor t);
  int index_of(const std::string& name) const;
  Tensor& operator[](int i) { return tensors[static_cast<std::size_t>(i)]; }
  const Tensor& operator[](int i) const { return tensors[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return tensors.size(); }
  std::size_t total_values() const;
  ParamSet zeros_like() const;
};

// Recorded computation tape. Ops evaluate eagerly; backward() replays the
// record in reverse and accumulates gradients into per-node buffers.
// Covers exactly the ops the denoiser and inverse-dynamics nets need.
class Tape {
 public:
  explicit Tape(bool track_gradients = true) : track_(track_gradients) {}

  int leaf(Tensor value, bool requires_grad = false);

  // x:(B,L,Cin) * w:(k*Cin,Cout) + b:(Cout) -> (B,Lout,Cout),
  // zero padding (k-1)/2, Lout = (L + 2*pad - k)/stride + 1.
  int conv1d(int x, int w, int b, int kernel, int stride = 1);
  // x:(N,In) * w:(In,Out) + b:(Out); leading dims of x are flattened.
  int linear(int x, int w, int b);
  int silu(int x);
  int add(int x, int y);
  // x:(B,L,C) + e:(B,C) broadcast over L.
  int add_rowvec(int x, int e);
  int concat_last(int x, int y);
  // (B,L,C) -> (B,2L,C) nearest-neighbour.
  int upsample2(int x);
  // mean((x-y)^2) over all elements -> scalar node.
  int mean_sq_diff(int x, int y);
  // mean((x-y)^2) over elements where mask != 0; mask is a constant.
  int mean_sq_diff_masked(int x, int y, Tensor mask);

  const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  double scalar_value(int id) const;

  void backward(int loss_id);
  const Tensor& grad(int id) const;

 private:
  enum class Op {
    Leaf,
    Conv1d,
    Linear,
    Silu,
    Add,
    AddRowvec,
    ConcatLast,
    Upsample2,
    MeanSqDiff,
    MeanSqDiffMasked
  };

  struct Node {
    Op op;
    int a = -1, b = -1, c = -1;
    int kernel = 0, stride = 1;
    Tensor value;
    Tensor scratch;  // im2col buffer for conv nodes
    Tensor grad;
    bool requires_grad = false;
  };

  int push(Node n);
  Tensor& grad_buf(int id);

  std::vector<Node> nodes_;
  bool track_;
  bool ran_backward_ = false;
};

// Registers every parameter block on the tape (in ParamSet order).
std::vector<int> bind_params(Tape& tape, const ParamSet& params, bool requires_grad);

// Differentiable scalar function: value plus analytic gradient.
struct DiffFn {
  std::function<double(const ParamSet&)> value;
  std::function<ParamSet(const ParamSet&)> gradient;
};

// Max over all parameter entries of |analytic - central difference| /
// max(1, |analytic|). Throws if f evaluates non-finite.
double grad_check(const DiffFn& f, const ParamSet& point, double h);

}  // namespace tcd
