#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace tcd {

// Dense row-major tensor of 64-bit floats.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);
  Tensor(std::vector<int> s, std::vector<double> d);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, double v);
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  std::size_t numel() const { return data.size(); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  int ndim() const { return static_cast<int>(shape.size()); }

  double& at(int i) { return data[static_cast<std::size_t>(i)]; }
  double at(int i) const { return data[static_cast<std::size_t>(i)]; }
  double& at(int i, int j);
  double at(int i, int j) const;
  double& at(int i, int j, int k);
  double at(int i, int j, int k) const;

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;
  void fill(double v);

  std::string shape_str() const;
};

std::size_t shape_numel(const std::vector<int>& shape);

// Throws std::runtime_error naming `what` if t holds a NaN or Inf.
void check_finite(const Tensor& t, const std::string& what);

// C = A(m,k) * B(k,n), accumulating into C (caller zeroes C).
void matmul_acc(const double* a, const double* b, double* c, int m, int k, int n);

}  // namespace tcd
