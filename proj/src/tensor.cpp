#include "tcd/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tcd {

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("tensor: negative dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)), data(shape_numel(shape), 0.0) {}

Tensor::Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
  if (shape_numel(shape) != data.size())
    throw std::invalid_argument("tensor: shape/data size mismatch");
}

Tensor Tensor::full(std::vector<int> s, double v) {
  Tensor t(std::move(s));
  t.fill(v);
  return t;
}

double& Tensor::at(int i, int j) {
  return data[static_cast<std::size_t>(i) * shape[1] + j];
}
double Tensor::at(int i, int j) const {
  return data[static_cast<std::size_t>(i) * shape[1] + j];
}
double& Tensor::at(int i, int j, int k) {
  return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
}
double Tensor::at(int i, int j, int k) const {
  return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::fill(double v) {
  for (double& x : data) x = v;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ")";
  return os.str();
}

void check_finite(const Tensor& t, const std::string& what) {
  if (!t.all_finite()) throw std::runtime_error("non-finite values in " + what);
}

void matmul_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int t = 0; t < k; ++t) {
      const double av = arow[t];
      if (av == 0.0) continue;
      const double* brow = b + static_cast<std::size_t>(t) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace tcd
