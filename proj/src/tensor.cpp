#include "tensor.hpp"

#include <sstream>
#include <stdexcept>

namespace heprune {

std::int64_t shape_size(const std::vector<int>& dims) {
  std::int64_t n = 1;
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("tensor dimension must be positive");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int> dims) : shape(std::move(dims)) {
  data.assign(static_cast<std::size_t>(shape_size(shape)), 0.0);
}

Tensor::Tensor(std::vector<int> dims, std::vector<double> values)
    : shape(std::move(dims)), data(std::move(values)) {
  if (shape_size(shape) != static_cast<std::int64_t>(data.size()))
    throw std::invalid_argument("tensor data length does not match shape");
}

Tensor Tensor::full(std::vector<int> dims, double value) {
  Tensor t(std::move(dims));
  t.fill(value);
  return t;
}

void Tensor::fill(double value) {
  for (double& x : data) x = value;
}

void check_shape(const Tensor& t, const std::vector<int>& dims, const char* what) {
  if (t.shape == dims) return;
  std::ostringstream msg;
  msg << what << ": expected shape (";
  for (std::size_t i = 0; i < dims.size(); ++i) msg << (i ? "," : "") << dims[i];
  msg << "), got (";
  for (std::size_t i = 0; i < t.shape.size(); ++i) msg << (i ? "," : "") << t.shape[i];
  msg << ")";
  throw std::invalid_argument(msg.str());
}

}  // namespace heprune
