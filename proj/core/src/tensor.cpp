#include "psa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>

#include "psa/errors.hpp"

namespace psa {

std::size_t shape_size(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw Error(ErrorKind::ShapeMismatch, "zero-sized axis in " + shape_string(shape_));
  }
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_size(shape_) != data_.size()) {
    throw Error(ErrorKind::ShapeMismatch, "shape " + shape_string(shape_) + " needs " +
                                              std::to_string(shape_size(shape_)) +
                                              " values, got " + std::to_string(data_.size()));
  }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(n * m);
  for (const auto& r : rows) {
    if (r.size() != m) throw Error(ErrorKind::ShapeMismatch, "ragged rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Tensor({n, m}, std::move(values));
}

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::reshaped(Shape shape) const& { return Tensor(std::move(shape), data_); }

Tensor Tensor::reshaped(Shape shape) && { return Tensor(std::move(shape), std::move(data_)); }

Tensor Tensor::slice_rows(std::size_t first, std::size_t count) const {
  if (rank() == 0 || first + count > shape_[0] || count == 0) {
    throw Error(ErrorKind::ShapeMismatch, "row slice out of range");
  }
  const std::size_t stride = data_.size() / shape_[0];
  Shape s = shape_;
  s[0] = count;
  std::vector<double> values(data_.begin() + static_cast<std::ptrdiff_t>(first * stride),
                             data_.begin() + static_cast<std::ptrdiff_t>((first + count) * stride));
  return Tensor(std::move(s), std::move(values));
}

Tensor Tensor::gather_rows(std::span<const std::size_t> rows) const {
  if (rank() == 0 || rows.empty()) throw Error(ErrorKind::ShapeMismatch, "empty gather");
  const std::size_t stride = data_.size() / shape_[0];
  Shape s = shape_;
  s[0] = rows.size();
  std::vector<double> values(rows.size() * stride);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= shape_[0]) throw Error(ErrorKind::ShapeMismatch, "gather index out of range");
    std::memcpy(values.data() + i * stride, data_.data() + rows[i] * stride,
                stride * sizeof(double));
  }
  return Tensor(std::move(s), std::move(values));
}

Tensor stack(std::span<const Tensor> items) {
  if (items.empty()) throw Error(ErrorKind::ShapeMismatch, "cannot stack zero tensors");
  const Shape& inner = items.front().shape();
  Shape s{items.size()};
  s.insert(s.end(), inner.begin(), inner.end());
  std::vector<double> values;
  values.reserve(shape_size(s));
  for (const auto& t : items) {
    if (t.shape() != inner) {
      throw Error(ErrorKind::ShapeMismatch, "stack of " + shape_string(t.shape()) + " onto " +
                                                shape_string(inner));
    }
    values.insert(values.end(), t.values().begin(), t.values().end());
  }
  return Tensor(std::move(s), std::move(values));
}

}  // namespace psa
