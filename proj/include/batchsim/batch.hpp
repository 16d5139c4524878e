#pragma once

// Batched values: one entry per parallel environment, environment index is the
// contiguous axis (structure of arrays).

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace batchsim {

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw ContractViolation(what);
}

template <std::floating_point T>
class BatchScalar {
 public:
  BatchScalar() = default;
  explicit BatchScalar(std::size_t batch, T fill = T(0)) : values_(batch, fill) {}
  BatchScalar(std::initializer_list<T> init) : values_(init) {}
  explicit BatchScalar(std::vector<T> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  T& operator[](std::size_t e) noexcept { return values_[e]; }
  T operator[](std::size_t e) const noexcept { return values_[e]; }
  T* data() noexcept { return values_.data(); }
  const T* data() const noexcept { return values_.data(); }
  std::span<T> span() noexcept { return values_; }
  std::span<const T> span() const noexcept { return values_; }
  const std::vector<T>& values() const noexcept { return values_; }

  void fill(T v) { std::fill(values_.begin(), values_.end(), v); }
  void resize(std::size_t batch, T fill = T(0)) { values_.assign(batch, fill); }

  bool operator==(const BatchScalar&) const = default;

 private:
  std::vector<T> values_;
};

template <std::floating_point T>
struct BatchVec2 {
  BatchScalar<T> x;
  BatchScalar<T> y;

  BatchVec2() = default;
  explicit BatchVec2(std::size_t batch, T fx = T(0), T fy = T(0)) : x(batch, fx), y(batch, fy) {}
  BatchVec2(BatchScalar<T> xs, BatchScalar<T> ys) : x(std::move(xs)), y(std::move(ys)) {
    require(x.size() == y.size(), "BatchVec2: x and y lengths differ");
  }

  std::size_t size() const noexcept { return x.size(); }
  void fill(T fx, T fy) {
    x.fill(fx);
    y.fill(fy);
  }
  void resize(std::size_t batch) {
    x.resize(batch);
    y.resize(batch);
  }

  bool operator==(const BatchVec2&) const = default;
};

class BatchMask {
 public:
  BatchMask() = default;
  explicit BatchMask(std::size_t batch, bool fill = false) : flags_(batch, fill ? 1 : 0) {}
  BatchMask(std::initializer_list<bool> init) {
    flags_.reserve(init.size());
    for (bool b : init) flags_.push_back(b ? 1 : 0);
  }

  std::size_t size() const noexcept { return flags_.size(); }
  bool operator[](std::size_t e) const noexcept { return flags_[e] != 0; }
  void set(std::size_t e, bool v) noexcept { flags_[e] = v ? 1 : 0; }
  void fill(bool v) { std::fill(flags_.begin(), flags_.end(), v ? 1 : 0); }
  bool any() const noexcept {
    return std::any_of(flags_.begin(), flags_.end(), [](std::uint8_t f) { return f != 0; });
  }
  bool all() const noexcept {
    return std::all_of(flags_.begin(), flags_.end(), [](std::uint8_t f) { return f != 0; });
  }
  std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
  }
  const std::uint8_t* data() const noexcept { return flags_.data(); }

  bool operator==(const BatchMask&) const = default;

 private:
  std::vector<std::uint8_t> flags_;
};

/// A fixed-length real vector per environment (observations, LIDAR scans,
/// communication). Stored feature-major: element (e, k) lives at k * batch + e.
template <std::floating_point T>
class BatchVector {
 public:
  BatchVector() = default;
  BatchVector(std::size_t batch, std::size_t dim, T fill = T(0))
      : batch_(batch), dim_(dim), data_(batch * dim, fill) {}

  std::size_t batch() const noexcept { return batch_; }
  std::size_t dim() const noexcept { return dim_; }

  T& operator()(std::size_t e, std::size_t k) noexcept { return data_[k * batch_ + e]; }
  T operator()(std::size_t e, std::size_t k) const noexcept { return data_[k * batch_ + e]; }

  T* column(std::size_t k) noexcept { return data_.data() + k * batch_; }
  const T* column(std::size_t k) const noexcept { return data_.data() + k * batch_; }

  /// Copies one environment's vector out (length dim).
  std::vector<T> row(std::size_t e) const {
    std::vector<T> out(dim_);
    for (std::size_t k = 0; k < dim_; ++k) out[k] = (*this)(e, k);
    return out;
  }
  void set_row(std::size_t e, std::span<const T> v) {
    require(v.size() == dim_, "BatchVector::set_row: length mismatch");
    for (std::size_t k = 0; k < dim_; ++k) (*this)(e, k) = v[k];
  }

  const std::vector<T>& raw() const noexcept { return data_; }
  std::vector<T>& raw() noexcept { return data_; }

  bool operator==(const BatchVector&) const = default;

 private:
  std::size_t batch_ = 0;
  std::size_t dim_ = 0;
  std::vector<T> data_;
};

/// Builder for assembling an observation column by column.
template <std::floating_point T>
class ColumnWriter {
 public:
  explicit ColumnWriter(BatchVector<T>& out) : out_(out) {}
  T* next() {
    require(k_ < out_.dim(), "ColumnWriter: observation wider than declared");
    return out_.column(k_++);
  }
  void put(const BatchScalar<T>& s) { std::copy_n(s.data(), out_.batch(), next()); }
  void put(const BatchVec2<T>& v) {
    put(v.x);
    put(v.y);
  }
  std::size_t written() const noexcept { return k_; }

 private:
  BatchVector<T>& out_;
  std::size_t k_ = 0;
};

template <std::floating_point T>
BatchScalar<T> masked_select(const BatchMask& mask, const BatchScalar<T>& a, const BatchScalar<T>& b) {
  require(mask.size() == a.size() && a.size() == b.size(), "masked_select: length mismatch");
  BatchScalar<T> out(a.size());
  for (std::size_t e = 0; e < a.size(); ++e) out[e] = mask[e] ? a[e] : b[e];
  return out;
}

template <std::floating_point T>
BatchVec2<T> masked_select(const BatchMask& mask, const BatchVec2<T>& a, const BatchVec2<T>& b) {
  return {masked_select(mask, a.x, b.x), masked_select(mask, a.y, b.y)};
}

/// Scales each (x, y) pair in place so its norm is at most max_norm.
template <std::floating_point T>
inline void clamp_norm_inplace(T& x, T& y, T max_norm) noexcept {
  const T n2 = x * x + y * y;
  if (n2 > max_norm * max_norm) {
    const T scale = max_norm / std::sqrt(n2);
    x *= scale;
    y *= scale;
  }
}

template <std::floating_point T>
BatchVec2<T> clamp_norm(const BatchVec2<T>& v, T max_norm) {
  require(max_norm > T(0), "clamp_norm: max_norm must be positive");
  BatchVec2<T> out = v;
  for (std::size_t e = 0; e < v.size(); ++e) clamp_norm_inplace(out.x[e], out.y[e], max_norm);
  return out;
}

template <std::floating_point T>
bool all_finite(const BatchScalar<T>& s) {
  return std::all_of(s.values().begin(), s.values().end(), [](T v) { return std::isfinite(v); });
}

template <std::floating_point T>
bool all_finite(const BatchVec2<T>& v) {
  return all_finite(v.x) && all_finite(v.y);
}

template <std::floating_point T>
bool all_finite(const BatchVector<T>& v) {
  return std::all_of(v.raw().begin(), v.raw().end(), [](T x) { return std::isfinite(x); });
}

}  // namespace batchsim
