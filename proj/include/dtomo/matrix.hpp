#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace dtomo {

// dense row-major matrix, minimal interface
template <typename T>
class matrix {
 public:
  matrix() = default;
  matrix(std::size_t dim1, std::size_t dim2, T fill = T{})
      : dim1_(dim1), dim2_(dim2), data_(dim1 * dim2, fill) {}

  std::size_t dim1() const { return dim1_; }
  std::size_t dim2() const { return dim2_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t i, std::size_t j) {
    assert(i < dim1_ && j < dim2_);
    return data_[i * dim2_ + j];
  }
  const T& operator()(std::size_t i, std::size_t j) const {
    assert(i < dim1_ && j < dim2_);
    return data_[i * dim2_ + j];
  }

  T* row(std::size_t i) {
    assert(i < dim1_);
    return data_.data() + i * dim2_;
  }
  const T* row(std::size_t i) const {
    assert(i < dim1_);
    return data_.data() + i * dim2_;
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const matrix&) const = default;

 private:
  std::size_t dim1_ = 0;
  std::size_t dim2_ = 0;
  std::vector<T> data_;
};

}  // namespace dtomo
