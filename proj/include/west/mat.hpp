#pragma once

#include <cstddef>
#include <vector>

namespace west {

// Row-major dense matrix. Vectors are 1 x n.
template <typename T>
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<T> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) { resize(r, c); }

  void resize(std::size_t r, std::size_t c) {
    rows = r;
    cols = c;
    v.assign(r * c, T(0));
  }

  void zero() { std::fill(v.begin(), v.end(), T(0)); }

  std::size_t size() const { return v.size(); }
  T* data() { return v.data(); }
  const T* data() const { return v.data(); }
  T* row(std::size_t r) { return v.data() + r * cols; }
  const T* row(std::size_t r) const { return v.data() + r * cols; }
  T& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  const T& at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

} // namespace west
