#pragma once

#include <cassert>
#include <cstddef>
#include <string>
#include <vector>

namespace coordparse {

// Dense row-major matrix. A vector is a Mat with cols == 1 or a plain
// std::vector; layers use whichever is convenient.
template <typename S>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<S> d;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, S(0)) {}

  S& operator()(int r, int c) { return d[static_cast<size_t>(r) * cols + c]; }
  S operator()(int r, int c) const { return d[static_cast<size_t>(r) * cols + c]; }
  S* row(int r) { return d.data() + static_cast<size_t>(r) * cols; }
  const S* row(int r) const { return d.data() + static_cast<size_t>(r) * cols; }
  size_t size() const { return d.size(); }
  void zero() { std::fill(d.begin(), d.end(), S(0)); }
};

template <typename S>
using Vec = std::vector<S>;

// A named learnable tensor with its gradient accumulator.
template <typename S>
struct Param {
  std::string name;
  Mat<S> value;
  Mat<S> grad;

  Param() = default;
  Param(std::string n, int r, int c) : name(std::move(n)), value(r, c), grad(r, c) {}
  void zero_grad() { grad.zero(); }
};

}  // namespace coordparse
